"""Static analyzer for data reuse and energy efficiency of DNN compute graphs.

Counts MACs, weights, and activations over a declarative layer graph,
derives arithmetic-intensity and weighted-intensity metrics, classifies
workloads against hardware rooflines, and validates the metrics against
measured power/latency via correlation statistics.
"""

from .errors import DegenerateDataError, InputError
from .graph import (
    CycleError,
    DanglingInputError,
    DuplicateNameError,
    LayerSpec,
    ModelError,
    ModelGraph,
    ModelSyntaxError,
    ShapeError,
    TensorShape,
    UnknownKindError,
    infer_shapes,
    parse_model,
    serialize_model,
    topo_order,
)
from .layercost import LayerCost, closed_form_ai, conv_cost, fc_cost, layer_cost
from .measure import (
    EnergyMetrics,
    MeasurementRecord,
    average_power,
    energy_efficiency,
    energy_metrics,
    epp,
    load_measurements,
    load_power_samples,
    serialize_measurements,
)
from .metrics import (
    CaseTag,
    DerivedMetrics,
    ai_from_reuse,
    automl_metric,
    classify_case,
    derive_metrics,
    disparity,
    reuse_bound_holds,
    weighted_intensity,
)
from .netprofile import (
    LayerStats,
    NetworkProfile,
    aggregate,
    batch_scale,
    layerwise_ai_stats,
    peak_concurrent_activations,
)
from .roofline import (
    Bound,
    HardwareSpec,
    RooflineChart,
    RooflinePoint,
    attainable_throughput,
    classify,
    load_hardware_spec,
    roofline_points,
)
from .stats import (
    CalibrationCurve,
    CalibrationPoint,
    ConfidenceInterval,
    alpha_grid,
    alpha_sweep,
    calibration_report,
    fisher_ci,
    fisher_z_width,
    min_sample_size,
    pearson,
    select_alpha,
    spearman,
)

__version__ = "0.1.0"
