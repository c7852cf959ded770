"""Whole-network aggregation: cumulative counts, reuse ratios, liveness.

Activation counting convention for network totals: every produced
tensor is counted exactly once, meaning the network input plus each
layer output that is not written in place. Summing per-layer
ifmap+ofmap counts instead would double-count every interior tensor of
a chain.

Per-layer intensity (layerwise_ai_stats) divides a layer's MACs by its
weights plus the tensor it produces; the layer owns its output, while
its input was already paid for by the producer.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace

from .errors import DegenerateDataError, InputError
from .graph import ModelGraph, topo_order
from .layercost import layer_cost


@dataclass(frozen=True)
class NetworkProfile:
    """Cumulative work/data counts and the ratios derived from them."""

    macs: float
    weights: float
    activations: float
    peak_concurrent: float | None = None
    batch: int = 1

    def __post_init__(self):
        if self.macs < 0 or self.weights < 0 or self.activations < 0:
            raise InputError("profile counts must be non-negative")
        if self.weights + self.activations <= 0:
            raise DegenerateDataError("network has no weights or activations")

    @property
    def ai_c(self) -> float:
        return self.macs / (self.weights + self.activations)

    @property
    def weight_reuse(self) -> float:
        if self.weights <= 0:
            raise DegenerateDataError("weight reuse undefined: no weights")
        return self.macs / self.weights

    @property
    def activation_reuse(self) -> float:
        if self.activations <= 0:
            raise DegenerateDataError("activation reuse undefined: no activations")
        return self.macs / self.activations

    @property
    def a_over_w(self) -> float:
        if self.weights <= 0:
            raise DegenerateDataError("A/W undefined: no weights")
        return self.activations / self.weights

    @classmethod
    def from_reuse(cls, weight_reuse: float, activation_reuse: float) -> "NetworkProfile":
        """Smallest profile with the given reuse ratios.

        Ratios fix a profile only up to scale, so macs is pinned to
        weight_reuse * activation_reuse, giving W = activation_reuse and
        A = weight_reuse.
        """
        if weight_reuse <= 0 or activation_reuse <= 0:
            raise InputError("reuse ratios must be positive")
        return cls(
            macs=weight_reuse * activation_reuse,
            weights=activation_reuse,
            activations=weight_reuse,
        )


@dataclass(frozen=True)
class LayerStats:
    """Per-layer arithmetic intensities of MAC-bearing layers plus summary stats."""

    per_layer_ai: tuple  # (layer name, intensity) pairs in execution order
    median: float
    variance: float


def aggregate(graph: ModelGraph) -> NetworkProfile:
    """Sum layer costs over the whole graph at batch size 1."""
    if not graph.layers:
        raise InputError("empty graph")
    macs = 0
    weights = 0
    activations = 0
    for spec in topo_order(graph):
        cost = layer_cost(graph, spec)
        macs += cost.macs
        weights += cost.weights
        # Count each produced tensor once. In-place layers reuse their
        # producer's storage; everything else, the input included,
        # contributes exactly its output elements.
        if not (spec.in_place and spec.kind in ("relu", "batchnorm")):
            activations += graph.output_shape(spec.name).element_count()
    return NetworkProfile(
        macs=macs,
        weights=weights,
        activations=activations,
        peak_concurrent=peak_concurrent_activations(graph),
    )


def layerwise_ai_stats(graph: ModelGraph) -> LayerStats:
    """Intensity per conv/fc layer, with median and population variance."""
    per_layer = []
    for spec in topo_order(graph):
        if spec.kind not in ("conv", "fc"):
            continue
        cost = layer_cost(graph, spec)
        produced = graph.output_shape(spec.name).element_count()
        per_layer.append((spec.name, cost.macs / (cost.weights + produced)))
    if not per_layer:
        raise DegenerateDataError("no MAC-bearing layers")
    values = [ai for _, ai in per_layer]
    return LayerStats(
        per_layer_ai=tuple(per_layer),
        median=statistics.median(values),
        variance=statistics.pvariance(values),
    )


def peak_concurrent_activations(graph: ModelGraph) -> int:
    """Largest total of simultaneously live tensor elements.

    A tensor is live from the step that produces it until the last step
    that consumes it; in-place layers alias their input storage instead
    of producing a new tensor.
    """
    order = topo_order(graph)
    storage = {}
    for spec in order:
        if spec.in_place and spec.kind in ("relu", "batchnorm"):
            storage[spec.name] = storage[spec.inputs[0]]
        else:
            storage[spec.name] = spec.name

    born = {}
    dies = {}
    for step, spec in enumerate(order):
        root = storage[spec.name]
        born.setdefault(root, step)
        dies[root] = step
        for ref in spec.inputs:
            dies[storage[ref]] = step

    peak = 0
    for step in range(len(order)):
        live = sum(
            graph.output_shape(root).element_count()
            for root in born
            if born[root] <= step <= dies[root]
        )
        peak = max(peak, live)
    return peak


def batch_scale(profile: NetworkProfile, b: int) -> NetworkProfile:
    """Scale a batch-1 profile to batch b: work and activations grow, weights do not."""
    if b < 1:
        raise InputError(f"batch size must be >= 1, got {b}")
    if profile.batch != 1:
        raise InputError("batch_scale expects a batch-1 profile")
    if b == 1:
        return profile
    return replace(
        profile,
        macs=b * profile.macs,
        activations=b * profile.activations,
        peak_concurrent=None if profile.peak_concurrent is None else b * profile.peak_concurrent,
        batch=b,
    )
