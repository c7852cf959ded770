"""Whole-artifact checks over the bundled fixtures.

Each test is one acceptance ticket: a quantitative claim about the
analyzer run end to end on the reference data that ships in fixtures/.
Run with -v for one pass/fail line per ticket.
"""

from __future__ import annotations

import csv
import math
import random

import pytest

from dnnreuse.graph import LayerSpec, TensorShape, infer_shapes, parse_model
from dnnreuse.layercost import conv_cost
from dnnreuse.measure import load_measurements
from dnnreuse.metrics import ai_from_reuse, disparity, reuse_bound_holds, weighted_intensity
from dnnreuse.netprofile import NetworkProfile, aggregate, layerwise_ai_stats
from dnnreuse.roofline import Bound, classify, load_hardware_spec
from dnnreuse.stats import alpha_sweep, fisher_ci, fisher_z_width, min_sample_size, pearson, spearman

from oracles import brute_force_conv, disparity_closed_form


def close(got: float, want: float, rel: float = 0.005, abs_tol: float = 0.05) -> bool:
    """Within the rounding slack of a two-decimal reference value."""
    return abs(got - want) <= max(abs_tol, rel * abs(want))


@pytest.fixture(scope="module")
def reference_rows(fixture_dir):
    with (fixture_dir / "reference_metrics.csv").open() as fh:
        return {row["model"]: {k: float(v) for k, v in row.items() if k != "model"} for row in csv.DictReader(fh)}


@pytest.fixture(scope="module")
def reference_profiles(reference_rows):
    return {
        model: NetworkProfile.from_reuse(row["mc_over_w"], row["mc_over_a"])
        for model, row in reference_rows.items()
    }


@pytest.fixture(scope="module")
def graphs(model_dir):
    out = {}
    for path in sorted(model_dir.glob("*.yaml")):
        out[path.stem] = infer_shapes(parse_model(path.read_text(), name=path.stem))
    return out


@pytest.fixture(scope="module")
def analyzer_profiles(graphs):
    return {name: aggregate(graph) for name, graph in graphs.items()}


def test_01_reference_metrics_recompute_from_reuse_pairs(reference_rows, reference_profiles):
    assert len(reference_rows) == 25
    for model, row in reference_rows.items():
        profile = reference_profiles[model]
        assert close(ai_from_reuse(row["mc_over_w"], row["mc_over_a"]), row["ai_c"]), model
        assert close(weighted_intensity(profile, 0.8), row["di"]), model
        assert close(disparity(profile, 0.8), row["d_f"]), model
        assert close(profile.a_over_w, row["a_over_w"]), model
    # spot anchors, written out so a fixture edit cannot silently drift
    assert close(weighted_intensity(reference_profiles["alexnet"], 0.8), 72.89)
    assert close(disparity(reference_profiles["alexnet"], 0.8), -535.16)
    assert close(weighted_intensity(reference_profiles["vgg-16"], 0.8), 113.02)
    assert close(disparity(reference_profiles["nin"], 0.8), 32.60)
    assert close(ai_from_reuse(124.80, 12.36), 11.24)


def test_02_convolution_family_relative_costs():
    def cost(out_channels, kernel, pad, groups):
        spec = LayerSpec(
            name="c",
            kind="conv",
            inputs=("x",),
            params={
                "out_channels": out_channels,
                "kernel_h": kernel,
                "kernel_w": kernel,
                "stride_h": 1,
                "stride_w": 1,
                "pad_h": pad,
                "pad_w": pad,
                "groups": groups,
            },
        )
        return conv_cost(TensorShape(256, 28, 28), spec, TensorShape(out_channels, 28, 28))

    standard = cost(256, 3, 1, 1)
    families = {
        "pointwise": (cost(256, 1, 0, 1), (0.24, 0.111, 0.111)),
        "group": (cost(256, 3, 1, 4), (0.45, 0.250, 0.250)),
        "depthwise": (cost(256, 3, 1, 256), (0.01, 0.004, 0.004)),
    }
    base_ai = standard.macs / (standard.weights + standard.activations)
    base_ra = standard.macs / standard.activations
    for family, (got, want) in families.items():
        rel_ai = (got.macs / (got.weights + got.activations)) / base_ai
        rel_macs = got.macs / standard.macs
        rel_ra = (got.macs / got.activations) / base_ra
        want_ai, want_macs, want_ra = want
        assert abs(rel_ai - want_ai) <= 0.01, family
        assert abs(rel_macs - want_macs) <= 0.01, family
        assert abs(rel_ra - want_ra) <= 0.01, family


def test_03_fisher_interval_bounds_at_n25():
    cases = [
        (0.70, 0.95, 0.42, 0.86),
        (0.70, 0.99, 0.31, 0.89),
        (0.85, 0.95, 0.68, 0.93),
        (0.85, 0.99, 0.61, 0.95),
        (0.66, 0.95, 0.36, 0.84),
        (0.66, 0.99, 0.24, 0.87),
        (0.86, 0.95, 0.70, 0.94),
        (0.86, 0.99, 0.63, 0.95),
    ]
    for r, level, want_lower, want_upper in cases:
        ci = fisher_ci(r, 25, level)
        assert abs(ci.lower - want_lower) <= 0.01, (r, level)
        assert abs(ci.upper - want_upper) <= 0.01, (r, level)


def test_04_minimum_sample_size_and_z_width():
    assert min_sample_size(0.95, 1.0) == 19
    assert abs(fisher_z_width(25, 0.95) - 0.836) <= 0.001


def test_05_conv_cost_matches_exhaustive_enumeration():
    rng = random.Random(20260816)
    families = ["standard", "pointwise", "group", "depthwise"]
    checked = {f: 0 for f in families}
    for i in range(1000):
        family = families[i % 4]
        while True:
            if family == "depthwise":
                m = n = g = rng.randint(1, 16)
                kh, kw = rng.randint(1, 16), rng.randint(1, 16)
            elif family == "pointwise":
                g, kh, kw = 1, 1, 1
                m, n = rng.randint(1, 16), rng.randint(1, 16)
            elif family == "group":
                g = rng.choice([2, 4, 8])
                m = g * rng.randint(1, 16 // g)
                n = g * rng.randint(1, 16 // g)
                kh, kw = rng.randint(1, 16), rng.randint(1, 16)
            else:
                g = 1
                m, n = rng.randint(1, 16), rng.randint(1, 16)
                kh, kw = rng.randint(1, 16), rng.randint(1, 16)
            ih, iw = rng.randint(1, 16), rng.randint(1, 16)
            oh, ow = rng.randint(1, 16), rng.randint(1, 16)
            if n * (m // g) * kh * kw * oh * ow <= 80_000:
                break
        spec = LayerSpec(
            name="c",
            kind="conv",
            inputs=("x",),
            params={
                "out_channels": n,
                "kernel_h": kh,
                "kernel_w": kw,
                "stride_h": 1,
                "stride_w": 1,
                "pad_h": 0,
                "pad_w": 0,
                "groups": g,
            },
        )
        got = conv_cost(TensorShape(m, ih, iw), spec, TensorShape(n, oh, ow))
        assert (got.macs, got.weights, got.activations) == brute_force_conv(m, n, kh, kw, ih, iw, oh, ow, g), (
            family,
            (m, n, kh, kw, ih, iw, oh, ow, g),
        )
        checked[family] += 1
    assert all(count >= 250 for count in checked.values())


def test_06_cumulative_intensity_bounded_by_quarter_reuse_sum():
    rng = random.Random(99)
    for _ in range(1000):
        w = rng.uniform(1e-3, 1e9)
        a = rng.uniform(1e-3, 1e9)
        macs = rng.uniform(1e-3, 1e12)
        profile = NetworkProfile(macs=macs, weights=w, activations=a)
        quarter = (profile.weight_reuse + profile.activation_reuse) / 4
        assert quarter - profile.ai_c >= -1e-9
        holds, slack = reuse_bound_holds(profile)
        assert holds
        assert slack == pytest.approx(quarter - profile.ai_c)
    balanced = NetworkProfile(macs=123.0, weights=7.5, activations=7.5)
    assert (balanced.weight_reuse + balanced.activation_reuse) / 4 == pytest.approx(balanced.ai_c, abs=1e-12)
    skewed = NetworkProfile(macs=123.0, weights=7.5, activations=30.0)
    assert (skewed.weight_reuse + skewed.activation_reuse) / 4 - skewed.ai_c > 1e-6


def test_07_disparity_closed_form_consistency(reference_rows, reference_profiles):
    rng = random.Random(7)
    for _ in range(500):
        profile = NetworkProfile(
            macs=rng.uniform(1e3, 1e12),
            weights=rng.uniform(1e-2, 1e9),
            activations=rng.uniform(1e-2, 1e9),
        )
        want = disparity_closed_form(profile.weights, profile.activations)
        assert disparity(profile, 0.8) == pytest.approx(want, rel=1e-9)
    for model, profile in reference_profiles.items():
        want = disparity_closed_form(profile.weights, profile.activations)
        assert disparity(profile, 0.8) == pytest.approx(want, rel=1e-9), model
    # A tempting regrouping of the same algebra, 75 - 6.25*(A/W + 3*W/A),
    # gets the coefficients wrong: on the first reference row it lands
    # near -497 instead of the recorded -535.16. Keep the definitional form.
    alexnet = reference_profiles["alexnet"]
    wrong = 75 - 6.25 * (alexnet.a_over_w + 3 / alexnet.a_over_w)
    assert wrong == pytest.approx(-497.2, abs=1.0)
    assert abs(wrong - reference_rows["alexnet"]["d_f"]) > 30


def test_08_weighted_intensity_calibrates_against_measured_efficiency(
    fixture_dir, reference_profiles, analyzer_profiles
):
    records = load_measurements((fixture_dir / "measurements.csv").read_text())
    by_key = {(r.model, r.device, r.batch): r for r in records}
    order = sorted(reference_profiles)
    failures = []
    for device in ("P100", "P4000"):
        for batch in (1, 4):
            efficiencies = []
            for model in order:
                rec = by_key[(model, device, batch)]
                macs = analyzer_profiles[model].macs
                efficiencies.append(batch * macs / (rec.p_avg_w * rec.i_t_ms / 1000.0))
            profiles = [reference_profiles[m] for m in order]
            curve = alpha_sweep(profiles, efficiencies)
            tag = f"{device} B={batch}"
            r_ai = pearson([p.ai_c for p in profiles], efficiencies)
            idx_08 = min(range(len(curve.points)), key=lambda i: abs(curve.points[i].alpha - 0.8))
            r_di = curve.points[idx_08].r_p
            if not r_di > r_ai:
                failures.append(f"{tag}: r_p(DI)={r_di:.4f} not above r_p(AI_c)={r_ai:.4f}")
            gains = [b.r_p - a.r_p for a, b in zip(curve.points[: idx_08 + 1], curve.points[1 : idx_08 + 1])]
            if any(g < 0 for g in gains):
                failures.append(f"{tag}: r_p grid decreases before alpha=0.8")
            if abs(curve.selected_alpha - 0.80) > 0.05 + 1e-9:
                failures.append(f"{tag}: selected alpha {curve.selected_alpha:.2f} outside 0.80 +/- one grid step")
            if not 0.80 <= r_di <= 0.92:
                failures.append(f"{tag}: r_p(DI)={r_di:.4f} outside [0.80, 0.92]")
    assert not failures, "\n" + "\n".join(failures)


def test_09_roofline_verdicts_flip_between_metrics(hardware_dir, analyzer_profiles):
    for hw_name in ("p4000", "p100"):
        hw = load_hardware_spec((hardware_dir / f"{hw_name}.yaml").read_text())
        ai = {m: analyzer_profiles[m].ai_c for m in analyzer_profiles}
        assert classify(hw, ai["alexnet"]) is Bound.MEMORY, hw_name
        for model in ("mobilenet-v1", "densenet-121", "xceptionnet"):
            assert classify(hw, ai[model]) is Bound.COMPUTE, (hw_name, model)
        di = {m: weighted_intensity(analyzer_profiles[m], 0.8) for m in ("alexnet", "mobilenet-v1")}
        assert classify(hw, di["alexnet"]) is Bound.COMPUTE, hw_name
        assert classify(hw, di["mobilenet-v1"]) is Bound.MEMORY, hw_name


def test_10_layerwise_intensity_medians(graphs):
    vgg = layerwise_ai_stats(graphs["vgg-16"])
    assert vgg.median == pytest.approx(560, rel=0.10)
    mobilenet = layerwise_ai_stats(graphs["mobilenet-v1"])
    assert mobilenet.median == pytest.approx(18, rel=0.10)


def test_11_correlation_units():
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(9 / math.sqrt(84), abs=1e-9)
    assert round(pearson([1, 2, 3], [1, 2, 4]), 5) == 0.98198
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-9)
    # with ties, spearman must equal pearson over average ranks, exactly
    assert spearman([1, 2, 3, 4], [1, 2, 2, 4]) == pearson([1, 2, 3, 4], [1, 2.5, 2.5, 4])
