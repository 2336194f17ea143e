"""Tests for preset resolution, config parsing, and check clauses."""

import json

import numpy as np
import pytest

from maskedpls.harness import (
    Axis,
    PointSummary,
    SweepResult,
    SweepSpec,
)
from maskedpls.matio import write_matrix
from maskedpls.presets import (
    PRESET_NAMES,
    ConfigError,
    evaluate_check,
    parse_config,
    preset_config,
)
from maskedpls.streams import substream
from maskedpls.synth import ModelConfig


def _point(**overrides) -> PointSummary:
    fields = dict(axis1=1.0, axis2=None, mean_r2x=0.5, std_r2x=0.05,
                  mean_r2y=0.6, std_r2y=0.05, mean_stability=float("nan"),
                  std_stability=float("nan"), theory_r2x=0.5, theory_r2y=0.6,
                  theta_crit=0.5, trials_requested=25, trials_effective=25,
                  seeds_digest="0" * 16, valid=True, theta=1.0, rho=1.0,
                  n_samples=1000, dx=200, dy=150, mean_runtime=0.01,
                  errors=())
    fields.update(overrides)
    return PointSummary(**fields)


def _fake_result(points, correlation=float("nan")) -> SweepResult:
    base = ModelConfig(n_samples=40, dx=4, dy=4, theta=1.0)
    spec = SweepSpec(base=base, axis=Axis("theta", (1.0,)), trials=1)
    return SweepResult(spec=spec, points=tuple(points),
                       correlation=correlation,
                       correlation_supercritical=float("nan"),
                       total_runtime=0.0, digest="")


# ---------------------------------------------------------------------------
# preset resolution


def test_all_synthetic_presets_resolve_at_both_scales():
    for name in PRESET_NAMES:
        if name == "exp5_semi_synthetic":
            continue  # needs real matrices, covered below
        for scale in ("paper", "desk"):
            resolved = preset_config(name, scale)
            assert resolved.items, (name, scale)
            assert resolved.echo["preset"] == name
            assert resolved.echo["scale"] == scale
            assert set(resolved.echo["resolved"]) == {
                item.name for item in resolved.items}


def test_exp1_scales_differ_in_grid_and_trials():
    desk = preset_config("exp1_transition", "desk").items[0].spec
    paper = preset_config("exp1_transition", "paper").items[0].spec
    assert len(desk.axis.values) == 15
    assert len(paper.axis.values) == 25
    assert desk.trials == 30
    assert paper.trials == 100
    # dimensions never shrink with scale
    assert desk.base.n_samples == paper.base.n_samples == 1000
    assert desk.base.dx == paper.base.dx == 200


def test_exp1_model_geometry():
    spec = preset_config("exp1_transition", "desk").items[0].spec
    assert spec.base.dy == 50
    assert spec.base.mask_x.target_rate == pytest.approx(0.3)
    assert spec.base.mask_y.target_rate == pytest.approx(0.4)
    assert spec.axis.name == "theta_over_crit"
    assert spec.axis.values[0] == pytest.approx(0.5)
    assert spec.axis.values[-1] == pytest.approx(2.5)


def test_exp3_variants_cover_sample_counts():
    items = preset_config("exp3_finite_size", "desk").items
    assert [item.name for item in items] == ["n100", "n500", "n2000"]
    for item in items:
        assert item.spec.base.n_samples == int(item.name[1:])
        # aspect ratio 2.5 preserved as dimensions scale
        assert item.spec.base.dx == round(item.spec.base.n_samples / 2.5)


def test_exp4_variants_single_and_joint():
    items = preset_config("exp4_missingness_modes", "desk").items
    names = [item.name for item in items]
    assert names == ["single_view", "joint"]
    assert items[0].spec.axis2.name == "m_x"
    assert items[1].spec.axis2.name == "m_joint"


def test_exp6_requests_split_half():
    spec = preset_config("exp6_split_half", "desk").items[0].spec
    assert spec.diagnostics.split_half
    assert spec.base.n_samples == 2000


def test_b1_covers_noise_families():
    items = preset_config("b1_noise", "desk").items
    kinds = {item.name: item.spec.base.noise.kind for item in items}
    assert kinds["gaussian"] == "gaussian"
    assert kinds["laplace"] == "laplace"
    assert kinds["student_t3"] == "student_t"
    assert kinds["heteroskedastic"] == "heteroskedastic"


def test_b3_runs_every_estimator_at_fifty_trials_both_scales():
    for scale in ("paper", "desk"):
        items = preset_config("b3_baselines", scale).items
        assert {item.name for item in items} == {
            "pls_svd_zero", "mean_impute", "em_pls", "iterative_svd", "oracle"}
        for item in items:
            assert item.spec.trials == 50
            assert item.spec.estimator.name == item.name


def test_preset_rejects_unknown_name_scale_and_override():
    with pytest.raises(ConfigError, match="unknown preset"):
        preset_config("exp0")
    with pytest.raises(ConfigError, match="unknown scale"):
        preset_config("exp1_transition", "huge")
    with pytest.raises(ConfigError, match="unknown override"):
        preset_config("exp1_transition", "desk", {"verbosity": 3})
    with pytest.raises(ConfigError, match="integer"):
        preset_config("exp1_transition", "desk", {"trials": "lots"})


def test_exp5_requires_matrix_paths():
    with pytest.raises(ConfigError, match="x_matrix"):
        preset_config("exp5_semi_synthetic", "desk")


def test_exp5_resolves_with_real_files(tmp_path):
    rng = substream(3, "exp5-test")
    latent = rng.standard_normal((60, 3))
    x = latent @ rng.standard_normal((3, 15)) + rng.standard_normal((60, 15))
    y = latent @ rng.standard_normal((3, 12)) + rng.standard_normal((60, 12))
    x_path, y_path = tmp_path / "x.mat", tmp_path / "y.mat"
    write_matrix(x_path, x)
    write_matrix(y_path, y)
    resolved = preset_config("exp5_semi_synthetic", "desk", {
        "x_matrix": str(x_path), "y_matrix": str(y_path),
        "target_dims": 5, "trials": 2, "theta_points": 3})
    names = [item.name for item in resolved.items]
    assert names == ["theta_sweep", "mask_sweep", "random_control"]
    for item in resolved.items:
        assert item.pair_factory is not None
        pair = item.pair_factory(item.spec.base)
        assert pair.x_obs.shape == (60, 5)


# ---------------------------------------------------------------------------
# config documents


def test_parse_config_preset_form_merges_overrides():
    doc = {"preset": "exp1_transition", "scale": "desk",
           "overrides": {"trials": 7}}
    resolved = parse_config(json.dumps(doc))
    assert resolved.items[0].spec.trials == 7
    # command-line overrides win over the document's
    merged = parse_config(json.dumps(doc), overrides={"trials": 9})
    assert merged.items[0].spec.trials == 9
    reseeded = parse_config(json.dumps(doc), seed=42)
    assert reseeded.items[0].spec.base.seed == 42


def test_parse_config_echo_roundtrip():
    resolved = preset_config("exp1_transition", "desk", {"trials": 3})
    again = parse_config(json.dumps(resolved.echo))
    assert again.echo["preset"] == "exp1_transition"
    assert again.items[0].spec == resolved.items[0].spec


def test_parse_config_rejects_bad_documents():
    with pytest.raises(ConfigError, match="valid JSON"):
        parse_config("{nope")
    with pytest.raises(ConfigError, match="root"):
        parse_config("[1, 2]")
    with pytest.raises(ConfigError, match="preset.*or.*sweep"):
        parse_config("{}")
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(json.dumps({"preset": "exp1_transition", "extra": 1}))


def test_parse_config_sweep_form():
    doc = {"sweep": {
        "base": {"n_samples": 100, "dx": 10, "dy": 8, "theta": 1.0},
        "axis": {"name": "theta", "values": [0.5, 1.5]},
        "trials": 4,
        "estimator": {"name": "em_pls", "max_iter": 25},
        "diagnostics": {"split_half": True},
    }}
    resolved = parse_config(json.dumps(doc), seed=17)
    spec = resolved.items[0].spec
    assert spec.base.seed == 17
    assert spec.trials == 4
    assert spec.estimator.name == "em_pls"
    assert spec.estimator.max_iter == 25
    assert spec.diagnostics.split_half


def test_parse_config_sweep_rejects_unknown_and_overrides():
    doc = {"sweep": {
        "base": {"n_samples": 100, "dx": 10, "dy": 8, "theta": 1.0},
        "axis": {"name": "theta", "values": [1.0]},
        "verbose": True,
    }}
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(json.dumps(doc))
    ok_doc = {"sweep": {
        "base": {"n_samples": 100, "dx": 10, "dy": 8, "theta": 1.0},
        "axis": {"name": "theta", "values": [1.0]},
    }}
    with pytest.raises(ConfigError, match="overrides"):
        parse_config(json.dumps(ok_doc), overrides={"trials": 2})


def test_parse_config_surfaces_model_validation():
    doc = {"sweep": {
        "base": {"n_samples": 5, "dx": 10, "dy": 8, "theta": 1.0},
        "axis": {"name": "theta", "values": [1.0]},
    }}
    with pytest.raises(ConfigError, match="n_samples"):
        parse_config(json.dumps(doc))


# ---------------------------------------------------------------------------
# check clauses on synthetic results


def test_check_exp1_clauses():
    good_points = [
        _point(axis1=0.5, theta=0.25, theta_crit=0.5,
               mean_r2x=0.01, mean_r2y=0.01, theory_r2x=0.0, theory_r2y=0.0),
        _point(axis1=2.0, theta=1.0, theta_crit=0.5,
               mean_r2x=0.62, mean_r2y=0.82, theory_r2x=0.625,
               theory_r2y=0.833),
    ]
    clauses = evaluate_check("exp1_transition",
                             {"transition": _fake_result(good_points, 0.995)})
    assert [ok for _, ok, _ in clauses] == [True, True, True]

    bad_points = [
        _point(axis1=2.0, theta=1.0, theta_crit=0.5,
               mean_r2x=0.50, mean_r2y=0.82, theory_r2x=0.625,
               theory_r2y=0.833),
    ]
    clauses = evaluate_check("exp1_transition",
                             {"transition": _fake_result(bad_points, 0.98)})
    oks = [ok for _, ok, _ in clauses]
    assert oks[0] is False  # supercritical deviation 0.125
    assert oks[2] is False  # correlation below 0.99


def test_check_exp3_requires_strict_decrease():
    def ramp(width):
        # linear rise over [1, 1+width] then flat: transition width is
        # proportional to the ramp span
        thetas = [1.0 + width * f for f in (0.0, 0.25, 0.5, 0.75, 1.0)]
        return _fake_result([
            _point(axis1=t, theta=t, mean_r2x=(t - 1.0) / width)
            for t in thetas])

    good = {"n100": ramp(0.4), "n500": ramp(0.2), "n2000": ramp(0.1)}
    clauses = evaluate_check("exp3_finite_size", good)
    assert clauses[0][1] is True
    bad = {"n100": ramp(0.2), "n500": ramp(0.2), "n2000": ramp(0.1)}
    clauses = evaluate_check("exp3_finite_size", bad)
    assert clauses[0][1] is False


def test_check_exp4_boundary_ordering():
    def boundary_points(m, cross_at):
        pts = []
        for theta in (0.5, 1.0, 1.5, 2.0):
            level = 0.3 if theta >= cross_at else 0.0
            pts.append(_point(axis1=theta, axis2=m, theta=theta,
                              mean_r2x=level, dx=100))
        return pts

    single = boundary_points(0.3, 1.0) + boundary_points(0.5, 1.0)
    joint = boundary_points(0.3, 1.5) + boundary_points(0.5, 1.5)
    clauses = evaluate_check("exp4_missingness_modes", {
        "single_view": _fake_result(single), "joint": _fake_result(joint)})
    assert clauses[0][1] is True
    flipped = evaluate_check("exp4_missingness_modes", {
        "single_view": _fake_result(joint), "joint": _fake_result(single)})
    assert flipped[0][1] is False


def test_check_exp6_three_clauses():
    points = [
        _point(axis1=0.5, theta=0.25, theta_crit=0.5, mean_stability=0.1),
        _point(axis1=1.2, theta=0.6, theta_crit=0.5, mean_r2x=0.3,
               mean_stability=0.5),
        _point(axis1=2.5, theta=1.25, theta_crit=0.5, mean_stability=0.9),
    ]
    clauses = evaluate_check("exp6_split_half",
                             {"split_half": _fake_result(points)})
    assert [ok for _, ok, _ in clauses] == [True, True, True]


def test_check_b3_margins():
    def result_with(mean, std):
        return _fake_result([
            _point(axis1=1.5, mean_r2x=mean, std_r2x=std,
                   trials_effective=50)])

    results = {
        "pls_svd_zero": result_with(0.60, 0.05),
        "mean_impute": result_with(0.55, 0.05),
        "em_pls": result_with(0.58, 0.05),
        "iterative_svd": result_with(0.52, 0.05),
        "oracle": result_with(0.80, 0.05),
    }
    clauses = evaluate_check("b3_baselines", results)
    assert clauses[0][1] is True
    assert clauses[1][1] is True

    results["mean_impute"] = result_with(0.75, 0.05)  # beats primary by 7+ SE
    clauses = evaluate_check("b3_baselines", results)
    assert clauses[0][1] is False


def test_check_generic_for_unknown_presets():
    ok = evaluate_check(None, {"anything": _fake_result([_point()])})
    assert ok[0][1] is True
    bad = evaluate_check("b2_mar", {
        "mcar": _fake_result([_point(valid=False)])})
    assert bad[0][1] is False
