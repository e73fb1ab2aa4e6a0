import math

import pytest
from hypothesis import given, settings, strategies as st

from glimmdamp.config import (RunConfig, VerifyConfig, config_hash, load_config, parse_config,
                              serialize_config)
from glimmdamp.errors import ConfigError
from glimmdamp.models import Kind

MINIMAL = "model.kind = LagrangianIsothermal\ngrid.N = 10\ntime.t_end = 1\n"


def test_minimal_run_config_fills_defaults():
    log = []
    cfg = parse_config(MINIMAL, log=log.append)
    assert isinstance(cfg, RunConfig)
    assert cfg.model.kind is Kind.LAGRANGIAN_ISOTHERMAL
    assert (cfg.damping.a, cfg.damping.b) == (1.0, 1.0)
    assert cfg.safety == 0.45 and cfg.sampling_mode == "VanDerCorput" and cfg.datum.preset == "constant"
    assert "default: damping.a = 1.0" in log
    assert "default: grid.safety = 0.45" in log
    assert all(line.startswith("default: ") for line in log)


def test_comments_and_blank_lines_ignored():
    text = "# header\n\n" + MINIMAL.replace("grid.N = 10", "grid.N = 10   # cells")
    assert parse_config(text) == parse_config(MINIMAL)


def test_negative_damping_rejected_with_location():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "damping.a = -1\n")
    e = exc.value
    assert e.line == 4 and e.key == "damping.a"
    assert "damping.a must be > 0" in str(e)


@pytest.mark.parametrize("extra,line,key,fragment", [
    ("grid.M = 3\n", 4, "grid.M", "unknown key"),
    ("grid.N = 5\n", 4, "grid.N", "duplicate key"),
    ("time.record_every = 2.5\n", 4, "time.record_every", "expected integer"),
    ("grid.safety = fast\n", 4, "grid.safety", "expected real"),
    ("model.heuristic = maybe\n", 4, "model.heuristic", "expected boolean"),
    ("grid.safety = 0.6\n", 4, "grid.safety", "(0, 0.5]"),
    ("datum.preset = wiggle\n", 4, "datum.preset", "unknown preset"),
    ("sampling.mode = Sobol\n", 4, "sampling.mode", "unknown sampling mode"),
    ("no equals sign\n", 4, None, "section.key = value"),
])
def test_bad_documents_report_line_and_key(extra, line, key, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + extra)
    assert exc.value.line == line and exc.value.key == key
    assert fragment in str(exc.value)
    assert str(exc.value).startswith(f"line {line}")


def test_missing_required_key():
    with pytest.raises(ConfigError) as exc:
        parse_config("model.kind = LagrangianIsothermal\ntime.t_end = 1\n")
    assert exc.value.key == "grid.N" and "required key missing" in str(exc.value)


def test_unknown_model_kind():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("LagrangianIsothermal", "Plasma"))
    assert exc.value.key == "model.kind" and exc.value.line == 1


def test_verify_keys_make_verify_config():
    cfg = parse_config("model.kind = EulerianIsothermal\nverify.K_omega = -1, 1\n")
    assert isinstance(cfg, VerifyConfig)
    # V defaults to K padded by half its width
    assert cfg.V.omega_range == (-2.0, 2.0) and cfg.V.zeta_range == (-4.0, 4.0)
    assert cfg.conditions == ("B1", "B2", "B3", "B4", "D3", "D3angle", "D4")


def test_verify_rejects_K_outside_V():
    with pytest.raises(ConfigError) as exc:
        parse_config("model.kind = LagrangianIsothermal\nverify.K_omega = -1, 1\nverify.V_omega = -1, 3\n")
    assert "strictly inside" in str(exc.value)


def test_verify_rejects_unknown_condition():
    with pytest.raises(ConfigError) as exc:
        parse_config("model.kind = LagrangianIsothermal\nverify.conditions = B1, Z9\n")
    assert exc.value.line == 2 and "Z9" in str(exc.value)


def test_run_only_key_in_verify_document():
    with pytest.raises(ConfigError) as exc:
        parse_config("model.kind = LagrangianIsothermal\nverify.seed = 1\ngrid.N = 4\n")
    assert exc.value.key == "grid.N" and "unknown key" in str(exc.value)


def test_load_config_reads_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(MINIMAL)
    assert load_config(p) == parse_config(MINIMAL)


def test_hash_tracks_content():
    a = parse_config(MINIMAL)
    b = parse_config(MINIMAL + "damping.b = 2\n")
    assert config_hash(a) == config_hash(parse_config(MINIMAL))
    assert config_hash(a) != config_hash(b) and len(config_hash(a)) == 16


finite = st.floats(-50, 50, allow_nan=False)
positive = st.floats(1e-3, 50, allow_nan=False)
names = st.text("abcdefghijklmnopqrstuvwxyz_/.0123456789", min_size=1, max_size=12)
kinds = st.sampled_from(["LagrangianIsothermal", "EulerianIsothermal", "RelativisticIsothermal",
                         "LagrangianGammaLaw", "EulerianGammaLaw"])


@st.composite
def model_lines(draw):
    kind = draw(kinds)
    lines = [f"model.kind = {kind}"]
    if "GammaLaw" in kind:
        g = draw(st.floats(0.1, 1.9))
        lines.append(f"model.gamma = {g!r}")
        if g > 1:
            lines.append("model.heuristic = true")
    if kind.startswith("Relativistic"):
        lines.append(f"model.c = {draw(st.floats(2.0, 100.0))!r}")
    if draw(st.booleans()):
        lines.append("damping.disabled = true")
    else:
        lines.append(f"damping.a = {draw(positive)!r}")
        lines.append(f"damping.b = {draw(positive)!r}")
    lines.append(f"output.dir = {draw(names)}")
    return lines


@st.composite
def run_documents(draw):
    lines = draw(model_lines())
    lines += [f"grid.N = {draw(st.integers(2, 10_000))}",
              f"grid.safety = {draw(st.floats(0.01, 0.5))!r}",
              f"time.t_end = {draw(st.floats(0.0, 100.0))!r}",
              f"time.record_every = {draw(st.integers(1, 100))}",
              f"time.max_steps = {draw(st.integers(0, 10**6))}",
              f"sampling.mode = {draw(st.sampled_from(['VanDerCorput', 'SeededUniform']))}",
              f"sampling.seed = {draw(st.integers(0, 2**31))}"]
    snaps = draw(st.lists(st.floats(0.0, 10.0), max_size=4))
    lines.append("time.snapshot_times = " + ", ".join(repr(s) for s in snaps))
    preset = draw(st.sampled_from(["constant", "sinusoidal", "jump"]))
    lines.append(f"datum.preset = {preset}")
    if preset == "jump":
        lines += [f"datum.shock_family = {draw(st.sampled_from([1, 2]))}",
                  f"datum.shock_beta = {draw(positive)!r}"]
    else:
        lines += [f"datum.omega_amp = {draw(finite)!r}", f"datum.zeta0 = {draw(finite)!r}"]
    if draw(st.booleans()):
        lo = draw(finite)
        lines += [f"safety_region.omega_min = {lo!r}", f"safety_region.omega_max = {lo + 1.0!r}"]
    return "\n".join(lines) + "\n"


@st.composite
def verify_documents(draw):
    lines = draw(model_lines())
    lo, w = draw(finite), draw(positive)
    conds = draw(st.lists(st.sampled_from(["B1", "B2", "B3", "B4", "D3", "D3angle", "D4"]),
                          min_size=1, max_size=7, unique=True))
    lines += [f"verify.conditions = {', '.join(conds)}",
              f"verify.K_omega = {lo!r}, {lo + w!r}",
              f"verify.grid_n = {draw(st.integers(2, 40))}",
              f"verify.beta_max = {draw(positive)!r}",
              f"verify.delta_list = {', '.join(repr(d) for d in draw(st.lists(st.floats(0, 1), max_size=4)))}",
              f"verify.mu_list = {', '.join(repr(m) for m in draw(st.lists(finite, min_size=1, max_size=3)))}",
              f"verify.seed = {draw(st.integers(0, 1000))}"]
    return "\n".join(lines) + "\n"


@settings(max_examples=150, deadline=None)
@given(run_documents())
def test_run_config_round_trip(text):
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


@settings(max_examples=150, deadline=None)
@given(verify_documents())
def test_verify_config_round_trip(text):
    cfg = parse_config(text)
    assert isinstance(cfg, VerifyConfig)
    assert parse_config(serialize_config(cfg)) == cfg


def test_infinite_safety_bounds_round_trip():
    cfg = parse_config(MINIMAL)
    assert cfg.safety_region.omega_max == math.inf
    assert parse_config(serialize_config(cfg)) == cfg
