"""Line-oriented ``section.key = value`` configuration documents.

Blank lines and ``#`` comments are ignored; lists are comma-separated.  A
document containing any ``verify.*`` key describes a verification sweep,
otherwise a run.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError
from .models import DampingParams, GasModel, Kind, PrimitiveState
from .verify import RegionSpec

ALL_CONDITIONS = ("B1", "B2", "B3", "B4", "D3", "D3angle", "D4")
DATUM_PRESETS = ("constant", "jump", "sinusoidal", "square", "file")
SAMPLING_MODES = ("VanDerCorput", "SeededUniform")

REQUIRED = object()


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if not v.is_integer():
        raise ValueError(s)
    return int(v)


def _bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(s)


def _str(s):
    if not s:
        raise ValueError(s)
    return s


def _floats(s):
    return tuple(float(p) for p in s.split(",") if p.strip()) if s.strip() else ()


def _strs(s):
    return tuple(p.strip() for p in s.split(",") if p.strip())


TYPE_NAMES = {_float: "real", _int: "integer", _bool: "boolean", _str: "string",
              _floats: "list of reals", _strs: "list of names"}

MODEL_KEYS = {
    "model.kind": (_str, REQUIRED),
    "model.gamma": (_float, 1.0),
    "model.kappa": (_float, 1.0),
    "model.c": (_float, 10.0),
    "model.equilibrium": (_floats, (1.0, 0.0)),
    "model.heuristic": (_bool, False),
    "damping.a": (_float, 1.0),
    "damping.b": (_float, 1.0),
    "damping.disabled": (_bool, False),
    "output.dir": (_str, "output"),
}

RUN_KEYS = {
    **MODEL_KEYS,
    "grid.N": (_int, REQUIRED),
    "grid.safety": (_float, 0.45),
    "time.t_end": (_float, REQUIRED),
    "time.record_every": (_int, 1),
    "time.snapshot_times": (_floats, ()),
    "time.max_steps": (_int, 0),
    "datum.preset": (_str, "constant"),
    "datum.omega0": (_float, None),
    "datum.zeta0": (_float, None),
    "datum.omega_amp": (_float, None),
    "datum.zeta_amp": (_float, None),
    "datum.omega_phase": (_float, None),
    "datum.zeta_phase": (_float, None),
    "datum.wavenumber": (_int, None),
    "datum.left_omega": (_float, None),
    "datum.left_zeta": (_float, None),
    "datum.right_omega": (_float, None),
    "datum.right_zeta": (_float, None),
    "datum.x_jump": (_float, None),
    "datum.shock_family": (_int, None),
    "datum.shock_beta": (_float, None),
    "datum.path": (_str, None),
    "sampling.mode": (_str, "VanDerCorput"),
    "sampling.seed": (_int, 0),
    "safety_region.omega_min": (_float, -math.inf),
    "safety_region.omega_max": (_float, math.inf),
    "safety_region.zeta_min": (_float, -math.inf),
    "safety_region.zeta_max": (_float, math.inf),
}

VERIFY_KEYS = {
    **MODEL_KEYS,
    "verify.conditions": (_strs, ALL_CONDITIONS),
    "verify.K_omega": (_floats, (-2.0, 2.0)),
    "verify.K_zeta": (_floats, (-2.0, 2.0)),
    "verify.V_omega": (_floats, None),
    "verify.V_zeta": (_floats, None),
    "verify.grid_n": (_int, 9),
    "verify.beta_max": (_float, 2.0),
    "verify.gamma_list": (_floats, (1.0,)),
    "verify.mu_list": (_floats, (0.0,)),
    "verify.delta_list": (_floats, (0.0, 0.25, 0.5, 1.0)),
    "verify.delta_max": (_float, 1.0),
    "verify.n_quadruples": (_int, 10000),
    "verify.n_samples": (_int, 10000),
    "verify.seed": (_int, 0),
}


@dataclass(frozen=True)
class DatumSpec:
    preset: str = "constant"
    params: tuple = ()

    def get(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class SafetyRegion:
    omega_min: float = -math.inf
    omega_max: float = math.inf
    zeta_min: float = -math.inf
    zeta_max: float = math.inf


@dataclass(frozen=True)
class RunConfig:
    model: GasModel
    damping: DampingParams
    N: int
    t_end: float
    safety: float = 0.45
    record_every: int = 1
    snapshot_times: tuple = ()
    max_steps: int = 0
    datum: DatumSpec = field(default_factory=DatumSpec)
    sampling_mode: str = "VanDerCorput"
    seed: int = 0
    safety_region: SafetyRegion = field(default_factory=SafetyRegion)
    output_dir: str = "output"
    defaults_applied: tuple = field(default=(), compare=False)

    @property
    def damping_params(self) -> DampingParams:
        return self.damping


@dataclass(frozen=True)
class VerifyConfig:
    model: GasModel
    damping: DampingParams
    conditions: tuple
    K: RegionSpec
    V: RegionSpec
    beta_max: float = 2.0
    gamma_list: tuple = (1.0,)
    mu_list: tuple = (0.0,)
    delta_list: tuple = (0.0, 0.25, 0.5, 1.0)
    delta_max: float = 1.0
    n_quadruples: int = 10000
    n_samples: int = 10000
    seed: int = 0
    output_dir: str = "output"
    defaults_applied: tuple = field(default=(), compare=False)


# ---------------------------------------------------------------------------
# parsing

def _read_lines(text: str):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if "." not in key:
            raise ConfigError("key must have the form section.key", line=lineno, key=key)
        if key in entries:
            raise ConfigError(f"duplicate key (first set on line {entries[key][1]})", line=lineno, key=key)
        entries[key] = (value, lineno)
    return entries


def _collect(entries, schema):
    values, lines, defaults = {}, {}, []
    for key, (value, lineno) in entries.items():
        if key not in schema:
            raise ConfigError("unknown key", line=lineno, key=key)
        conv, _ = schema[key]
        try:
            values[key] = conv(value)
        except ValueError:
            raise ConfigError(f"expected {TYPE_NAMES[conv]}, got {value!r}", line=lineno, key=key) from None
        lines[key] = lineno
    for key, (conv, default) in schema.items():
        if key in values:
            continue
        if default is REQUIRED:
            raise ConfigError("required key missing", key=key)
        if default is not None:
            values[key] = default
            defaults.append(f"{key} = {_format(default)}")
    return values, lines, tuple(defaults)


def _model_from(values, lines):
    def fail(msg, key):
        raise ConfigError(msg, line=lines.get(key), key=key)

    kind_s = values["model.kind"]
    try:
        kind = Kind(kind_s)
    except ValueError:
        fail(f"unknown model kind {kind_s!r}; expected one of {', '.join(k.value for k in Kind)}",
             "model.kind")
    eq = values["model.equilibrium"]
    if len(eq) != 2:
        fail("equilibrium needs two values (q1, q2)", "model.equilibrium")
    c = values["model.c"] if kind.frame == "relativistic" else None
    try:
        model = GasModel(kind, values["model.gamma"], values["model.kappa"], c,
                         PrimitiveState(*eq), values["model.heuristic"])
    except DomainError as exc:
        msg = str(exc)
        key = ("model.gamma" if "gamma" in msg else "model.kappa" if "kappa" in msg
               else "model.equilibrium" if "equilibrium" in msg else "model.c" if " c" in msg
               else "model.kind")
        fail(msg, key)
    if values["damping.disabled"]:
        damping = DampingParams.none()
    else:
        try:
            damping = DampingParams(values["damping.a"], values["damping.b"])
        except DomainError as exc:
            key = "damping.a" if "damping.a" in str(exc) else "damping.b"
            fail(str(exc), key)
    return model, damping


def _run_config(values, lines, defaults):
    def fail(msg, key):
        raise ConfigError(msg, line=lines.get(key), key=key)

    model, damping = _model_from(values, lines)
    if values["grid.N"] < 2:
        fail("grid.N must be >= 2", "grid.N")
    if not 0.0 < values["grid.safety"] <= 0.5:
        fail("grid.safety must lie in (0, 0.5]", "grid.safety")
    if not values["time.t_end"] >= 0.0 or not math.isfinite(values["time.t_end"]):
        fail("time.t_end must be >= 0", "time.t_end")
    if values["time.record_every"] < 1:
        fail("time.record_every must be >= 1", "time.record_every")
    if values["time.max_steps"] < 0:
        fail("time.max_steps must be >= 0", "time.max_steps")
    if any(s < 0 for s in values["time.snapshot_times"]):
        fail("snapshot times must be >= 0", "time.snapshot_times")
    preset = values["datum.preset"]
    if preset not in DATUM_PRESETS:
        fail(f"unknown preset {preset!r}; expected one of {', '.join(DATUM_PRESETS)}", "datum.preset")
    if preset == "file" and "datum.path" not in values:
        fail("file datum needs datum.path", "datum.path")
    if values.get("datum.shock_family", 1) not in (1, 2):
        fail("shock_family must be 1 or 2", "datum.shock_family")
    if values["sampling.mode"] not in SAMPLING_MODES:
        fail(f"unknown sampling mode; expected one of {', '.join(SAMPLING_MODES)}", "sampling.mode")
    params = tuple(sorted((k.split(".", 1)[1], v) for k, v in values.items()
                          if k.startswith("datum.") and k != "datum.preset"))
    region = SafetyRegion(values["safety_region.omega_min"], values["safety_region.omega_max"],
                          values["safety_region.zeta_min"], values["safety_region.zeta_max"])
    if region.omega_min >= region.omega_max or region.zeta_min >= region.zeta_max:
        fail("safety region bounds must satisfy min < max", "safety_region.omega_min")
    return RunConfig(
        model=model, damping=damping, N=values["grid.N"], t_end=values["time.t_end"],
        safety=values["grid.safety"], record_every=values["time.record_every"],
        snapshot_times=tuple(sorted(values["time.snapshot_times"])), max_steps=values["time.max_steps"],
        datum=DatumSpec(preset, params), sampling_mode=values["sampling.mode"],
        seed=values["sampling.seed"], safety_region=region, output_dir=values["output.dir"],
        defaults_applied=defaults,
    )


def _interval(values, lines, key):
    iv = values[key]
    if len(iv) != 2 or not iv[0] < iv[1]:
        raise ConfigError("expected an interval 'lo, hi' with lo < hi", line=lines.get(key), key=key)
    return iv


def _verify_config(values, lines, defaults):
    def fail(msg, key):
        raise ConfigError(msg, line=lines.get(key), key=key)

    model, damping = _model_from(values, lines)
    conds = values["verify.conditions"]
    if not conds:
        fail("condition list must not be empty", "verify.conditions")
    for c in conds:
        if c not in ALL_CONDITIONS:
            fail(f"unknown condition {c!r}; expected from {', '.join(ALL_CONDITIONS)}", "verify.conditions")
    ko = _interval(values, lines, "verify.K_omega")
    kz = _interval(values, lines, "verify.K_zeta")
    n = values["verify.grid_n"]
    if n < 2:
        fail("verify.grid_n must be >= 2", "verify.grid_n")
    pad_o, pad_z = 0.5 * (ko[1] - ko[0]), 0.5 * (kz[1] - kz[0])
    vo = _interval(values, lines, "verify.V_omega") if "verify.V_omega" in values else (ko[0] - pad_o, ko[1] + pad_o)
    vz = _interval(values, lines, "verify.V_zeta") if "verify.V_zeta" in values else (kz[0] - pad_z, kz[1] + pad_z)
    if not (vo[0] < ko[0] and ko[1] < vo[1] and vz[0] < kz[0] and kz[1] < vz[1]):
        fail("K must lie strictly inside V", "verify.V_omega")
    if not values["verify.beta_max"] > 0:
        fail("verify.beta_max must be > 0", "verify.beta_max")
    if not 0 < values["verify.delta_max"] <= 1:
        fail("verify.delta_max must lie in (0, 1]", "verify.delta_max")
    if any(not 0 <= d <= 1 for d in values["verify.delta_list"]):
        fail("deltas must lie in [0, 1]", "verify.delta_list")
    if any(not g > 0 for g in values["verify.gamma_list"]):
        fail("gammas must be > 0", "verify.gamma_list")
    for key in ("verify.n_quadruples", "verify.n_samples"):
        if values[key] < 1:
            fail("must be >= 1", key)
    return VerifyConfig(
        model=model, damping=damping, conditions=conds,
        K=RegionSpec(tuple(ko), tuple(kz), n), V=RegionSpec(tuple(vo), tuple(vz), n),
        beta_max=values["verify.beta_max"], gamma_list=values["verify.gamma_list"],
        mu_list=values["verify.mu_list"], delta_list=values["verify.delta_list"],
        delta_max=values["verify.delta_max"], n_quadruples=values["verify.n_quadruples"],
        n_samples=values["verify.n_samples"], seed=values["verify.seed"],
        output_dir=values["output.dir"], defaults_applied=defaults,
    )


def parse_config(text: str, log=None):
    """Parse and validate a document into a RunConfig or VerifyConfig.

    Every applied default is passed to ``log`` (a callable taking a string).
    """
    entries = _read_lines(text)
    is_verify = any(k.startswith("verify.") for k in entries)
    schema = VERIFY_KEYS if is_verify else RUN_KEYS
    values, lines, defaults = _collect(entries, schema)
    cfg = (_verify_config if is_verify else _run_config)(values, lines, defaults)
    if log is not None:
        for d in defaults:
            log(f"default: {d}")
    return cfg


def load_config(path, log=None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), log=log)


# ---------------------------------------------------------------------------
# serialisation

def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(_format(x) for x in v)
    return str(v)


def _model_items(cfg):
    m = cfg.model
    items = [("model.kind", m.kind.value), ("model.gamma", float(m.gamma)),
             ("model.kappa", float(m.kappa))]
    if m.c is not None:
        items.append(("model.c", float(m.c)))
    items += [("model.equilibrium", (m.equilibrium.q1, m.equilibrium.q2)),
              ("model.heuristic", bool(m.heuristic))]
    if cfg.damping.homogeneous:
        items.append(("damping.disabled", True))
    else:
        items += [("damping.a", float(cfg.damping.a)), ("damping.b", float(cfg.damping.b))]
    return items


def serialize_config(cfg) -> str:
    """Inverse of :func:`parse_config` (every key written explicitly)."""
    items = _model_items(cfg)
    if isinstance(cfg, RunConfig):
        items += [
            ("grid.N", cfg.N), ("grid.safety", float(cfg.safety)),
            ("time.t_end", float(cfg.t_end)), ("time.record_every", cfg.record_every),
            ("time.snapshot_times", tuple(cfg.snapshot_times)), ("time.max_steps", cfg.max_steps),
            ("datum.preset", cfg.datum.preset),
        ]
        items += [(f"datum.{k}", v) for k, v in cfg.datum.params]
        items += [("sampling.mode", cfg.sampling_mode), ("sampling.seed", cfg.seed)]
        r = cfg.safety_region
        items += [("safety_region.omega_min", r.omega_min), ("safety_region.omega_max", r.omega_max),
                  ("safety_region.zeta_min", r.zeta_min), ("safety_region.zeta_max", r.zeta_max)]
    else:
        items += [
            ("verify.conditions", tuple(cfg.conditions)),
            ("verify.K_omega", cfg.K.omega_range), ("verify.K_zeta", cfg.K.zeta_range),
            ("verify.V_omega", cfg.V.omega_range), ("verify.V_zeta", cfg.V.zeta_range),
            ("verify.grid_n", cfg.K.grid_n), ("verify.beta_max", float(cfg.beta_max)),
            ("verify.gamma_list", tuple(cfg.gamma_list)), ("verify.mu_list", tuple(cfg.mu_list)),
            ("verify.delta_list", tuple(cfg.delta_list)), ("verify.delta_max", float(cfg.delta_max)),
            ("verify.n_quadruples", cfg.n_quadruples), ("verify.n_samples", cfg.n_samples),
            ("verify.seed", cfg.seed),
        ]
    items.append(("output.dir", cfg.output_dir))
    lines = []
    for k, v in items:
        text = _format(v)
        if isinstance(v, tuple) and not v:
            text = ""
        lines.append(f"{k} = {text}")
    return "\n".join(lines) + "\n"


def config_hash(cfg) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]
