"""Strict parser for the flat sectioned ``key = value`` run configuration.

Format: ``[section]`` headers, one ``key = value`` per line, ``#`` starts a
comment, lists are whitespace-separated.  Unknown sections or keys are
rejected naming the offending line, as are missing keys for the chosen
mode — silent typos in parameter sweeps are the failure mode this guards
against.

Example::

    [run]
    mode = fdtd

    [physical]
    m = 1
    c = 1
    beta = 1
    v0 = 0.5
    sigma = 0.02

    [numerics]
    dx = 0.004
    courant = 0.5
    t_final = 10
    output_stride = 100
    snapshot_times = 2.5 5 10

    [paths]
    out_dir = runs/reference
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BadValue, MissingKey, UnknownKey
from .fdtd import cfl_check
from .params import PhysicalParams, validate_params

MODES = ("analytic", "duhamel", "fdtd", "verify")

# section -> key -> type tag ("float", "int", "str", "floats")
_SCHEMA = {
    "run": {"mode": "str"},
    "physical": {"m": "float", "c": "float", "beta": "float",
                 "v0": "float", "sigma": "float"},
    "numerics": {"dx": "float", "dt": "float", "courant": "float",
                 "t_final": "float", "output_stride": "int",
                 "snapshot_times": "floats"},
    "probes": {"x": "floats"},
    "paths": {"out_dir": "str"},
}

# keys that must be present, per mode
_REQUIRED = {
    "analytic": {"run": ("mode",),
                 "physical": ("m", "c", "beta", "v0", "sigma"),
                 "numerics": ("dt", "t_final", "output_stride"),
                 "paths": ("out_dir",)},
    "duhamel": {"run": ("mode",),
                "physical": ("m", "c", "beta", "v0", "sigma"),
                "numerics": ("t_final", "snapshot_times"),
                "paths": ("out_dir",)},
    "fdtd": {"run": ("mode",),
             "physical": ("m", "c", "beta", "v0", "sigma"),
             "numerics": ("dx", "t_final", "output_stride"),
             "paths": ("out_dir",)},
    "verify": {"run": ("mode",),
               "physical": ("m", "c", "beta", "v0", "sigma"),
               "paths": ("out_dir",)},
}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: PhysicalParams
    dx: float | None
    dt: float | None
    courant: float | None
    t_final: float | None
    output_stride: int | None
    snapshot_times: tuple
    probes: tuple
    out_dir: str
    raw_text: str = field(repr=False, default="")

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        # the raw text is provenance, not identity
        keys = ("mode", "params", "dx", "dt", "courant", "t_final",
                "output_stride", "snapshot_times", "probes", "out_dir")
        return all(getattr(self, k) == getattr(other, k) for k in keys)

    def timestep(self) -> float:
        """dt, derived from the Courant number when not given directly."""
        if self.dt is not None:
            return self.dt
        if self.courant is not None and self.dx is not None:
            return self.courant * self.dx / self.params.c
        raise MissingKey("numerics needs either dt or (courant and dx)")


def _convert(section: str, key: str, value: str, lineno: int):
    kind = _SCHEMA[section][key]
    try:
        if kind == "float":
            return float(value)
        if kind == "int":
            return int(value)
        if kind == "floats":
            return tuple(float(tok) for tok in value.split())
        return value
    except ValueError:
        raise BadValue(f"cannot parse {key} = {value!r} as {kind}", line=lineno)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; raises naming the offending line."""
    values: dict = {}
    lines_of: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise UnknownKey(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise BadValue(f"expected 'key = value', got {line!r}", line=lineno)
        if section is None:
            raise BadValue("key before any [section] header", line=lineno)
        key, _, value = (tok.strip() for tok in line.partition("="))
        if key not in _SCHEMA[section]:
            raise UnknownKey(f"unknown key {key!r} in [{section}]", line=lineno)
        if (section, key) in values:
            raise BadValue(f"duplicate key {key!r} in [{section}]", line=lineno)
        values[(section, key)] = _convert(section, key, value, lineno)
        lines_of[(section, key)] = lineno

    mode = values.get(("run", "mode"))
    if mode is None:
        raise MissingKey("missing [run] mode")
    if mode not in MODES:
        raise BadValue(f"mode must be one of {MODES}, got {mode!r}",
                       line=lines_of.get(("run", "mode")))

    for sec, keys in _REQUIRED[mode].items():
        for key in keys:
            if (sec, key) not in values:
                raise MissingKey(f"mode {mode!r} requires [{sec}] {key}")

    params = validate_params(PhysicalParams(
        m=values[("physical", "m")],
        c=values[("physical", "c")],
        beta=values[("physical", "beta")],
        v0=values[("physical", "v0")],
        sigma=values[("physical", "sigma")],
    ))

    dx = values.get(("numerics", "dx"))
    dt = values.get(("numerics", "dt"))
    courant = values.get(("numerics", "courant"))
    t_final = values.get(("numerics", "t_final"))
    stride = values.get(("numerics", "output_stride"))

    if mode == "analytic" and params.sigma != 0.0:
        raise BadValue("analytic mode is the exact delta limit; set sigma = 0",
                       line=lines_of.get(("physical", "sigma")))
    if mode in ("duhamel", "fdtd") and params.sigma <= 0.0:
        raise BadValue(f"{mode} mode needs sigma > 0",
                       line=lines_of.get(("physical", "sigma")))
    if mode == "fdtd":
        if dt is None and courant is None:
            raise MissingKey("fdtd mode requires [numerics] dt or courant")
        if dt is not None and courant is not None:
            raise BadValue("give either dt or courant, not both",
                           line=lines_of.get(("numerics", "courant")))
    if t_final is not None and t_final < 0.0:
        raise BadValue("t_final must be >= 0",
                       line=lines_of.get(("numerics", "t_final")))
    if stride is not None and stride < 1:
        raise BadValue("output_stride must be >= 1",
                       line=lines_of.get(("numerics", "output_stride")))

    cfg = RunConfig(
        mode=mode,
        params=params,
        dx=dx,
        dt=dt,
        courant=courant,
        t_final=t_final,
        output_stride=stride,
        snapshot_times=values.get(("numerics", "snapshot_times"), ()),
        probes=values.get(("probes", "x"), ()),
        out_dir=values[("paths", "out_dir")],
        raw_text=text,
    )

    # fail fast on unstable numerics, before any run starts
    if dx is not None:
        dt_eff = cfg.timestep() if (dt is not None or courant is not None) else None
        if dt_eff is not None:
            cfl_check(params.c, dx, dt_eff)
    return cfg


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def echo_config(cfg: RunConfig) -> str:
    """The exact text the config was parsed from, for reproducibility."""
    return cfg.raw_text
