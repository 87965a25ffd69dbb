"""Run configuration: a human-readable key-value format with sections.

The file format is INI-style (see ``docs/config.md`` for the full schema):

    [grid]
    dim = 2
    points = 128
    length = 6.283185307179586

    [physics]
    pressure_const = 1.0
    gamma = 2.0
    relaxation_time = 0.5
    background_density = 1.0
    branch = isentropic

    [init]
    kind = modes
    mode.1 = m 1,0 1e-4
    # or: kind = random / amplitude / band / seed

    [time]
    scheme = rk4-integrating-factor
    cfl = 0.4            # or dt = ...
    t_end = 10.0
    sample_interval = 0.1

    [run]
    e_mode = evolved
    linearized = false

    [output]
    directory = out/run

``parse_config(emit_config(cfg)) == cfg`` holds exactly (floats are emitted
with repr).  Validation failures raise ConfigError naming the field.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .model import InitSpec, ModeSeed, RandomSeedSpec

__all__ = [
    "RunConfig",
    "parse_config",
    "parse_config_text",
    "emit_config",
    "config_from_file",
    "with_overrides",
]

_SENTINEL = object()


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    dim: int = 2
    points: int = 128
    length: float = 6.283185307179586

    pressure_const: float = 1.0
    gamma: float = 2.0
    relaxation_time: float = 0.5
    background_density: float = 1.0
    branch: str = "isentropic"

    init: InitSpec = field(default_factory=InitSpec)

    scheme: str = "rk4-integrating-factor"
    dt: float | None = None
    cfl: float = 0.4
    t_end: float = 10.0
    sample_interval: float = 0.1

    e_mode: str = "evolved"
    linearized: bool = False

    out_dir: str = "out/run"

    def __post_init__(self):
        if self.branch not in ("isentropic", "isothermal"):
            raise ConfigError("physics.branch", f"unknown branch {self.branch!r}")
        if self.branch == "isothermal" and self.gamma != 1.0:
            raise ConfigError("physics.branch", "isothermal branch requires gamma = 1")
        if self.branch == "isentropic" and self.gamma <= 1.0:
            raise ConfigError("physics.branch", "isentropic branch requires gamma > 1")
        if self.init.random is not None and self.init.random.seed is None:
            raise ConfigError("init.seed", "random init requires a seed")
        for name in ("pressure_const", "relaxation_time", "background_density"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"physics.{name}", "must be positive")
        for mode in self.init.modes:
            if not (abs(mode.amplitude) < float("inf")):
                raise ConfigError("init.mode", "amplitude must be finite")
        if self.scheme not in ("rk4", "rk4-integrating-factor"):
            raise ConfigError("time.scheme", f"unknown scheme {self.scheme!r}")
        if self.e_mode not in ("evolved", "projected"):
            raise ConfigError("run.e_mode", f"unknown e_mode {self.e_mode!r}")
        if self.t_end < 0.0:
            raise ConfigError("time.t_end", "must be >= 0")


def _get(cp: configparser.ConfigParser, section: str, key: str, cast, default=_SENTINEL):
    if not cp.has_option(section, key):
        if default is _SENTINEL:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    raw = cp.get(section, key)
    try:
        if cast is bool:
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return cast(raw)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"{section}.{key}", str(err)) from None


def _parse_mode(raw: str, where: str) -> ModeSeed:
    parts = raw.split()
    if len(parts) not in (3, 4):
        raise ConfigError(where, f"expected 'target kx,ky[,kz] amplitude [phase]', got {raw!r}")
    target = parts[0]
    try:
        kvec = tuple(int(c) for c in parts[1].split(","))
        amplitude = float(parts[2])
        phase = float(parts[3]) if len(parts) == 4 else 0.0
        return ModeSeed(target=target, k=kvec, amplitude=amplitude, phase=phase)
    except ValueError as err:
        raise ConfigError(where, str(err)) from None


def parse_config_text(text: str) -> RunConfig:
    """Parse a configuration from its text form."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError("<file>", f"not parseable: {err}") from None

    for section in ("grid", "physics", "init", "time"):
        if not cp.has_section(section):
            raise ConfigError(section, "missing required section")

    kind = _get(cp, "init", "kind", str, "modes")
    if kind == "modes":
        modes = []
        mode_keys = [k for k in cp.options("init") if k.startswith("mode.")]
        try:
            mode_keys.sort(key=lambda k: int(k.split(".", 1)[1]))
        except ValueError:
            raise ConfigError("init", f"mode keys must be mode.<int>, got {mode_keys}") from None
        for key in mode_keys:
            modes.append(_parse_mode(cp.get("init", key), f"init.{key}"))
        init = InitSpec(modes=tuple(modes))
    elif kind == "random":
        band_raw = _get(cp, "init", "band", str)
        try:
            lo, hi = (float(x) for x in band_raw.split(","))
        except ValueError:
            raise ConfigError("init.band", f"expected 'lo,hi', got {band_raw!r}") from None
        init = InitSpec(
            random=RandomSeedSpec(
                amplitude=_get(cp, "init", "amplitude", float),
                band=(lo, hi),
                seed=_get(cp, "init", "seed", int),
                solenoidal=_get(cp, "init", "solenoidal", bool, True),
            )
        )
    else:
        raise ConfigError("init.kind", f"unknown init kind {kind!r}")

    try:
        return RunConfig(
            dim=_get(cp, "grid", "dim", int),
            points=_get(cp, "grid", "points", int),
            length=_get(cp, "grid", "length", float, 6.283185307179586),
            pressure_const=_get(cp, "physics", "pressure_const", float),
            gamma=_get(cp, "physics", "gamma", float),
            relaxation_time=_get(cp, "physics", "relaxation_time", float),
            background_density=_get(cp, "physics", "background_density", float),
            branch=_get(cp, "physics", "branch", str),
            init=init,
            scheme=_get(cp, "time", "scheme", str, "rk4-integrating-factor"),
            dt=_get(cp, "time", "dt", float, None),
            cfl=_get(cp, "time", "cfl", float, 0.4),
            t_end=_get(cp, "time", "t_end", float),
            sample_interval=_get(cp, "time", "sample_interval", float, 0.1),
            e_mode=_get(cp, "run", "e_mode", str, "evolved") if cp.has_section("run") else "evolved",
            linearized=_get(cp, "run", "linearized", bool, False) if cp.has_section("run") else False,
            out_dir=_get(cp, "output", "directory", str, "out/run") if cp.has_section("output") else "out/run",
        )
    except ValueError as err:
        raise ConfigError("<config>", str(err)) from None


def config_from_file(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def emit_config(cfg: RunConfig) -> str:
    """Canonical text form; parse_config_text round trips it exactly."""
    cp = configparser.ConfigParser()
    cp["grid"] = {
        "dim": str(cfg.dim),
        "points": str(cfg.points),
        "length": repr(cfg.length),
    }
    cp["physics"] = {
        "pressure_const": repr(cfg.pressure_const),
        "gamma": repr(cfg.gamma),
        "relaxation_time": repr(cfg.relaxation_time),
        "background_density": repr(cfg.background_density),
        "branch": cfg.branch,
    }
    init_section: dict[str, str] = {}
    if cfg.init.random is not None:
        rs = cfg.init.random
        init_section["kind"] = "random"
        init_section["amplitude"] = repr(rs.amplitude)
        init_section["band"] = f"{rs.band[0]!r},{rs.band[1]!r}"
        init_section["seed"] = str(rs.seed)
        init_section["solenoidal"] = "true" if rs.solenoidal else "false"
    else:
        init_section["kind"] = "modes"
        for i, mode in enumerate(cfg.init.modes, start=1):
            kstr = ",".join(str(c) for c in mode.k)
            init_section[f"mode.{i}"] = f"{mode.target} {kstr} {mode.amplitude!r} {mode.phase!r}"
    cp["init"] = init_section
    time_section = {
        "scheme": cfg.scheme,
        "cfl": repr(cfg.cfl),
        "t_end": repr(cfg.t_end),
        "sample_interval": repr(cfg.sample_interval),
    }
    if cfg.dt is not None:
        time_section["dt"] = repr(cfg.dt)
    cp["time"] = time_section
    cp["run"] = {
        "e_mode": cfg.e_mode,
        "linearized": "true" if cfg.linearized else "false",
    }
    cp["output"] = {"directory": cfg.out_dir}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def parse_config(text_or_path) -> RunConfig:
    """Parse from text if it looks like config text, else treat as a path."""
    text = str(text_or_path)
    if "[" in text and "]" in text and "\n" in text:
        return parse_config_text(text)
    return config_from_file(text_or_path)


def with_overrides(cfg: RunConfig, out_dir=None, seed=None, tau=None) -> RunConfig:
    """Common command-line overrides applied to a parsed configuration."""
    if out_dir is not None:
        cfg = replace(cfg, out_dir=str(out_dir))
    if seed is not None:
        if cfg.init.random is None:
            raise ConfigError("init.seed", "seed override requires a random init")
        cfg = replace(cfg, init=InitSpec(random=replace(cfg.init.random, seed=int(seed))))
    if tau is not None:
        cfg = replace(cfg, relaxation_time=float(tau))
    return cfg
