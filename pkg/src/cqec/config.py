"""Run configuration, named presets and the flat ``key = value`` file format.

Keys in config files are the CLI flag names without the leading dashes, e.g.
``filter-rate = 20``. All rates are in 1/s and all times in seconds.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .codes import CODES
from .dynamics import SME_SCHEMES
from .errors import ConfigError
from .noise import MAX_JUMP_PROBABILITY

MAX_RATE_STEP = 0.1


@dataclass(frozen=True)
class SimConfig:
    code: str = "bitflip3"
    gamma: float = 0.1
    kappa: float = 150.0
    lam: float = 150.0
    r: float = 20.0
    window: float = 0.15
    eta: float = 1.0
    dt: float = 1e-4
    t_final: float = 1.0
    n_traj: int = 600
    seed: int = 0
    mode: str = "sse"
    sme_scheme: str = "kraus"
    early_feedback: bool = False
    threshold: float = 0.0
    stride: int = 10

    def __post_init__(self):
        self.validate()

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def window_steps(self) -> int:
        return max(1, int(round(self.window / self.dt)))

    def replace(self, **changes) -> SimConfig:
        return dataclasses.replace(self, **changes)

    def validate(self) -> None:
        if self.code not in CODES:
            raise ConfigError(f"code: unknown code {self.code!r}, choose from {sorted(CODES)}")
        if self.mode not in ("sse", "sme"):
            raise ConfigError(f"mode: must be 'sse' or 'sme', got {self.mode!r}")
        if self.sme_scheme not in SME_SCHEMES:
            raise ConfigError(f"sme-scheme: must be one of {SME_SCHEMES}, got {self.sme_scheme!r}")
        for name in ("gamma", "kappa", "lam", "r"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: rates must be non-negative")
        if self.dt <= 0:
            raise ConfigError("dt: must be positive")
        if self.window <= 0:
            raise ConfigError("window: filter window T must be positive")
        if not 0 < self.eta <= 1:
            raise ConfigError(f"eta: efficiency must lie in (0, 1], got {self.eta}")
        if self.mode == "sse" and self.eta != 1:
            raise ConfigError("eta: the pure-state (sse) mode models perfect detection only; use mode=sme")
        if self.t_final < self.window:
            raise ConfigError(f"t-final: must be at least the filter window T={self.window}")
        if self.gamma * self.dt > MAX_JUMP_PROBABILITY:
            raise ConfigError(f"time step too coarse for jump process: gamma*dt = {self.gamma * self.dt:.3g}")
        if self.kappa * self.dt > MAX_RATE_STEP:
            raise ConfigError(f"time step too coarse: kappa*dt = {self.kappa * self.dt:.3g} > {MAX_RATE_STEP}")
        if self.lam * self.dt > MAX_RATE_STEP:
            raise ConfigError(f"time step too coarse: lambda*dt = {self.lam * self.dt:.3g} > {MAX_RATE_STEP}")
        if self.n_traj < 1:
            raise ConfigError("trajectories: need at least one trajectory")
        if self.stride < 1:
            raise ConfigError("stride: must be a positive integer")
        if not -1 < self.threshold < 1:
            raise ConfigError("threshold: must lie in (-1, 1)")


# flag/file key -> SimConfig field
KEYS = {
    "code": "code",
    "gamma": "gamma",
    "kappa": "kappa",
    "lambda": "lam",
    "filter-rate": "r",
    "window": "window",
    "eta": "eta",
    "dt": "dt",
    "t-final": "t_final",
    "trajectories": "n_traj",
    "seed": "seed",
    "mode": "mode",
    "sme-scheme": "sme_scheme",
    "early-feedback": "early_feedback",
    "threshold": "threshold",
    "stride": "stride",
}
FIELD_KEYS = {v: k for k, v in KEYS.items()}
_TYPES = {f.name: f.type for f in dataclasses.fields(SimConfig)}


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    values: dict
    sweep: tuple[str, tuple] | None = None


PRESETS = {
    p.name: p
    for p in (
        Preset(
            "fig2",
            "bit-flip code with feedback, kappa = lambda = 150/s, r = 20/s, T = 1500 dt; "
            "pass --gamma (dimensionless figure regime, gamma in 1/s)",
            dict(code="bitflip3", gamma=0.1, kappa=150.0, lam=150.0, r=20.0, window=0.15,
                 dt=1e-4, t_final=1.0, n_traj=600, mode="sse", eta=1.0, stride=10),
            ("gamma", (0.1, 0.3, 1.0)),
        ),
        Preset(
            "fig3",
            "bit-flip code with inefficient detection (density-matrix mode), "
            "kappa = lambda = 50/s, r = 10/s, T = 1500 dt; sweep eta",
            dict(code="bitflip3", gamma=0.1, kappa=50.0, lam=50.0, r=10.0, window=0.15,
                 dt=1e-4, t_final=1.0, n_traj=600, mode="sme", eta=1.0, stride=10),
            ("eta", (1.0, 0.9, 0.8, 0.7, 0.6)),
        ),
        Preset(
            "toy",
            "one-qubit toy code at the fig2 rates",
            dict(code="toy", gamma=0.5, kappa=150.0, lam=150.0, r=20.0, window=0.15,
                 dt=1e-4, t_final=1.0, n_traj=600, mode="sse", eta=1.0, stride=10),
        ),
        Preset(
            "hardware",
            "solid-state regime: gamma = 1e2/s, kappa = 1e6/s, lambda = 1e7/s, 1 ms at dt = 1 ns; "
            "filter r = 1e5/s, T = 30 us (same r/kappa and rT scale as fig2)",
            dict(code="bitflip3", gamma=1e2, kappa=1e6, lam=1e7, r=1e5, window=3e-5,
                 dt=1e-9, t_final=1e-3, n_traj=100, mode="sse", eta=1.0, stride=1000),
            ("gamma", (1e2, 3e2, 1e3)),
        ),
    )
}


def _coerce(field: str, raw):
    kind = _TYPES[field]
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        if kind == "bool":
            if isinstance(raw, bool):
                return raw
            low = str(raw).lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(float(raw)) if isinstance(raw, str) and "e" in raw.lower() else int(raw)
        if kind == "float":
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(f"{FIELD_KEYS[field]}: cannot parse {raw!r} as {kind}") from None


def _field(key: str) -> str:
    key = key.strip().lstrip("-").replace("_", "-")
    if key in KEYS:
        return KEYS[key]
    raise ConfigError(f"unknown key {key!r}; valid keys: {', '.join(KEYS)}")


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        values[key.strip()] = raw.strip()
    return values


def parse_config(path=None, flags: dict | None = None, preset: str | None = None) -> SimConfig:
    """Preset, then file values, then flag overrides; returns a validated config."""
    values = {}
    if preset is not None:
        try:
            values.update(PRESETS[preset].values)
        except KeyError:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    layers = []
    if path is not None:
        layers.append(read_config_file(path))
    if flags:
        layers.append(flags)
    for layer in layers:
        for key, raw in layer.items():
            if raw is None:
                continue
            field = _field(key)
            values[field] = _coerce(field, raw)
    return SimConfig(**values)


def dump_config(cfg: SimConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        lines.append(f"{FIELD_KEYS[f.name]} = {value!r}" if isinstance(value, float) else
                     f"{FIELD_KEYS[f.name]} = {value}")
    return "\n".join(lines) + "\n"


def config_dict(cfg: SimConfig) -> dict:
    return {FIELD_KEYS[k]: v for k, v in dataclasses.asdict(cfg).items()}
