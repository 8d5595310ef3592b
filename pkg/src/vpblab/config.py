"""Flat key-value run configuration with a documented schema.

File format: one `key = value` per line, `#` comments, blank lines ignored.
Values are parsed by the declared type; `eps_list` is a comma-separated list.
Round-trip (parse -> serialize -> parse) is the identity on the typed values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    profile: str = "smoke"
    epsilon: float = 0.5
    eps_list: tuple = (0.2, 0.1, 0.05, 0.025)
    spatial_dim: int = 1
    modes: int = 8
    degree: int = 6
    dt: float = 1e-3
    t_final: float = 0.5
    nodes: int = 9
    eta: float = 0.2
    amplitude: float = 0.02
    seed: int = 1234
    out_dir: str = "out"
    sobolev: int = 3

    def validate(self) -> "RunConfig":
        if not (0.0 < self.epsilon <= 1.0):
            raise ConfigError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.spatial_dim not in (1, 2):
            raise ConfigError(f"spatial_dim must be 1 or 2, got {self.spatial_dim}")
        if self.modes < 1:
            raise ConfigError(f"modes must be >= 1, got {self.modes}")
        if self.degree < 4:
            raise ConfigError(f"degree must be >= 4, got {self.degree}")
        if self.dt <= 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0.0:
            raise ConfigError(f"t_final must be nonnegative, got {self.t_final}")
        if self.nodes < 1:
            raise ConfigError(f"nodes must be >= 1, got {self.nodes}")
        if self.profile not in ("smoke", "full"):
            raise ConfigError(f"profile must be smoke or full, got {self.profile}")
        if any(not (0.0 < e <= 1.0) for e in self.eps_list):
            raise ConfigError(f"eps_list entries must lie in (0, 1], got {self.eps_list}")
        return self


_PARSERS = {
    "profile": str, "epsilon": float, "spatial_dim": int, "modes": int,
    "degree": int, "dt": float, "t_final": float, "nodes": int, "eta": float,
    "amplitude": float, "seed": int, "out_dir": str, "sobolev": int,
    "eps_list": lambda s: tuple(float(x) for x in str(s).split(",") if x.strip()),
}


def parse_config(text: str) -> RunConfig:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            kv[key] = _PARSERS[key](val)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"line {lineno}: cannot parse {key} from {val!r}: {exc}")
    return RunConfig(**kv).validate()


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "eps_list":
            v = ",".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(serialize_config(cfg))
