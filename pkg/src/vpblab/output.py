"""Persistence: CSV tables with fixed schemas, JSON manifests with checksums,
and the kinetic snapshot format.

All floating-point values are serialized with repr (17 significant digits), so
identical runs produce byte-identical files.

CSV schemas (documented column orders, consumed by the figure scripts):

* decay:    epsilon, time, energy, plain_energy
* branches: epsilon, s, j, re_lambda, im_lambda, fit_c_re, fit_c_im, residual
* rates:    epsilon, ell, time_avg_err, integrated_err, perp_budget, decay_rate
* uq:       epsilon, time, total, l2z, l2supz, dz, gradv

Snapshot format: a JSON manifest (config echo, time, shapes, sha256 of the data
file) plus a CSV coefficient dump with one row per (mode, hermite) pair in
lexicographic mode order, Hermite flat index ascending, real/imag interleaved.
"""

from __future__ import annotations

import hashlib
import json
import time as _time
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__ as code_version

DECAY_COLUMNS = ("epsilon", "time", "energy", "plain_energy")
BRANCH_COLUMNS = ("epsilon", "s", "j", "re_lambda", "im_lambda",
                  "fit_c_re", "fit_c_im", "residual")
RATE_COLUMNS = ("epsilon", "ell", "time_avg_err", "integrated_err",
                "perp_budget", "decay_rate")
UQ_COLUMNS = ("epsilon", "time", "total", "l2z", "l2supz", "dz", "gradv")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: str | Path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} != header width {len(columns)}")
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path):
    text = Path(path).read_text().strip().splitlines()
    header = tuple(text[0].split(","))
    rows = [tuple(float(v) for v in line.split(",")) for line in text[1:]]
    return header, rows


def sha256_of(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(path: str | Path, config, outputs: dict, extra: dict | None = None,
                   seed: int | None = None, wall_seconds: float | None = None) -> Path:
    """Run manifest: config snapshot, code version, seed, file index with
    checksums, wall-clock stats; sufficient to re-run bit-identically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if is_dataclass(config):
        cfg = asdict(config)
    elif isinstance(config, dict):
        cfg = config
    else:
        cfg = dict(config)
    manifest = {
        "code_version": code_version,
        "config": cfg,
        "seed": seed if seed is not None else cfg.get("seed"),
        "outputs": {name: {"path": str(p), "sha256": sha256_of(p)}
                    for name, p in outputs.items()},
        "wall_seconds": wall_seconds,
        "created_unix": None if wall_seconds is None else int(_time.time()),
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


# -- kinetic snapshots --------------------------------------------------------------


def save_snapshot(dirpath: str | Path, name: str, ghat: np.ndarray, t: float,
                  config, mode_set) -> tuple[Path, Path]:
    """Write <name>.csv (coefficients) and <name>.json (manifest)."""
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    csv_path = dirpath / f"{name}.csv"
    rows = []
    for im, m in enumerate(mode_set.modes):
        for k in range(ghat.shape[1]):
            c = ghat[im, k]
            rows.append((im, k, c.real, c.imag))
    write_csv(csv_path, ("mode_index", "hermite_index", "re", "im"), rows)
    meta = {
        "time": t,
        "modes": [list(map(int, m)) for m in mode_set.modes],
        "shape": list(ghat.shape),
        "column_order": "mode index lexicographic, hermite flat index ascending, re/im",
    }
    man_path = dirpath / f"{name}.json"
    write_manifest(man_path, config, {"coefficients": csv_path}, extra=meta)
    return csv_path, man_path


def load_snapshot(dirpath: str | Path, name: str):
    dirpath = Path(dirpath)
    man = json.loads((dirpath / f"{name}.json").read_text())
    csv_path = dirpath / f"{name}.csv"
    digest = sha256_of(csv_path)
    recorded = man["outputs"]["coefficients"]["sha256"]
    if digest != recorded:
        raise IOError(f"snapshot checksum mismatch for {csv_path}")
    _, rows = read_csv(csv_path)
    shape = tuple(man["shape"])
    ghat = np.zeros(shape, dtype=complex)
    for im, k, re, imag in rows:
        ghat[int(im), int(k)] = re + 1j * imag
    return ghat, float(man["time"]), man
