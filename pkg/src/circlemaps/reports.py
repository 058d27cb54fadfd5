"""Machine-readable run outputs: JSON certificates and CSV curves.

Runs are reproducible: the output directory name is derived from a hash of
the canonical configuration, and JSON payloads are sorted so reruns differ
only in the timestamp field.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
from pathlib import Path


def config_hash(config: dict, length: int = 8) -> str:
    """Stable short hash of the run configuration (output path excluded)."""
    canon = ",".join(
        f"{k}={config[k]}" for k in sorted(config) if k not in ("out", "figures")
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:length]


def run_directory(base, command: str, config: dict) -> Path:
    d = Path(base) / f"{command}-{config_hash(config)}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_json(path, payload: dict) -> str:
    payload = dict(payload)
    payload["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_coerce)
        fh.write("\n")
    return str(path)


def _coerce(obj):
    try:
        return float(obj)
    except (TypeError, ValueError):
        return str(obj)


def write_csv(path, header, rows) -> str:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(c) for c in row])
    return str(path)


def _format_cell(c):
    if isinstance(c, float):
        return format(c, ".17g")
    return c


def map_rows(f, n: int = 2048):
    """(x, f(x), f'(x)) sampled branch-consistently."""
    import numpy as np

    rows = []
    for lo, hi, branch in ((0.0, f.a, 1), (f.a, 1.0, 2)):
        xs = np.linspace(lo, hi, n // 2)
        vals = np.asarray(f.eval_branch(branch, xs), dtype=float)
        ders = np.asarray(f.deriv_branch(branch, xs), dtype=float)
        rows.extend(zip(xs.tolist(), vals.tolist(), ders.tolist()))
    return rows


def density_rows(profile, n: int = 2048):
    import numpy as np

    xs = np.linspace(0.0, 1.0, n)
    rho = np.asarray(profile.density(xs), dtype=float)
    g = np.asarray(profile.cumulative(xs), dtype=float)
    return list(zip(xs.tolist(), rho.tolist(), g.tolist()))
