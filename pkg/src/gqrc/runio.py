"""Dataset persistence: RFC-4180-style CSV plus a JSON run manifest.

Numeric fields are formatted with %.12g and a dot decimal separator so
identical runs produce byte-identical CSV files; the manifest references
each CSV by its SHA-256 content hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from pathlib import Path


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    if hasattr(value, "item"):  # numpy scalars
        return format_value(value.item())
    return str(value)


def write_csv(path: str | Path, fieldnames: list[str], rows: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames, lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_value(row[k]) for k in fieldnames})
    return path


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(
    path: str | Path,
    cfg,
    outputs: list[Path],
    realization_seeds: list[int],
    timings: dict[str, float],
    failures: list[str],
    version: str,
) -> Path:
    manifest = {
        "version": version,
        "task": cfg.task,
        "master_seed": cfg.master_seed,
        "config": asdict(cfg),
        "realization_seeds": realization_seeds,
        "outputs": [
            {"path": str(out), "sha256": sha256_file(out)} for out in outputs
        ],
        "timings_seconds": timings,
        "failures": failures,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path
