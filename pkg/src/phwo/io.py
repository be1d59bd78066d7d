"""Provenance-stamped CSV/JSON output and run configuration files.

Every CSV starts with a ``# manifest_sha256=...`` line naming the manifest
that produced it.  Floats are written with 17 significant digits so values
round-trip exactly.  Timestamps live only in the manifest file itself, so
rerunning a manifest reproduces CSV payloads byte for byte.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__

__all__ = [
    "format_value",
    "manifest_hash",
    "build_manifest",
    "write_manifest",
    "write_csv",
    "read_csv",
    "write_json",
    "read_config",
]


def format_value(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan; keep them readable and unambiguous
        return x if math.isfinite(x) else format_value(x)
    return obj


def manifest_hash(manifest: Mapping) -> str:
    """SHA-256 of the canonical JSON of ``manifest`` without its timestamp."""
    body = {k: v for k, v in manifest.items() if k not in ("timestamp", "config_hash")}
    text = json.dumps(_jsonable(body), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def build_manifest(subcommand: str, params: Mapping, outputs: Sequence[str] = (), **extra) -> dict:
    manifest = {
        "subcommand": subcommand,
        "params": dict(params),
        "outputs": list(outputs),
        "tool_version": __version__,
        **extra,
    }
    manifest["config_hash"] = manifest_hash(manifest)
    manifest["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return manifest


def write_json(path: str | Path, data: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def write_manifest(path: str | Path, manifest: Mapping) -> Path:
    return write_json(path, manifest)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence], config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# manifest_sha256={config_hash}", ",".join(header)]
    lines += [",".join(format_value(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[str | None, list[str], list[list[str]]]:
    """Return ``(manifest hash, header, rows)`` with cells left as strings."""
    lines = Path(path).read_text().splitlines()
    digest = None
    if lines and lines[0].startswith("# manifest_sha256="):
        digest = lines[0].split("=", 1)[1]
        lines = lines[1:]
    header = lines[0].split(",") if lines else []
    return digest, header, [ln.split(",") for ln in lines[1:] if ln]


def read_config(path: str | Path) -> dict[str, Any]:
    """Load a run configuration: JSON object, or flat ``key = value`` lines.

    Keys may use dashes or underscores (``beta-final`` == ``beta_final``);
    ``#`` starts a comment in the key-value form.  Values stay strings in
    the key-value form and are parsed by the command line layer.
    """
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith("{"):
        data = json.loads(stripped)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: JSON config must be an object")
        params = data.get("params", data) if "subcommand" in data else data
        return {k.replace("-", "_"): v for k, v in params.items()}
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = line.split("=", 1)
        elif ":" in line:
            key, value = line.split(":", 1)
        else:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out
