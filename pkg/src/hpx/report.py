"""JSON encoding, hashing and manifests for CLI reports."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import platform
from fractions import Fraction

import numpy as np

TIMING_KEYS = ("elapsed_ms",)


def fraction_json(x: Fraction) -> dict:
    """Exact rational as ``"a/b"`` with a float alongside."""
    x = Fraction(x)
    return {"rational": f"{x.numerator}/{x.denominator}", "float": float(x)}


def _default(obj):
    if isinstance(obj, Fraction):
        return fraction_json(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite(obj):
    # JSON has no inf/nan; keep them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def to_jsonable(obj):
    return _finite(json.loads(json.dumps(obj, default=_default)))


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def body_of(report: dict) -> dict:
    """The report minus wall-clock fields; this is what replay compares."""
    return {k: v for k, v in report.items() if k not in TIMING_KEYS}


def sha256_json(obj) -> str:
    text = json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def versions() -> dict:
    import scipy

    from . import __version__
    return {"hpx": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def manifest(config: dict, config_hash: str, report: dict, elapsed_ms: float) -> dict:
    return {"config": config, "config_hash": config_hash,
            "body_sha256": sha256_json(body_of(report)),
            "versions": versions(), "elapsed_ms": elapsed_ms}
