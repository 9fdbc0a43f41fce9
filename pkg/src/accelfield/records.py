"""Per-check result records and the log-log slope fit shared by every suite."""
from __future__ import annotations

from dataclasses import asdict, dataclass
import time

import numpy as np

EXACT_RTOL = 1e-12


@dataclass
class CheckRecord:
    check_id: str
    paper_ref: str
    computed: object
    expected: object
    abs_err: float | None
    rel_err: float | None
    passed: bool
    slope: float | None = None
    runtime: float = 0.0
    kind: str = "exact"
    tolerance: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return {k: _jsonable(v) for k, v in d.items()}


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)] if v.imag else float(v.real)
    if isinstance(v, np.generic):
        return v.item()
    return v


def exact_record(check_id, ref, residual, scale, tol=EXACT_RTOL, note="") -> CheckRecord:
    """Residual norm judged relative to ``scale`` (absolute if the scale is zero)."""
    residual = float(residual)
    rel = residual / scale if scale > 0 else residual
    return CheckRecord(check_id, ref, residual, 0.0, residual, rel, bool(rel <= tol),
                       kind="exact", tolerance=tol, note=note)


def skip_record(check_id, ref, reason="insufficient sector") -> CheckRecord:
    return CheckRecord(check_id, ref, None, None, None, None, True, kind="skip", note=reason)


def fit_slope(h, err) -> float:
    """Least-squares slope of ``log err`` against ``log h``."""
    h, err = np.asarray(h, float), np.asarray(err, float)
    if len(h) < 2 or np.any(err <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def slope_record(check_id, ref, h, err, target=2.0, window=0.3, note="") -> CheckRecord:
    s = fit_slope(h, err)
    ok = bool(np.isfinite(s) and abs(s - target) <= window)
    return CheckRecord(check_id, ref, list(map(float, err)), target, float(err[-1]), None, ok,
                       slope=s, kind="convergence", tolerance=window,
                       note=note or f"h = {list(map(float, h))}")


class timed:
    """``with timed(rec_list):`` stamps the runtime onto records appended inside the block."""

    def __init__(self, records: list):
        self.records = records

    def __enter__(self):
        self.start = len(self.records)
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        dt = time.perf_counter() - self.t0
        new = self.records[self.start:]
        for r in new:
            r.runtime = dt / max(len(new), 1)
        return False


__all__ = ["CheckRecord", "exact_record", "skip_record", "fit_slope", "slope_record", "timed",
           "EXACT_RTOL"]
