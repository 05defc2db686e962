"""Check results shared by the verifiers and the CLI."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Dict, List

PASS = "PASS"
FAIL = "FAIL"
INFO = "INFO"


JSON_FIELDS = ("check_id", "status", "residual", "elapsed_ms", "config")


@dataclass
class Report:
    """One check outcome.  PASS never carries a residual and FAIL always does;
    ``note`` is free text for the text renderer and stays out of JSON."""

    check_id: str
    status: str
    residual: str = ""
    elapsed_ms: float = 0.0
    config: Dict[str, object] = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if self.status not in (PASS, FAIL, INFO):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == PASS:
            self.residual = ""
        elif self.status == FAIL and not self.residual:
            raise ValueError(f"FAIL report {self.check_id} needs a residual")

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def as_dict(self) -> dict:
        d = asdict(self)
        d["elapsed_ms"] = int(round(self.elapsed_ms))
        return {k: d[k] for k in JSON_FIELDS}

    def line(self) -> str:
        s = f"{self.status:4s} {self.check_id} ({self.elapsed_ms:.0f} ms)"
        if self.status != PASS:
            s += f": residual = {self.residual}"
        if self.note:
            s += f" [{self.note}]"
        return s


@contextmanager
def timed():
    """Yield a one-element list that receives elapsed milliseconds on exit."""
    box = [0.0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = (time.perf_counter() - t0) * 1000.0


def zero_report(check_id: str, value, elapsed_ms: float, config=None, note: str = "") -> Report:
    """PASS iff ``value`` is zero (Scalar or Form); the residual is rendered otherwise."""
    zero = not value
    return Report(check_id, PASS if zero else FAIL, "" if zero else str(value),
                  elapsed_ms, dict(config or {}), note)


def sort_reports(reports: List[Report]) -> List[Report]:
    return sorted(reports, key=lambda r: r.check_id)
