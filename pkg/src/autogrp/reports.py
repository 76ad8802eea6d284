"""Check reports shared by every empirical measurement."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

CONSTANT = "constant"
FAILURE = "failure"


def is_divergent(trace: dict, max_len: int) -> bool:
    """Growth rule for labelling a measured constant as unbounded.

    The running-maximum trace must take at least four distinct values (four
    bounds with strictly increasing constants) and must still be rising in
    the upper half of the bounds, i.e. trace(max_len) > trace(ceil(max_len/2)).
    """
    vals = [trace[b] for b in sorted(trace) if b >= 1 and trace[b] is not None]
    if len(set(vals)) < 4:
        return False
    half = math.ceil(max_len / 2)
    return trace.get(max_len, 0) > trace.get(half, 0)


def cumulative(per_bound: dict, max_len: int, start: int = 0) -> dict:
    """Running maximum of per-bound values, so the trace is monotone."""
    out = {}
    best = None
    for b in range(start, max_len + 1):
        v = per_bound.get(b)
        if v is not None and (best is None or v > best):
            best = v
        out[b] = best if best is not None else 0
    return out


def jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


@dataclass
class CheckReport:
    """Either a constant verified up to a bound, or a failure with witness.

    ``witness`` holds printable data; ``data`` keeps the raw words and
    elements so callers can re-check a claimed violation.
    """

    kind: str
    verdict: str
    value: object = None
    verified_to: int | None = None
    witness: dict | None = None
    growth_trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return self.verdict == CONSTANT

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 2

    def trace_dict(self) -> dict:
        return dict(self.growth_trace)

    def to_json(self) -> dict:
        doc = {
            "kind": self.kind,
            "verdict": self.verdict,
            "value": jsonable(self.value),
            "verified_to": self.verified_to,
            "growth_trace": [[b, jsonable(v)] for b, v in self.growth_trace],
        }
        if self.witness is not None:
            doc["witness"] = jsonable(self.witness)
        if self.notes:
            doc["notes"] = list(self.notes)
        if self.extra:
            doc["extra"] = jsonable(self.extra)
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)

    def table(self) -> str:
        lines = [f"{self.kind}: {self.verdict}"
                 + (f" value={jsonable(self.value)}" if self.value is not None else "")
                 + (f" (verified to {self.verified_to})" if self.verified_to is not None else "")]
        if self.witness:
            for k, v in self.witness.items():
                lines.append(f"  witness {k}: {jsonable(v)}")
        if self.growth_trace:
            lines.append("  growth: " + " ".join(f"{b}:{jsonable(v)}" for b, v in self.growth_trace))
        for k, v in self.extra.items():
            lines.append(f"  {k}: {jsonable(v)}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


def from_trace(kind: str, per_bound: dict, max_len: int, witness_at, start: int = 1,
               notes=None, extra=None) -> CheckReport:
    """Build a report from best-per-bound values using the divergence rule.

    ``witness_at`` is called with no arguments to produce (witness, data)
    when the verdict is a failure.
    """
    trace = cumulative(per_bound, max_len, start=0)
    growth = [(b, trace[b]) for b in range(start, max_len + 1)]
    value = trace.get(max_len, 0)
    if is_divergent(trace, max_len):
        witness, data = witness_at()
        return CheckReport(kind, FAILURE, value, max_len, witness, growth,
                           list(notes or []) + ["constant still growing at the final bound"],
                           dict(extra or {}), data)
    witness, data = witness_at() if witness_at else (None, {})
    return CheckReport(kind, CONSTANT, value, max_len, None, growth, list(notes or []),
                       dict(extra or {}), dict(data or {}, extremal=witness))
