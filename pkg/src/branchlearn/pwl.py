"""
Piecewise linear functions of a single real variable.

A function is stored as an ordered tuple of pieces covering its domain
without gaps. Every piece is half-open ``[lo, hi)`` except the last one,
which is closed. Besides its linear *estimate* ``slope * x + intercept``,
each piece carries a *payload* (the true-parameter objective of the
decision the piece stands for) and an optional opaque *tag* (the decision
itself, e.g. a path). Under ``min``/``max`` the payload and tag follow the
operand whose estimate wins; under ``add``/``sub`` payloads are combined
the same way as estimates and the tag of the left operand is kept.

Infinite values are plain ``math.inf`` floats. A piece with an infinite
intercept always has slope 0.
"""

from __future__ import annotations

import bisect
import math
from typing import Any, Callable, Iterable, NamedTuple, Sequence

INF = math.inf
SLOPE_TOL = 1e-12


class PwlError(ValueError):
    """Raised on invalid piecewise-function operations."""


class Interval(NamedTuple):
    lo: float
    hi: float

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


REALS = Interval(-INF, INF)


class LinearFn(NamedTuple):
    slope: float
    intercept: float

    def __call__(self, x: float) -> float:
        if self.slope == 0.0:
            return self.intercept
        return self.slope * x + self.intercept

    def __add__(self, other: "LinearFn") -> "LinearFn":  # type: ignore[override]
        return LinearFn(self.slope + other.slope, _add(self.intercept, other.intercept))


class Piece(NamedTuple):
    lo: float
    hi: float
    slope: float
    intercept: float
    payload: float
    tag: Any = None

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    @property
    def est(self) -> LinearFn:
        return LinearFn(self.slope, self.intercept)

    def value(self, x: float) -> float:
        if self.slope == 0.0:
            return self.intercept
        return self.slope * x + self.intercept


def _add(x: float, y: float) -> float:
    s = x + y
    if s != s:
        raise PwlError("undefined sum of +inf and -inf")
    return s


def _mul(x: float, c: float) -> float:
    # 0 * inf is taken as 0: a zero-weighted term contributes nothing.
    if c == 0.0:
        return 0.0
    return x * c


def representative(lo: float, hi: float) -> float:
    """A point strictly inside ``[lo, hi)`` used to compare lines on it."""
    if lo == -INF:
        return 0.0 if hi == INF else hi - 1.0
    if hi == INF:
        return lo + 1.0
    return 0.5 * (lo + hi)


class PwlFunction:
    """Immutable interval-partitioned piecewise linear function."""

    __slots__ = ("domain", "pieces", "_los")

    def __init__(self, domain: Interval, pieces: Sequence[Piece]):
        self.domain = Interval(*domain)
        self.pieces = tuple(pieces)
        self._los = None
        if not self.pieces:
            raise PwlError("a piecewise function needs at least one piece")

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def __repr__(self) -> str:
        body = ", ".join(
            f"[{p.lo:g},{p.hi:g}): {p.slope:g}x{p.intercept:+g} ({p.payload:g})" for p in self.pieces
        )
        return f"PwlFunction({body})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PwlFunction):
            return NotImplemented
        return self.domain == other.domain and self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash((self.domain, self.pieces))

    def __call__(self, x: float) -> float:
        return self.piece_at(x).value(x)

    def piece_at(self, x: float) -> Piece:
        if not self.domain.contains(x):
            raise PwlError(f"{x} outside domain [{self.domain.lo}, {self.domain.hi}]")
        pieces = self.pieces
        if len(pieces) == 1:
            return pieces[0]
        if self._los is None:
            self._los = [p.lo for p in pieces]
        i = bisect.bisect_right(self._los, x) - 1
        return pieces[max(i, 0)]

    def breakpoints(self) -> list[float]:
        """Interior breakpoints, in increasing order."""
        return [p.lo for p in self.pieces[1:]]

    @property
    def is_constant_inf(self) -> bool:
        return len(self.pieces) == 1 and self.pieces[0].intercept == INF

    @property
    def is_piecewise_constant(self) -> bool:
        return all(p.slope == 0.0 for p in self.pieces)

    def check(self) -> None:
        """Assert partition validity: sorted, disjoint and gap-free over the domain."""
        ps = self.pieces
        if ps[0].lo != self.domain.lo or ps[-1].hi != self.domain.hi:
            raise PwlError("pieces do not span the domain")
        for p in ps:
            if not p.lo < p.hi:
                raise PwlError(f"empty piece [{p.lo}, {p.hi})")
            if math.isinf(p.intercept) and p.slope != 0.0:
                raise PwlError("infinite piece with nonzero slope")
        for a, b in zip(ps, ps[1:]):
            if a.hi != b.lo:
                raise PwlError(f"gap or overlap between {a.hi} and {b.lo}")


def evaluate(f: PwlFunction, r: float) -> tuple[float, float]:
    """Return ``(estimate, payload)`` of the piece containing ``r``."""
    p = f.piece_at(r)
    return p.value(r), p.payload


def constant(v: float, domain: Interval = REALS, payload: float | None = None, tag: Any = None) -> PwlFunction:
    domain = Interval(*domain)
    if not domain.lo < domain.hi:
        raise PwlError("empty domain")
    if payload is None:
        payload = v
    return PwlFunction(domain, (Piece(domain.lo, domain.hi, 0.0, float(v), float(payload), tag),))


def linear(fn: LinearFn, domain: Interval, payload: float, tag: Any = None) -> PwlFunction:
    domain = Interval(*domain)
    if not domain.lo < domain.hi:
        raise PwlError("empty domain")
    slope = 0.0 if math.isinf(fn.intercept) else float(fn.slope)
    return PwlFunction(domain, (Piece(domain.lo, domain.hi, slope, float(fn.intercept), float(payload), tag),))


def _overlaps(f: PwlFunction, g: PwlFunction):
    """Yield ``(lo, hi, pf, pg)`` for the common refinement of two partitions."""
    fp, gp = f.pieces, g.pieces
    i = j = 0
    lo = f.domain.lo
    while i < len(fp) and j < len(gp):
        a, b = fp[i], gp[j]
        hi = a.hi if a.hi < b.hi else b.hi
        if lo < hi:
            yield lo, hi, a, b
        lo = hi
        if a.hi == hi:
            i += 1
        if b.hi == hi:
            j += 1


def _push(out: list, piece: Piece) -> None:
    # Merges a piece into its left neighbour when it continues the same decision.
    if out:
        last = out[-1]
        if (
            last.hi == piece.lo
            and last.slope == piece.slope
            and last.intercept == piece.intercept
            and last.payload == piece.payload
            and (last.tag is piece.tag or last.tag == piece.tag)
        ):
            out[-1] = last._replace(hi=piece.hi)
            return
    out.append(piece)


def _better(op: str, vf: float, vg: float) -> bool:
    """True when the left operand wins (ties go left)."""
    return vf <= vg if op == "min" else vf >= vg


def combine(f: PwlFunction, g: PwlFunction, op: str) -> PwlFunction:
    """Pointwise ``add``, ``sub``, ``min`` or ``max`` of two functions on the same domain."""
    if f.domain != g.domain:
        raise PwlError(f"domain mismatch: {f.domain} vs {g.domain}")
    if op == "min" or op == "max":
        return _extremum(f, g, op)
    if op == "add":
        sign = 1.0
    elif op == "sub":
        sign = -1.0
    else:
        raise PwlError(f"unknown operation {op!r}")
    out: list[Piece] = []
    for lo, hi, a, b in _overlaps(f, g):
        icpt = _add(a.intercept, sign * b.intercept)
        slope = 0.0 if math.isinf(icpt) else a.slope + sign * b.slope
        _push(out, Piece(lo, hi, slope, icpt, _add(a.payload, sign * b.payload), a.tag))
    return PwlFunction(f.domain, out)


def _extremum(f: PwlFunction, g: PwlFunction, op: str) -> PwlFunction:
    # Fast paths for the infeasible marker, which dominates exhaustive recursions.
    if op == "min":
        if g.is_constant_inf:
            return f
        if f.is_constant_inf:
            return g
    else:
        if g.is_constant_inf or f.is_constant_inf:
            return g if g.is_constant_inf and not f.is_constant_inf else f
    out: list[Piece] = []
    for lo, hi, a, b in _overlaps(f, g):
        cuts = [lo]
        if (
            math.isfinite(a.intercept)
            and math.isfinite(b.intercept)
            and abs(a.slope - b.slope) > SLOPE_TOL
        ):
            x = (b.intercept - a.intercept) / (a.slope - b.slope)
            if lo < x < hi:
                cuts.append(x)
        cuts.append(hi)
        for k in range(len(cuts) - 1):
            l, h = cuts[k], cuts[k + 1]
            x = representative(l, h)
            win = a if _better(op, a.value(x), b.value(x)) else b
            _push(out, Piece(l, h, win.slope, win.intercept, win.payload, win.tag))
    return PwlFunction(f.domain, out)


def scale(f: PwlFunction, c: float) -> PwlFunction:
    if not math.isfinite(c):
        raise PwlError("scale factor must be finite")
    out = []
    for p in f.pieces:
        icpt = _mul(p.intercept, c)
        slope = 0.0 if math.isinf(icpt) else p.slope * c
        out.append(Piece(p.lo, p.hi, slope, icpt, _mul(p.payload, c), p.tag))
    return PwlFunction(f.domain, out)


def restrict(f: PwlFunction, interval: Interval) -> PwlFunction:
    lo = max(f.domain.lo, interval[0])
    hi = min(f.domain.hi, interval[1])
    if not lo < hi:
        raise PwlError(f"{tuple(interval)} does not overlap domain {tuple(f.domain)}")
    out = []
    for p in f.pieces:
        plo, phi = max(p.lo, lo), min(p.hi, hi)
        if plo < phi:
            out.append(p._replace(lo=plo, hi=phi))
    return PwlFunction(Interval(lo, hi), out)


def concatenate(parts: Iterable[PwlFunction]) -> PwlFunction:
    """Join functions whose domains tile an interval left to right."""
    parts = list(parts)
    if not parts:
        raise PwlError("nothing to concatenate")
    out: list[Piece] = []
    for a, b in zip(parts, parts[1:]):
        if a.domain.hi != b.domain.lo:
            raise PwlError("concatenated domains must be adjacent")
    for part in parts:
        for p in part.pieces:
            _push(out, p)
    return PwlFunction(Interval(parts[0].domain.lo, parts[-1].domain.hi), out)


def map_tags(f: PwlFunction, fn: Callable[[Any], Any]) -> PwlFunction:
    return PwlFunction(f.domain, [p._replace(tag=fn(p.tag)) for p in f.pieces])


def simplify(f: PwlFunction, tol: float = 1e-12) -> PwlFunction:
    """Merge adjacent pieces with the same estimate (within ``tol``), payload and tag."""
    out: list[Piece] = []
    for p in f.pieces:
        if out:
            q = out[-1]
            if (
                abs(q.slope - p.slope) <= tol
                and (q.intercept == p.intercept or abs(q.intercept - p.intercept) <= tol)
                and q.payload == p.payload
                and q.tag == p.tag
            ):
                out[-1] = q._replace(hi=p.hi)
                continue
        out.append(p)
    return PwlFunction(f.domain, out)


def argmin_piecewise(f: PwlFunction) -> tuple[float, float]:
    """Minimise a piecewise constant function.

    Returns a point of the leftmost piece attaining the minimum (its midpoint,
    or its finite end moved inward by 1 when the piece is unbounded) and the
    minimum value.
    """
    best = None
    for p in f.pieces:
        if p.slope != 0.0:
            raise PwlError("argmin_piecewise needs a piecewise constant function")
        if best is None or p.intercept < best.intercept:
            best = p
    if best is None or math.isinf(best.intercept):
        raise PwlError("function is infinite everywhere")
    return representative(best.lo, best.hi), best.intercept


def sum_functions(fs: Sequence[PwlFunction], domain: Interval = REALS) -> PwlFunction:
    """Pointwise sum, reduced pairwise in index order so the result is reproducible."""
    level = list(fs)
    if not level:
        return constant(0.0, domain, 0.0)
    while len(level) > 1:
        nxt = [combine(level[i], level[i + 1], "add") for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]
