"""
Generic recursive solving and its piecewise learning counterpart.

A problem family plugs into :func:`resolve` and :func:`relearn` by
implementing :class:`ProblemSpec`. The scalar side works on known
parameters; the learning side works on instances whose unknown parameters
are linear functions of one free coefficient and returns a
:class:`~branchlearn.pwl.PwlFunction` of that coefficient.
"""

from __future__ import annotations

import enum
import functools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Generic, Iterator, Sequence, TypeVar

import numpy as np

from .pwl import (
    INF,
    REALS,
    Interval,
    LinearFn,
    Piece,
    PwlFunction,
    combine,
    concatenate,
)

P = TypeVar("P")


class Sense(enum.Enum):
    MINIMIZE = 1
    MAXIMIZE = -1

    @property
    def sign(self) -> int:
        return self.value


class EmptyDomain(ValueError):
    """The admissible range of the free coefficient is empty."""


@dataclass(frozen=True)
class ParamLine:
    """Estimated parameters as an affine function ``slope * gamma + offset``."""

    slope: np.ndarray
    offset: np.ndarray

    def at(self, gamma: float) -> np.ndarray:
        return self.slope * gamma + self.offset

    def fns(self) -> tuple[LinearFn, ...]:
        return tuple(LinearFn(float(a), float(b)) for a, b in zip(self.slope, self.offset))


@dataclass(frozen=True)
class TrainingExample:
    features: np.ndarray  # (t, m)
    truth: np.ndarray  # (t,)

    def __post_init__(self):
        if self.features.ndim != 2 or self.truth.ndim != 1:
            raise ValueError("features must be 2-d and truth 1-d")
        if self.features.shape[0] != self.truth.shape[0]:
            raise ValueError(
                f"truth has {self.truth.shape[0]} entries but features have {self.features.shape[0]} rows"
            )


class PiecewiseInfo(Generic[P]):
    """A partition of an interval with one piece of branching data per part."""

    def __init__(self, parts: Sequence[tuple[Interval, Any]]):
        if not parts:
            raise ValueError("empty partition")
        for (a, _), (b, _) in zip(parts, parts[1:]):
            if a.hi != b.lo or not a.lo < a.hi:
                raise ValueError("parts must be adjacent, nonempty and sorted")
        self.parts = [(Interval(*i), info) for i, info in parts]

    @classmethod
    def single(cls, interval: Interval, info: Any = None) -> "PiecewiseInfo":
        return cls([(Interval(*interval), info)])

    def __iter__(self) -> Iterator[tuple[Interval, Any]]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)


class ProblemSpec(ABC):
    """Recursion hooks for one problem family.

    Solve form: ``base_case``, ``base_result``, ``extract``, ``branch`` and
    ``reduce``. Learn form: ``base_result_l``, ``extract_l``, ``branch_l``
    and ``reduce_l``. Instances passed to the learn form carry their
    unknown parameters as :class:`LinearFn` objects together with the true
    parameters, which feed the payload channel.

    ``base_case`` and ``branch``/``branch_l`` must not inspect unknown
    parameter values; all branching that depends on them goes through
    ``extract``/``extract_l``.
    """

    sense: Sense
    nonnegative: bool = True

    # problem plumbing
    @abstractmethod
    def num_params(self, inst) -> int: ...

    @abstractmethod
    def parameterize(self, inst, fns: Sequence[LinearFn], truth: np.ndarray):
        """Return the learn-form root instance for parameter lines ``fns``."""

    @abstractmethod
    def objective(self, inst, solution, theta: np.ndarray) -> float:
        """Objective of ``solution`` under parameters ``theta``."""

    # solve form
    @abstractmethod
    def base_case(self, inst) -> bool: ...

    @abstractmethod
    def base_result(self, inst, theta) -> tuple[Any, float]: ...

    def extract(self, inst, theta) -> Any:
        return None

    @abstractmethod
    def branch(self, inst, theta, info) -> list: ...

    def reduce(self, x: tuple[Any, float], y: tuple[Any, float]) -> tuple[Any, float]:
        # ties keep the left result
        if self.sense is Sense.MAXIMIZE:
            return x if x[1] >= y[1] else y
        return x if x[1] <= y[1] else y

    # learn form
    @abstractmethod
    def base_result_l(self, inst, interval: Interval) -> PwlFunction: ...

    def extract_l(self, inst, interval: Interval) -> PiecewiseInfo:
        return PiecewiseInfo.single(interval)

    @abstractmethod
    def branch_l(self, inst, info, interval: Interval) -> list: ...

    def reduce_l(self, f: PwlFunction, g: PwlFunction) -> PwlFunction:
        return combine(f, g, "max" if self.sense is Sense.MAXIMIZE else "min")


def resolve(spec: ProblemSpec, inst, theta) -> tuple[Any, float]:
    """Solve ``inst`` under known parameters; returns ``(solution, objective)``."""
    if spec.base_case(inst):
        return spec.base_result(inst, theta)
    info = spec.extract(inst, theta)
    subproblems = spec.branch(inst, theta, info)
    results = [resolve(spec, sub, sub_theta) for sub, sub_theta in subproblems]
    return functools.reduce(spec.reduce, results)


def relearn(spec: ProblemSpec, inst, interval: Interval) -> PwlFunction:
    """Estimated optimal objective of a parameterized instance as a function of gamma."""
    interval = Interval(*interval)
    if not interval.lo < interval.hi:
        raise EmptyDomain(f"empty interval {tuple(interval)}")
    if spec.base_case(inst):
        return spec.base_result_l(inst, interval)
    info = spec.extract_l(inst, interval)
    parts = []
    for sub_interval, data in info:
        subproblems = spec.branch_l(inst, data, sub_interval)
        results = [relearn(spec, sub, sub_interval) for sub in subproblems]
        parts.append(functools.reduce(spec.reduce_l, results))
    if len(parts) == 1:
        return parts[0]
    return concatenate(parts)


def param_line(features: np.ndarray, alpha: np.ndarray, k: int) -> ParamLine:
    """Split ``features @ alpha`` into the part moving with coordinate ``k`` and the rest."""
    features = np.asarray(features, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    slope = features[:, k].copy()
    rest = alpha.copy()
    rest[k] = 0.0
    return ParamLine(slope, features @ rest)


def nonnegative_domain(line: ParamLine) -> Interval:
    """Set of gamma for which every ``slope_j * gamma + offset_j >= 0``."""
    lo, hi = -INF, INF
    for a, b in zip(line.slope, line.offset):
        if a > 0:
            lo = max(lo, -b / a)
        elif a < 0:
            hi = min(hi, -b / a)
        elif b < 0:
            raise EmptyDomain("a parameter is negative for every gamma")
    if not lo < hi:
        raise EmptyDomain(f"empty admissible range [{lo}, {hi}]")
    return Interval(float(lo), float(hi))


def construct(spec: ProblemSpec, inst, example: TrainingExample, alpha: np.ndarray, k: int):
    """Build the gamma-parameterized instance for coordinate ``k`` (0-based).

    Returns ``(inst_gamma, I0)``; raises :class:`EmptyDomain` when no gamma
    keeps the estimated parameters admissible.
    """
    m = example.features.shape[1]
    if not 0 <= k < m:
        raise IndexError(f"coordinate {k} out of range for {m} features")
    line = param_line(example.features, alpha, k)
    domain = nonnegative_domain(line) if spec.nonnegative else REALS
    return spec.parameterize(inst, line.fns(), example.truth), domain


def evaluate_regret(
    est: PwlFunction,
    true_opt: float,
    sense: Sense,
    big_m: float = 1e12,
    search_range: Interval = REALS,
) -> PwlFunction:
    """Piecewise constant regret over ``search_range`` from the payloads of ``est``.

    Outside ``est``'s domain, and wherever the payload is not finite, the
    regret is ``big_m``.
    """
    dom = est.domain
    if dom.lo < search_range.lo or dom.hi > search_range.hi:
        raise ValueError("search range must contain the estimate's domain")
    pieces: list[Piece] = []
    if search_range.lo < dom.lo:
        pieces.append(Piece(search_range.lo, dom.lo, 0.0, big_m, big_m))
    for p in est.pieces:
        r = sense.sign * (p.payload - true_opt)
        if not math.isfinite(r):
            r = big_m
        elif r < 0.0:
            # rounding only; a decision cannot beat the true optimum
            r = 0.0
        if pieces and pieces[-1].hi == p.lo and pieces[-1].intercept == r:
            pieces[-1] = pieces[-1]._replace(hi=p.hi)
        else:
            pieces.append(Piece(p.lo, p.hi, 0.0, r, r))
    if dom.hi < search_range.hi:
        pieces.append(Piece(dom.hi, search_range.hi, 0.0, big_m, big_m))
    return PwlFunction(search_range, pieces)


def regret(spec: ProblemSpec, theta_hat, theta, inst) -> float:
    """Objective loss, under ``theta``, of solving with ``theta_hat`` instead."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if theta_hat.shape != theta.shape:
        raise ValueError("estimated and true parameters differ in length")
    est_solution, _ = resolve(spec, inst, theta_hat)
    _, true_opt = resolve(spec, inst, theta)
    if not math.isfinite(true_opt):
        raise ValueError("instance is infeasible under the true parameters")
    value = spec.objective(inst, est_solution, theta)
    r = spec.sense.sign * (value - true_opt)
    if r < -1e-9 * max(1.0, abs(true_opt)):
        raise RuntimeError(f"negative regret {r}: solver did not return an optimum")
    return max(r, 0.0)
