import math

import numpy as np
from hypothesis import strategies as st

from branchlearn.pwl import INF, Interval, Piece, PwlFunction

UNIT = Interval(0.0, 10.0)


@st.composite
def pwl_functions(draw, domain=UNIT, max_pieces=5, allow_inf=False, constant=False):
    """Random valid piecewise linear functions on ``domain``."""
    k = draw(st.integers(1, max_pieces))
    lo = domain.lo if math.isfinite(domain.lo) else -50.0
    hi = domain.hi if math.isfinite(domain.hi) else 50.0
    cuts = draw(
        st.lists(
            st.floats(lo + 0.01, hi - 0.01, allow_nan=False, allow_infinity=False),
            min_size=k - 1, max_size=k - 1, unique=True,
        )
    )
    bounds = [domain.lo] + sorted(cuts) + [domain.hi]
    pieces = []
    for a, b in zip(bounds, bounds[1:]):
        if allow_inf and draw(st.integers(0, 5)) == 0:
            pieces.append(Piece(a, b, 0.0, INF, INF))
            continue
        slope = 0.0 if constant else draw(st.floats(-5, 5, allow_nan=False))
        icpt = draw(st.floats(-20, 20, allow_nan=False))
        payload = draw(st.floats(-20, 20, allow_nan=False))
        pieces.append(Piece(a, b, slope, icpt, payload))
    return PwlFunction(domain, pieces)


def random_pwl(rng: np.random.Generator, domain=UNIT, max_pieces=6, allow_inf=False) -> PwlFunction:
    k = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(rng.uniform(domain.lo, domain.hi, size=k - 1))
    bounds = [domain.lo, *cuts.tolist(), domain.hi]
    pieces = []
    for a, b in zip(bounds, bounds[1:]):
        if a >= b:
            continue
        if allow_inf and rng.random() < 0.15:
            pieces.append(Piece(a, b, 0.0, INF, INF))
        else:
            pieces.append(Piece(a, b, float(rng.uniform(-5, 5)), float(rng.uniform(-20, 20)), float(rng.uniform(-20, 20))))
    return PwlFunction(domain, pieces)


def sample_points(rng: np.random.Generator, domain, n: int) -> np.ndarray:
    return rng.uniform(domain.lo, domain.hi, size=n)


def random_line(rng: np.random.Generator, t: int):
    """A ParamLine with some parameters independent of gamma."""
    from branchlearn.core import ParamLine

    slope = rng.uniform(-2.0, 2.0, size=t)
    slope[rng.random(t) < 0.3] = 0.0
    return ParamLine(slope, rng.uniform(0.0, 10.0, size=t))


def window(domain: Interval, half: float = 20.0) -> Interval:
    return Interval(max(domain.lo, -half), min(domain.hi, half))


def check_consistency(spec, root, truth, line, rng, n_gamma=100, tol=1e-6):
    """Compare relearn against resolve at sampled gamma; returns the number of payload checks."""
    from branchlearn.core import nonnegative_domain, relearn, resolve

    domain = window(nonnegative_domain(line))
    inst = spec.parameterize(root, line.fns(), truth)
    f = relearn(spec, inst, domain)
    f.check()
    assert f.domain == domain
    breaks = np.array(f.breakpoints())
    checked = 0
    for g in rng.uniform(domain.lo, domain.hi, n_gamma):
        theta_hat = line.at(g)
        sol, value = resolve(spec, root, theta_hat)
        est, payload = f.piece_at(g).value(g), f.piece_at(g).payload
        if math.isinf(value):
            assert math.isinf(est)
            continue
        assert abs(est - value) <= tol * max(1.0, abs(value)), (g, est, value)
        if breaks.size and np.min(np.abs(breaks - g)) <= 1e-6:
            continue
        assert abs(payload - spec.objective(root, sol, truth)) <= tol * max(1.0, abs(payload)), (g, payload)
        checked += 1
    return checked
