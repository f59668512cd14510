"""Radial wavefunctions by inward Numerov integration on a square-root mesh.

With r = x**2 and u(r) = r R(r) = x**(1/2) X(x), the radial equation becomes

    X''(x) = [8 x^2 (V(x^2) - E) + (2l + 1/2)(2l + 3/2) / x^2] X(x),

which is integrated from outside the outer turning point towards the core.
Every state shares one uniform x mesh, so products of wavefunctions can be
integrated with a plain trapezoid rule (the integrands vanish at both ends).
All states are propagated together, one mesh point at a time, as numpy
vectors.

Sign convention: every wavefunction is positive in its outermost lobe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .basis import BasisState, QuantumDefectTable, energy
from .errors import InternalError, NumericalError

# the hydrogenic envelope r^n e^{-r/n} must have fallen by e^-TAIL_LOG from its
# peak where integration starts; matters for low n, where 2 n (n + 1) is too close
TAIL_LOG = 30.0
SEED = 1e-30


def _tail_radius(n: int) -> float:
    # solve n (ln a - a + 1) = -TAIL_LOG for a = r / n^2 > 1
    target = -TAIL_LOG / n
    return n * n * brentq(lambda a: math.log(a) - a + 1.0 - target, 1.0, 10.0 + 2.0 * TAIL_LOG)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform mesh in x = sqrt(r).

    ``x[0] = step`` so the centrifugal term stays finite.  ``outer_multiple``
    scales the classical outer turning point 2 n (n + 1) to get the radius
    where a state's inward integration starts.
    """

    n_max: int
    step: float = 0.01
    outer_multiple: float = 2.0
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.step <= 0 or self.outer_multiple < 1:
            raise ValueError("grid step must be positive and outer_multiple >= 1")
        x_max = math.sqrt(self.outer_radius(self.n_max))
        npts = int(math.ceil(x_max / self.step))
        object.__setattr__(self, "x", self.step * np.arange(1, npts + 1))

    def outer_radius(self, n: int) -> float:
        return max(self.outer_multiple * 2.0 * n * (n + 1), _tail_radius(n))

    @property
    def r(self) -> np.ndarray:
        return self.x**2

    def start_index(self, n: int) -> int:
        return min(int(round(math.sqrt(self.outer_radius(n)) / self.step)) - 1, self.x.size - 2)


@dataclass(frozen=True)
class RadialWavefunction:
    state: BasisState
    grid: RadialGrid
    X: np.ndarray = field(repr=False)
    inner_index: int = 0

    @property
    def values(self) -> np.ndarray:
        """u(r) = r R(r) sampled at ``grid.r``."""
        return np.sqrt(self.grid.x) * self.X

    @property
    def norm(self) -> float:
        return float(2.0 * self.grid.step * np.sum(self.grid.x**2 * self.X**2))

    def node_count(self) -> int:
        u = self.X[self.inner_index :]
        u = u[np.abs(u) > 1e-10 * np.abs(u).max()]
        return int(np.count_nonzero(np.signbit(u[1:]) != np.signbit(u[:-1])))


def _inner_turning_radius(E: float, l: int) -> float:
    """Inner zero of the transformed effective potential -8 r - 8 E r^2 + c_l."""
    c = (2 * l + 0.5) * (2 * l + 1.5)
    a = -E  # > 0
    disc = 1.0 - a * c / 2.0
    if disc <= 0:
        return math.inf
    return (1.0 - math.sqrt(disc)) / (2.0 * a)


def integrate_many(
    states: Sequence[BasisState],
    defects: QuantumDefectTable,
    grid: RadialGrid,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized X(x) for each state, stacked as rows.

    Returns ``(X, inner)`` where ``inner[k]`` is the first mesh index at which
    state k is nonzero.  Inward integration stops at the core radius of the
    defect table or as soon as the solution grows again inside the inner
    turning point, whichever comes first.
    """
    nstates = len(states)
    x = grid.x
    h2 = grid.step**2
    E = np.array([energy(s, defects) for s in states])
    c_l = np.array([(2 * s.l + 0.5) * (2 * s.l + 1.5) for s in states])
    start = np.array([grid.start_index(s.n) for s in states])
    if np.any(x[start] ** 2 < 2.0 * np.array([(defects.n_eff(s.n, s.l)) ** 2 for s in states])):
        raise NumericalError("radial mesh does not reach beyond the classical turning point")
    idx_tp = np.searchsorted(x, np.sqrt([_inner_turning_radius(e, s.l) for e, s in zip(E, states)]))
    idx_core = np.searchsorted(x, math.sqrt(defects.core_radius)) if defects.core_radius > 0 else 0

    def f(i):
        g = -8.0 - 8.0 * E * x[i] ** 2 + c_l / x[i] ** 2
        return 1.0 - h2 * g / 12.0

    X = np.zeros((nstates, x.size))
    inner = np.zeros(nstates, dtype=int)
    alive = np.ones(nstates, dtype=bool)
    top = int(start.max())
    for k in range(nstates):
        X[k, start[k]] = SEED
    f_next, f_here = f(top + 1), f(top)
    for i in range(top, 0, -1):
        f_prev = f(i - 1)
        new = ((12.0 - 10.0 * f_here) * X[:, i] - f_next * X[:, i + 1]) / f_prev
        # states that have not started yet keep their zeros (and their seed)
        pending = i - 1 >= start
        new = np.where(pending, X[:, i - 1], new)
        inside = (i - 1 < idx_tp) & ~pending
        stop = alive & ~pending & (
            (inside & (np.abs(new) > np.abs(X[:, i]))) | (i - 1 < idx_core)
        )
        if stop.any():
            inner[stop] = i
            alive &= ~stop
        new[~alive & ~pending] = 0.0
        X[:, i - 1] = new
        if not alive.any():
            break
        f_next, f_here = f_here, f_prev
    if np.any(alive):
        # reached x[0] without diverging; the mesh starts there
        inner[alive] = 0
    # the regular solution has no node inside the inner turning point, so a
    # sign change there means the irregular solution has taken over
    for k in range(nstates):
        lo, hi = inner[k], min(idx_tp[k], start[k])
        if hi - lo < 2:
            continue
        seg = X[k, lo : hi + 1]
        flips = np.nonzero(np.signbit(seg[1:]) != np.signbit(seg[:-1]))[0]
        if flips.size:
            cut = lo + flips[-1] + 1
            X[k, :cut] = 0.0
            inner[k] = cut

    if not np.all(np.isfinite(X)):
        bad = [str(states[k]) for k in np.nonzero(~np.isfinite(X).all(axis=1))[0]]
        raise NumericalError(f"Numerov integration overflowed for {', '.join(bad[:5])}")
    norm = 2.0 * grid.step * np.einsum("ki,i->k", X**2, x**2)
    if np.any(norm <= 0):
        raise NumericalError("zero radial wavefunction; energy above the barrier?")
    X /= np.sqrt(norm)[:, None]
    return X, inner


def integrate(state: BasisState, defects: QuantumDefectTable, grid: RadialGrid) -> RadialWavefunction:
    X, inner = integrate_many([state], defects, grid)
    return RadialWavefunction(state, grid, X[0], int(inner[0]))


def angular_factor(l: int, lp: int, m: int = 0) -> float:
    """<l, m| cos(theta) |l', m> for m = 0; zero unless |l - l'| = 1."""
    if m != 0:
        raise ValueError("only m = 0 is supported")
    if abs(l - lp) != 1:
        return 0.0
    lo = min(l, lp)
    return math.sqrt((lo + 1) ** 2 / ((2 * lo + 1) * (2 * lo + 3)))


class RadialCache:
    """Wavefunctions for a fixed list of states plus their r-weighted overlaps.

    Wavefunctions are computed once at construction; radial integrals are
    memoized per (a, b) pair.  The cache is effectively write-once per key,
    so concurrent readers always see the same values.
    """

    def __init__(self, states: Sequence[BasisState], defects: QuantumDefectTable, grid: RadialGrid | None = None):
        self.states = list(states)
        self.defects = defects
        self.grid = grid or RadialGrid(max(s.n for s in self.states))
        self.index = {s: k for k, s in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise InternalError("duplicate states in radial cache")
        self.X, self.inner = integrate_many(self.states, defects, self.grid)
        self._weight = 2.0 * self.grid.step * self.grid.x**4
        self._memo: dict[tuple[int, int], float] = {}

    def wavefunction(self, state: BasisState) -> RadialWavefunction:
        k = self._lookup(state)
        return RadialWavefunction(state, self.grid, self.X[k], int(self.inner[k]))

    def _lookup(self, state):
        try:
            return self.index[state]
        except KeyError:
            raise InternalError(f"state {state} is not on this radial grid") from None

    def radial_integral(self, a: BasisState, b: BasisState) -> float:
        """<u_a| r |u_b> by trapezoidal quadrature on the shared mesh."""
        i, j = sorted((self._lookup(a), self._lookup(b)))
        key = (i, j)
        if key not in self._memo:
            self._memo[key] = float(np.dot(self.X[i] * self._weight, self.X[j]))
        return self._memo[key]

    def radial_block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """All radial integrals between two index sets, in one matrix product."""
        return (self.X[rows] * self._weight) @ self.X[cols].T

    def z_matrix(self, states: Sequence[BasisState] | None = None) -> np.ndarray:
        """Dipole matrix z_ab = <a|r|b> <l_a|cos theta|l_b> over ``states``."""
        states = self.states if states is None else list(states)
        idx = np.array([self._lookup(s) for s in states])
        ls = np.array([s.l for s in states])
        Z = np.zeros((len(states), len(states)))
        for l in range(int(ls.max())):
            rows = np.nonzero(ls == l)[0]
            cols = np.nonzero(ls == l + 1)[0]
            if rows.size == 0 or cols.size == 0:
                continue
            block = self.radial_block(idx[rows], idx[cols]) * angular_factor(l, l + 1)
            Z[np.ix_(rows, cols)] = block
            Z[np.ix_(cols, rows)] = block.T
        return Z


def radial_integral(a: BasisState, b: BasisState, defects: QuantumDefectTable, grid: RadialGrid) -> float:
    if grid is None:
        raise InternalError("a radial grid is required")
    return RadialCache([a, b] if a != b else [a], defects, grid).radial_integral(a, b)
