"""Built-in oracle suite for ``starkhcp selfcheck``.

Uses closed forms only, so it runs without the test dependencies:
hydrogen radial integrals, the n = 2 linear Stark effect, kick unitarity,
and the two-level beat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .analysis import fourier_peaks
from .basis import HYDROGEN, BasisState
from .dynamics import kicked_populations
from .kick import build_kick
from .radial import RadialCache, RadialGrid
from .stark import StarkBasis, StarkSystem, WavePacket
from .units import cm1_to_au, ps_to_au


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.limit)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3g} (limit {self.limit:.3g})"


def _radial_checks():
    states = [BasisState(1, 0), BasisState(2, 1)] + [BasisState(n, l) for n in (10, 26) for l in (n - 2, n - 1)]
    cache = RadialCache(states, HYDROGEN, RadialGrid(26))
    exact = 128 * math.sqrt(6) / 243
    yield Check("hydrogen <1s|r|2p> relative error", abs(cache.radial_integral(states[0], states[1]) / exact - 1), 1e-4)
    worst = 0.0
    for n in (10, 26):
        l = n - 1
        same_n = 1.5 * n * math.sqrt(n * n - l * l)
        got = abs(cache.radial_integral(BasisState(n, l), BasisState(n, l - 1)))
        worst = max(worst, abs(got / same_n - 1))
    yield Check("hydrogen same-n <n l|r|n l-1> relative error", worst, 1e-4)


def _stark_check():
    F = 1e-6
    system = StarkSystem(HYDROGEN, 2, 2, launch_state=None)
    w = system.stark_basis(F).energies
    expected = np.array([-0.125 - 3 * F, -0.125 + 3 * F])
    yield Check("hydrogen n=2 linear Stark shifts, relative", float(np.max(np.abs(w - expected)) / (3 * F)), 1e-4)


def _kick_checks():
    system = StarkSystem(HYDROGEN, 3, 8, launch_state=None)
    sb = system.stark_basis(1e-7)
    worst = 0.0
    for Q in (1e-4, 2e-3, 1e-2):
        M = build_kick(sb, system.Z, Q).M
        worst = max(worst, float(np.abs(M.conj().T @ M - np.eye(len(sb))).max()))
    yield Check("kick unitarity max |M^H M - I|", worst, 1e-10)


def _two_level_check():
    split_cm1 = 11.8
    delta = cm1_to_au(split_cm1)
    sb = StarkBasis(0.0, np.array([0.0, delta]), np.eye(2), ())
    ko = build_kick(sb, np.array([[0.0, 1.0], [1.0, 0.0]]), 0.05)
    wp = WavePacket(np.array([1.0, 1.0], dtype=complex) / math.sqrt(2), sb)
    t = np.round(np.arange(701) * 0.2, 12)
    p0 = kicked_populations(wp, ko, t)[:, 0]
    guess = fourier_peaks(p0, t).frequencies[0]
    omega_ps = cm1_to_au(guess) * ps_to_au(1.0)
    model = lambda tt, a, b, w, ph: a + b * np.cos(w * tt + ph)
    popt, _ = curve_fit(model, t, p0, p0=[p0.mean(), np.ptp(p0) / 2, omega_ps, 0.0], maxfev=20000)
    fitted = abs(popt[2]) / ps_to_au(1.0)
    yield Check("two-level beat fitted frequency, relative", abs(fitted / delta - 1), 1e-6)


def run_all():
    checks = []
    for gen in (_radial_checks, _stark_check, _kick_checks, _two_level_check):
        checks.extend(gen())
    return checks
