"""Delay scans: free evolution, the kick, and SSFI readout.

After the kick the packet evolves freely until detection, which only changes
phases, so populations right after the kick are what SSFI measures.  Each
Stark state is read out at the classical ionization field F_i = E^2 / 4.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InternalError
from .kick import KickOperator
from .stark import StarkBasis, WavePacket
from .units import au_to_vcm, ps_to_au

# delays per evaluation block; fixed so results do not depend on worker count
CHUNK = 50


def ionization_field(energy):
    """Classical SSFI threshold E^2 / 4 in V/cm for binding energy E (a.u.)."""
    return au_to_vcm(np.asarray(energy) ** 2 / 4.0)


def _check_same_basis(wp: WavePacket, ko: KickOperator):
    if wp.basis is not ko.basis and wp.basis.uid != ko.basis.uid:
        raise InternalError("wave packet and kick operator belong to different Stark bases")


def evolve_and_kick(wp: WavePacket, ko: KickOperator, t_delay_ps: float) -> WavePacket:
    """Evolve freely for ``t_delay_ps`` then apply the kick."""
    _check_same_basis(wp, ko)
    return WavePacket(ko.M @ wp.at(ps_to_au(t_delay_ps)).amplitudes, wp.basis)


def _chunk_populations(M, c0, energies, t_au):
    phases = np.exp(-1j * np.outer(energies, t_au))
    return (np.abs(M @ (c0[:, None] * phases)) ** 2).T


def kicked_populations(wp: WavePacket, ko: KickOperator, delays_ps, workers: int = 1) -> np.ndarray:
    """(n_delays, n_states) Stark-state populations after a kick at each delay."""
    _check_same_basis(wp, ko)
    t_au = ps_to_au(np.asarray(delays_ps, dtype=float))
    blocks = [t_au[i : i + CHUNK] for i in range(0, t_au.size, CHUNK)]
    args = (ko.M, wp.amplitudes, wp.basis.energies)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _chunk_populations(*args, b), blocks))
    else:
        parts = [_chunk_populations(*args, b) for b in blocks]
    if not parts:
        return np.zeros((0, len(wp.basis)))
    return np.vstack(parts)


@dataclass(frozen=True)
class SSFIBins:
    """Uniform bins in ionization field (V/cm) with optional Gaussian smearing.

    ``smear`` is the Gaussian sigma in units of one bin width.  Smearing
    redistributes weight only among in-range bins, so totals are preserved.
    """

    edges: np.ndarray
    smear: float = 1.0
    _kernel: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ConfigError("bin edges must be strictly increasing")
        if self.smear < 0:
            raise ConfigError("smearing width must be non-negative")
        object.__setattr__(self, "edges", edges)
        nb = edges.size - 1
        if self.smear > 0:
            d = np.arange(nb)[:, None] - np.arange(nb)[None, :]
            K = np.exp(-0.5 * (d / self.smear) ** 2)
            K /= K.sum(axis=0, keepdims=True)
        else:
            K = np.eye(nb)
        object.__setattr__(self, "_kernel", K)

    @classmethod
    def uniform(cls, f_min: float, f_max: float, nbins: int = 64, smear: float = 1.0):
        if not 0 <= f_min < f_max or nbins < 1:
            raise ConfigError("invalid SSFI bin range")
        return cls(np.linspace(f_min, f_max, nbins + 1), smear)

    @classmethod
    def for_n_star(cls, n_low: float, n_high: float, nbins: int = 64, smear: float = 1.0):
        """Bins spanning the ionization fields of binding energies 1/(2 n*^2), n_low..n_high."""
        if not 0 < n_low < n_high:
            raise ConfigError("need 0 < n_low < n_high")
        f_hi = float(ionization_field(-0.5 / n_low**2))
        f_lo = float(ionization_field(-0.5 / n_high**2))
        return cls.uniform(f_lo, f_hi, nbins, smear)

    @classmethod
    def for_basis(cls, sb: StarkBasis, nbins: int = 64, smear: float = 1.0):
        fi = ionization_field(sb.energies)
        width = fi.max() - fi.min()
        return cls.uniform(float(max(fi.min() - 1e-9 * width, 0.0)), float(fi.max() + 1e-9 * width), nbins, smear)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def nbins(self) -> int:
        return self.edges.size - 1

    def assign(self, energies) -> np.ndarray:
        """Bin index of every state; -1 below range, nbins above."""
        fi = ionization_field(energies)
        idx = np.searchsorted(self.edges, fi, side="right") - 1
        idx[fi == self.edges[-1]] = self.nbins - 1
        return np.clip(idx, -1, self.nbins)

    def project(self, populations, energies):
        """Histogram populations (..., N) into (signal (..., nbins), below, above)."""
        pops = np.asarray(populations, dtype=float)
        idx = self.assign(energies)
        H = np.zeros((idx.size, self.nbins))
        inside = (idx >= 0) & (idx < self.nbins)
        H[np.nonzero(inside)[0], idx[inside]] = 1.0
        raw = pops @ H
        signal = raw @ self._kernel.T
        below = pops[..., idx < 0].sum(axis=-1)
        above = pops[..., idx >= self.nbins].sum(axis=-1)
        return signal, below, above


def ssfi_project(wp: WavePacket, bins: SSFIBins, warn_threshold: float = 1e-6) -> np.ndarray:
    signal, below, above = bins.project(wp.populations, wp.basis.energies)
    if below + above > warn_threshold:
        warnings.warn(
            f"{below + above:.3g} of the population lies outside the SSFI bins",
            stacklevel=2,
        )
    return signal


@dataclass(frozen=True, eq=False)
class Carpet:
    """SSFI signal over (delay, ionization-field bin).

    ``below``/``above`` hold the population outside the bin range, so each
    row of ``signal`` plus those two entries sums to the packet norm.
    """

    delays: np.ndarray
    field_bins: np.ndarray
    signal: np.ndarray
    below: np.ndarray
    above: np.ndarray
    metadata: dict = field(default_factory=dict)

    def row_totals(self) -> np.ndarray:
        return self.signal.sum(axis=1) + self.below + self.above

    def bin_index(self, fi_vcm: float) -> int:
        return int(np.argmin(np.abs(self.field_bins - fi_vcm)))


def check_delay_grid(delays_ps, n_star: float = 26.0):
    d = np.diff(np.asarray(delays_ps, dtype=float))
    if d.size and np.any(d <= 0):
        raise ConfigError("delays must be strictly increasing")
    tau = 2 * np.pi * n_star**3 / ps_to_au(1.0)
    if d.size and d.max() > tau / 10:
        warnings.warn(
            f"delay step {d.max():.3g} ps does not resolve the {tau:.3g} ps Kepler period",
            stacklevel=3,
        )


def carpet(
    wp0: WavePacket,
    ko: KickOperator,
    delays_ps,
    bins: SSFIBins,
    workers: int = 1,
    metadata: dict | None = None,
) -> Carpet:
    delays = np.asarray(delays_ps, dtype=float)
    check_delay_grid(delays)
    if ko.Q == 0.0:
        warnings.warn("zero impulse: the carpet will not depend on delay", stacklevel=2)
    pops = kicked_populations(wp0, ko, delays, workers)
    signal, below, above = bins.project(pops, wp0.basis.energies)
    return Carpet(delays, bins.centers, signal, below, above, dict(metadata or {}))


def lineout(c: Carpet, target_fi_vcm: float, width_vcm: float = 0.0) -> np.ndarray:
    """Signal versus delay in the bin nearest ``target_fi_vcm``.

    With ``width_vcm > 0`` every bin whose center lies within half that width
    of the target is summed instead.
    """
    if not c.field_bins.min() <= target_fi_vcm <= c.field_bins.max():
        raise ConfigError(f"{target_fi_vcm} V/cm is outside the carpet's field range")
    if width_vcm > 0:
        sel = np.abs(c.field_bins - target_fi_vcm) <= width_vcm / 2
        if sel.any():
            return c.signal[:, sel].sum(axis=1)
    return c.signal[:, c.bin_index(target_fi_vcm)].copy()


def manifold_band(n_star: float, half_width: float = 0.5) -> tuple[float, float]:
    """(center, width) in V/cm of the SSFI band covering n* +- half_width."""
    hi = float(ionization_field(-0.5 / (n_star - half_width) ** 2))
    lo = float(ionization_field(-0.5 / (n_star + half_width) ** 2))
    return 0.5 * (lo + hi), hi - lo


@dataclass(frozen=True, eq=False)
class LComposition:
    times: np.ndarray
    P: np.ndarray  # (time, l)

    def total(self) -> np.ndarray:
        return self.P.sum(axis=1)


def l_composition(wp0: WavePacket, times_ps, manifold: np.ndarray | None = None) -> LComposition:
    """Angular-momentum populations of the freely evolving packet, normalized per time.

    ``manifold`` is an optional boolean mask over Stark states restricting
    the packet (e.g. to the n* ~ 26 manifold) before projecting.
    """
    times = np.asarray(times_ps, dtype=float)
    if np.any(times < 0):
        raise ConfigError("times must be non-negative")
    sb = wp0.basis
    c = wp0.amplitudes if manifold is None else np.where(manifold, wp0.amplitudes, 0)
    ls = np.array([s.l for s in sb.basis])
    onehot = np.zeros((ls.size, ls.max() + 1))
    onehot[np.arange(ls.size), ls] = 1.0
    P = np.zeros((times.size, ls.max() + 1))
    t_au = ps_to_au(times)
    for i in range(0, times.size, CHUNK):
        t = t_au[i : i + CHUNK]
        psi = sb.U @ (c[:, None] * np.exp(-1j * np.outer(sb.energies, t)))
        P[i : i + CHUNK] = (np.abs(psi) ** 2).T @ onehot
    P /= P.sum(axis=1, keepdims=True)
    return LComposition(times, P)


