"""Stark Hamiltonian H = H0 + F z in the field-free |n l 0> basis.

``StarkSystem`` owns everything that does not depend on the static field
(basis, radial wavefunctions, the dipole matrix, the launch state) and
produces a ``StarkBasis`` for any field.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisState, QuantumDefectTable, energies, enumerate_basis
from .errors import ConfigError, InternalError, NumericalError
from .radial import RadialCache, RadialGrid, angular_factor

_ids = itertools.count(1)


@dataclass(frozen=True, eq=False)
class StarkBasis:
    """Eigenstates of the Stark Hamiltonian.

    Column k of ``U`` is eigenstate k expanded over ``basis``; ``energies``
    are ascending.
    """

    field: float
    energies: np.ndarray
    U: np.ndarray
    basis: tuple[BasisState, ...]
    uid: int = field(default_factory=lambda: next(_ids))

    def __len__(self):
        return self.energies.size

    def l_weights(self) -> np.ndarray:
        """(l_max + 1, N) array: weight of each l in each eigenstate."""
        ls = np.array([s.l for s in self.basis])
        W = np.zeros((ls.max() + 1, len(self)))
        np.add.at(W, ls, self.U**2)
        return W

    def n_star(self, defects: QuantumDefectTable) -> np.ndarray:
        """Effective quantum number of every eigenstate, from its energy."""
        return 1.0 / np.sqrt(-2.0 * np.minimum(self.energies, -1e-300))

    def manifold(self, defects: QuantumDefectTable) -> np.ndarray:
        """Integer manifold label: weight-averaged n* of the field-free components, rounded."""
        nst = np.array([defects.n_eff(s.n, s.l) for s in self.basis])
        return np.rint(nst @ self.U**2).astype(int)


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # largest-magnitude component of every eigenvector is made positive
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivot, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def diagonalize(H: np.ndarray, field: float = 0.0, basis=()) -> StarkBasis:
    """Dense symmetric eigendecomposition with deterministic eigenvector signs."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ConfigError("Hamiltonian must be a square matrix")
    if not np.allclose(H, H.T, rtol=0, atol=1e-14 * max(np.abs(H).max(), 1e-300)):
        raise ConfigError("Hamiltonian is not symmetric")
    try:
        w, U = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Stark diagonalization failed: {exc}") from exc
    return StarkBasis(field, w, _fix_signs(U), tuple(basis))


def build_hamiltonian(basis, defects: QuantumDefectTable, F: float, cache: RadialCache) -> np.ndarray:
    """H_ab = delta_ab E_a + F z_ab over ``basis`` (F in a.u.)."""
    if F < 0:
        raise ConfigError("static field must be non-negative")
    return np.diag(energies(basis, defects)) + F * cache.z_matrix(basis)


@dataclass(frozen=True)
class ExcitationSpec:
    """Laser excitation from a launch state with a Gaussian spectral envelope.

    ``center_energy`` and ``spectral_width`` (FWHM of the amplitude envelope)
    are in a.u.
    """

    center_energy: float
    spectral_width: float
    launch_state: BasisState = BasisState(7, 0)
    shape: str = "gaussian"

    def __post_init__(self):
        if self.spectral_width <= 0:
            raise ConfigError("spectral width must be positive")
        if self.shape not in ("gaussian",):
            raise ConfigError(f"unknown spectral envelope {self.shape!r}")

    @classmethod
    def spanning(cls, n_low: float, n_high: float, launch_state=BasisState(7, 0)):
        """Envelope centered midway (in energy) between two n*, FWHM equal to their separation."""
        e_lo, e_hi = -0.5 / n_low**2, -0.5 / n_high**2
        return cls(0.5 * (e_lo + e_hi), e_hi - e_lo, launch_state)

    def envelope(self, omega) -> np.ndarray:
        sigma = self.spectral_width / (2.0 * np.sqrt(2.0 * np.log(2.0)))
        return np.exp(-0.5 * ((np.asarray(omega) - self.center_energy) / sigma) ** 2)


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Amplitudes over the eigenstates of ``basis`` at creation time t = 0."""

    amplitudes: np.ndarray
    basis: StarkBasis

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.populations))

    def at(self, t: float) -> "WavePacket":
        """Free evolution by t (a.u.)."""
        return WavePacket(self.amplitudes * np.exp(-1j * self.basis.energies * t), self.basis)


class StarkSystem:
    """Field-independent part of the model: basis, radial data, dipole matrix."""

    def __init__(
        self,
        defects: QuantumDefectTable,
        n_min: int = 10,
        n_max: int = 40,
        launch_state: BasisState | None = BasisState(7, 0),
        grid: RadialGrid | None = None,
    ):
        self.defects = defects
        self.n_min, self.n_max = n_min, n_max
        self.basis = tuple(enumerate_basis(n_min, n_max))
        self.launch_state = launch_state
        extra = []
        if launch_state is not None and launch_state not in self.basis:
            extra = [launch_state]
        grid = grid or RadialGrid(max(n_max, launch_state.n if launch_state else 0))
        self.cache = RadialCache(list(self.basis) + extra, defects, grid)
        self.E0 = energies(self.basis, defects)
        self.Z = self.cache.z_matrix(self.basis)

    def __len__(self):
        return len(self.basis)

    def hamiltonian(self, F: float) -> np.ndarray:
        if F < 0:
            raise ConfigError("static field must be non-negative")
        return np.diag(self.E0) + F * self.Z

    def stark_basis(self, F: float) -> StarkBasis:
        return diagonalize(self.hamiltonian(F), F, self.basis)

    def launch_dipoles(self) -> np.ndarray:
        """z_{a, launch} for every basis state a (nonzero only for l = l_launch +- 1)."""
        if self.launch_state is None:
            raise ConfigError("system has no launch state")
        ls = self.launch_state
        out = np.zeros(len(self.basis))
        for k, s in enumerate(self.basis):
            if abs(s.l - ls.l) == 1:
                out[k] = self.cache.radial_integral(s, ls) * angular_factor(s.l, ls.l)
        return out

    def excitation_amplitudes(self, sb: StarkBasis, spec: ExcitationSpec) -> WavePacket:
        if spec.launch_state != self.launch_state:
            raise InternalError("excitation launch state is not the one on this system's grid")
        if sb.basis != self.basis:
            raise InternalError("Stark basis does not belong to this system")
        dip = sb.U.T @ self.launch_dipoles()
        c = dip * spec.envelope(sb.energies)
        if np.all(np.abs(c) < 1e-15):
            raise ConfigError("excitation envelope does not reach any dipole-allowed state")
        c = c / np.linalg.norm(c)
        return WavePacket(c.astype(complex), sb)


def excitation_amplitudes(sb: StarkBasis, spec: ExcitationSpec, system: StarkSystem) -> WavePacket:
    return system.excitation_amplitudes(sb, spec)


def stark_map(system: StarkSystem, fields_au, spec: ExcitationSpec | None = None):
    """Yield (F, energies, excitation probability) for each field on the grid.

    Probabilities are |<k|z|launch>|^2 g(E_k)^2, normalized to sum to one at
    each field; levels are labeled by sorted index only.
    """
    for F in fields_au:
        sb = system.stark_basis(F)
        if spec is None:
            prob = np.zeros(len(sb))
        else:
            prob = system.excitation_amplitudes(sb, spec).populations
        yield F, sb.energies, prob
