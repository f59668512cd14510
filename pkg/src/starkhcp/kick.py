"""Half-cycle pulse in the impulse approximation: the unitary e^{iQz}.

The exponential is taken by spectral calculus on the truncated dipole matrix,
so the operator is unitary on the basis subspace to rounding error.  One
eigendecomposition of z serves every Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .stark import StarkBasis
from .units import CONSTANTS

MAX_IMPULSE = 0.1


@dataclass(frozen=True, eq=False)
class ZSpectrum:
    """z = V diag(values) V^T over the field-free basis."""

    values: np.ndarray
    vectors: np.ndarray

    @classmethod
    def of(cls, Z: np.ndarray) -> "ZSpectrum":
        if not np.allclose(Z, Z.T, rtol=0, atol=1e-12 * max(np.abs(Z).max(), 1.0)):
            raise ConfigError("dipole matrix is not symmetric")
        try:
            w, V = np.linalg.eigh(Z)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"z eigendecomposition failed: {exc}") from exc
        return cls(w, V)


@dataclass(frozen=True, eq=False)
class KickOperator:
    Q: float
    M: np.ndarray
    basis: StarkBasis

    @property
    def shape(self):
        return self.M.shape


def build_kick(sb: StarkBasis, z_matrix: np.ndarray | ZSpectrum, Q: float) -> KickOperator:
    """M = U^T exp(iQz) U, the kick expressed over Stark eigenstates of ``sb``."""
    if not math.isfinite(Q) or abs(Q) >= MAX_IMPULSE:
        raise ConfigError(f"impulse |Q| = {abs(Q)} a.u. outside the supported range (< {MAX_IMPULSE})")
    spec = z_matrix if isinstance(z_matrix, ZSpectrum) else ZSpectrum.of(np.asarray(z_matrix))
    if spec.vectors.shape[0] != len(sb):
        raise ConfigError("dipole matrix and Stark basis have different dimensions")
    if Q == 0.0:
        return KickOperator(0.0, np.eye(len(sb), dtype=complex), sb)
    W = sb.U.T @ spec.vectors
    M = (W * np.exp(1j * Q * spec.values)) @ W.T
    return KickOperator(float(Q), M, sb)


def impulse_from_pulse(peak_vcm: float, duration_fs: float, shape: str = "rect") -> float:
    """Impulse Q = -integral F(t) dt (a.u.) of a unipolar pulse.

    ``rect`` is a flat top of the given duration; ``halfsine`` is
    sin(pi t / duration) over the same duration.
    """
    shapes = {"rect": 1.0, "halfsine": 2.0 / math.pi}
    if shape not in shapes:
        raise ConfigError(f"unknown pulse shape {shape!r}; expected one of {sorted(shapes)}")
    if peak_vcm <= 0 or duration_fs < 0:
        raise ConfigError("pulse peak must be positive and duration non-negative")
    area = peak_vcm / CONSTANTS.field_vcm_per_au * duration_fs * 1e-3 * CONSTANTS.time_au_per_ps
    return -shapes[shape] * area
