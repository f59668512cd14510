"""Unit conversions between atomic units and laboratory units.

All internal quantities are atomic units (e = m_e = hbar = 1).  The
laboratory units used on the command line and in output files are V/cm,
kV/cm, ps, fs and cm^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class UnitConstants:
    field_vcm_per_au: float = 5.14220674e9
    time_au_per_ps: float = 4.134137e4
    energy_cm1_per_au: float = 219474.63

    @property
    def field_au_per_vcm(self) -> float:
        return 1.0 / self.field_vcm_per_au


CONSTANTS = UnitConstants()

# factor that takes a value in the unit to atomic units, grouped by dimension
_TO_AU = {
    "au": (None, 1.0),
    "V/cm": ("field", 1.0 / CONSTANTS.field_vcm_per_au),
    "kV/cm": ("field", 1.0e3 / CONSTANTS.field_vcm_per_au),
    "ps": ("time", CONSTANTS.time_au_per_ps),
    "fs": ("time", 1.0e-3 * CONSTANTS.time_au_per_ps),
    "cm-1": ("energy", 1.0 / CONSTANTS.energy_cm1_per_au),
}

_ALIASES = {"a.u.": "au", "cm^-1": "cm-1", "cm⁻¹": "cm-1", "1/cm": "cm-1"}


def _lookup(unit: str):
    unit = _ALIASES.get(unit, unit)
    try:
        return _TO_AU[unit]
    except KeyError:
        raise ConfigError(f"unknown unit {unit!r}") from None


def convert(value, from_unit: str, to_unit: str):
    """Linear conversion of ``value`` (scalar or array) between units.

    Atomic units ("au") are compatible with every dimension; any other pair
    must share a dimension.
    """
    dim_a, fa = _lookup(from_unit)
    dim_b, fb = _lookup(to_unit)
    if dim_a is not None and dim_b is not None and dim_a != dim_b:
        raise ConfigError(f"cannot convert {from_unit} to {to_unit}")
    return value * (fa / fb)


def vcm_to_au(field):
    return convert(field, "V/cm", "au")


def au_to_vcm(field):
    return convert(field, "au", "V/cm")


def ps_to_au(t):
    return convert(t, "ps", "au")


def au_to_cm1(energy):
    return convert(energy, "au", "cm-1")


def cm1_to_au(energy):
    return convert(energy, "cm-1", "au")


def beat_ps_to_cm1(freq_cycles_per_ps):
    """Beat frequency in cycles/ps to the equivalent energy splitting in cm^-1."""
    omega_au = 2.0 * math.pi * freq_cycles_per_ps / CONSTANTS.time_au_per_ps
    return omega_au * CONSTANTS.energy_cm1_per_au
