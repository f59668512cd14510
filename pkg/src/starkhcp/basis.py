"""Field-free |n, l, m=0> basis, quantum-defect energies, and atom presets."""

from __future__ import annotations

import configparser
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigError, DomainError

L_LABELS = "spdfghiklmnoqrtuv"


def l_label(l: int) -> str:
    return L_LABELS[l] if l < len(L_LABELS) else f"l{l}"


def parse_l(label: str) -> int:
    label = label.strip().lower()
    if label.isdigit():
        return int(label)
    if label.startswith("l") and label[1:].isdigit():
        return int(label[1:])
    if len(label) == 1 and label in L_LABELS:
        return L_LABELS.index(label)
    raise ConfigError(f"unrecognized angular momentum label {label!r}")


@dataclass(frozen=True, order=True)
class BasisState:
    n: int
    l: int
    m: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.l < self.n:
            raise ConfigError(f"l must satisfy 0 <= l < n, got n={self.n}, l={self.l}")
        if self.m != 0:
            raise ConfigError("only m = 0 states are supported")

    def __str__(self):
        return f"{self.n}{l_label(self.l)}"


@dataclass(frozen=True)
class QuantumDefectTable:
    """Quantum defects by orbital angular momentum.

    ``core_polarizability`` (a.u.) only sets the inner radius below which
    radial wavefunctions are discarded; it does not enter the energies.
    """

    defects: Mapping[int, float] = field(default_factory=dict)
    core_polarizability: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        clean = {int(l): float(d) for l, d in self.defects.items() if float(d) != 0.0}
        for l, d in clean.items():
            if l < 0 or d < 0:
                raise ConfigError(f"invalid quantum defect {d} for l={l}")
        object.__setattr__(self, "defects", dict(sorted(clean.items())))
        values = [clean.get(l, 0.0) for l in range(1, self.l_cutoff + 1)]
        if any(b > a for a, b in zip(values, values[1:])):
            warnings.warn(
                f"quantum defects of {self.name!r} increase with l beyond s",
                stacklevel=3,
            )

    @property
    def l_cutoff(self) -> int:
        """Largest l with a nonzero defect (-1 for hydrogen)."""
        return max(self.defects, default=-1)

    def __getitem__(self, l: int) -> float:
        return self.defects.get(l, 0.0)

    def n_eff(self, n: int, l: int) -> float:
        return n - self[l]

    @property
    def core_radius(self) -> float:
        return self.core_polarizability ** (1.0 / 3.0) if self.core_polarizability > 0 else 0.0

    def as_config(self) -> dict:
        return {
            "name": self.name,
            "core_polarizability": self.core_polarizability,
            "defects": {l_label(l): d for l, d in self.defects.items()},
        }


HYDROGEN = QuantumDefectTable({}, 0.0, "hydrogen")


def load_defects(path: str | Path) -> QuantumDefectTable:
    """Read a ``[defects]`` table (and optional ``[atom]`` section) from an INI file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    return defects_from_parser(parser, default_name=Path(path).stem)


def defects_from_parser(parser: configparser.ConfigParser, default_name="custom"):
    if not parser.has_section("defects"):
        raise ConfigError("config has no [defects] section")
    try:
        table = {parse_l(k): float(v) for k, v in parser.items("defects")}
        atom = parser["atom"] if parser.has_section("atom") else {}
        alpha = float(atom.get("core_polarizability", 0.0))
    except ValueError as exc:
        raise ConfigError(f"bad quantum defect entry: {exc}") from None
    return QuantumDefectTable(table, alpha, atom.get("name", default_name))


def preset(name: str) -> QuantumDefectTable:
    """Named defect table: ``hydrogen`` is built in, others are shipped INI files."""
    if name == "hydrogen":
        return HYDROGEN
    ref = resources.files("starkhcp.presets") / f"{name}.ini"
    if not ref.is_file():
        raise ConfigError(f"unknown defect preset {name!r}")
    with resources.as_file(ref) as path:
        return load_defects(path)


def basis_size(n_min: int, n_max: int) -> int:
    return (n_max + n_min) * (n_max - n_min + 1) // 2


def enumerate_basis(n_min: int, n_max: int) -> list[BasisState]:
    """All (n, l, 0) with n_min <= n <= n_max, ordered by n then l."""
    if not (isinstance(n_min, (int, np.integer)) and isinstance(n_max, (int, np.integer))):
        raise ConfigError("basis bounds must be integers")
    if not 1 <= n_min <= n_max:
        raise ConfigError(f"invalid basis range {n_min}..{n_max}")
    return [BasisState(n, l) for n in range(n_min, n_max + 1) for l in range(n)]


def basis_index(n_min: int, state: BasisState) -> int:
    """Position of ``state`` in ``enumerate_basis(n_min, ...)``."""
    return basis_size(n_min, state.n - 1) + state.l if state.n > n_min else state.l


def energy(state: BasisState, defects: QuantumDefectTable) -> float:
    """Quantum-defect energy -1 / (2 (n - delta_l)^2) in atomic units."""
    if state.m != 0:
        raise ConfigError("only m = 0 states are supported")
    n_star = state.n - defects[state.l]
    if n_star <= 0:
        raise DomainError(f"{state}: n = {state.n} does not exceed its defect {defects[state.l]}")
    return -0.5 / n_star**2


def energies(states, defects: QuantumDefectTable) -> np.ndarray:
    return np.array([energy(s, defects) for s in states])
