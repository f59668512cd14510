"""Run configuration: INI files, flag overrides, and the JSON copy in CSV headers."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .basis import BasisState, QuantumDefectTable, parse_l, preset
from .errors import ConfigError
from .kick import impulse_from_pulse
from .stark import ExcitationSpec

# INI section holding each field; anything else is rejected
SECTIONS = {
    "atom": ("atom", "core_polarizability"),
    "basis": ("n_min", "n_max", "grid_step"),
    "field": ("field_vcm",),
    "excitation": ("launch", "center_n", "fwhm_n_low", "fwhm_n_high"),
    "hcp": ("q_au", "hcp_peak_kvcm", "hcp_fs", "hcp_shape"),
    "delay": ("t_max_ps", "dt_ps"),
    "ssfi": ("bins", "bin_n_low", "bin_n_high", "smear"),
    "starkmap": ("f_min_vcm", "f_max_vcm", "f_steps"),
    "run": ("seed",),
}


@dataclass
class RunConfig:
    """Everything that determines a run's numbers.

    ``defects`` overrides the preset named by ``atom`` when given (l label
    to quantum defect).  Worker count and output paths are not part of the
    configuration: they never change results.
    """

    atom: str = "cesium"
    defects: dict | None = None
    core_polarizability: float | None = None
    n_min: int = 10
    n_max: int = 40
    grid_step: float = 0.01
    field_vcm: float = 160.0
    launch: str = "7s"
    center_n: float = 26.0
    fwhm_n_low: float = 24.5
    fwhm_n_high: float = 27.5
    q_au: float | None = 0.002
    hcp_peak_kvcm: float | None = None
    hcp_fs: float | None = None
    hcp_shape: str = "rect"
    t_max_ps: float = 140.0
    dt_ps: float = 0.2
    bins: int = 64
    bin_n_low: float = 22.0
    bin_n_high: float = 32.0
    smear: float = 1.0
    f_min_vcm: float = 0.0
    f_max_vcm: float = 300.0
    f_steps: int = 61
    seed: int = 0  # reserved; nothing in the model is random

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError(f"invalid basis window {self.n_min}..{self.n_max}")
        if self.field_vcm < 0:
            raise ConfigError("field_vcm must be non-negative")
        if self.t_max_ps < 0 or self.dt_ps <= 0:
            raise ConfigError("need t_max_ps >= 0 and dt_ps > 0")
        if self.bins < 1 or not 0 < self.bin_n_low < self.bin_n_high:
            raise ConfigError("invalid SSFI bin specification")
        if not 0 < self.fwhm_n_low < self.fwhm_n_high:
            raise ConfigError("excitation FWHM edges must satisfy 0 < low < high")
        if self.f_steps < 1 or self.f_max_vcm < self.f_min_vcm or self.f_min_vcm < 0:
            raise ConfigError("invalid Stark map field grid")
        pulse = (self.hcp_peak_kvcm, self.hcp_fs)
        if any(p is not None for p in pulse) and None in pulse:
            raise ConfigError("HCP pulse needs both hcp_peak_kvcm and hcp_fs")
        self.launch_state()

    # --- derived objects ---------------------------------------------------

    def defect_table(self) -> QuantumDefectTable:
        if self.defects is None:
            table = preset(self.atom)
            if self.core_polarizability is None:
                return table
            return QuantumDefectTable(table.defects, self.core_polarizability, table.name)
        try:
            d = {parse_l(str(k)): float(v) for k, v in self.defects.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad quantum defect table: {exc}") from None
        alpha = self.core_polarizability
        if alpha is None:
            # custom defects keep the named preset's core, if there is one
            try:
                alpha = preset(self.atom).core_polarizability
            except ConfigError:
                alpha = 0.0
        return QuantumDefectTable(d, alpha, self.atom)

    def launch_state(self) -> BasisState:
        s = self.launch.strip()
        try:
            return BasisState(int(s[:-1]), parse_l(s[-1]))
        except (ValueError, IndexError):
            raise ConfigError(f"bad launch state {self.launch!r}; expected e.g. '7s'") from None

    def excitation(self) -> ExcitationSpec:
        e = lambda n: -0.5 / n**2
        return ExcitationSpec(e(self.center_n), e(self.fwhm_n_high) - e(self.fwhm_n_low), self.launch_state())

    def impulse(self) -> float:
        if self.hcp_peak_kvcm is not None:
            return impulse_from_pulse(1e3 * self.hcp_peak_kvcm, self.hcp_fs, self.hcp_shape)
        if self.q_au is None:
            raise ConfigError("no impulse given: set q_au or the HCP pulse parameters")
        return float(self.q_au)

    def delays(self) -> np.ndarray:
        n = int(round(self.t_max_ps / self.dt_ps))
        # integer multiples keep the grid identical across platforms
        return np.round(np.arange(n + 1) * self.dt_ps, 12)

    def fields_vcm(self) -> np.ndarray:
        return np.linspace(self.f_min_vcm, self.f_max_vcm, self.f_steps)

    # --- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config header is not valid JSON: {exc}") from None

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _coerce(name: str, raw: str):
    ftype = {f.name: f.type for f in fields(RunConfig)}[name]
    text = raw.strip()
    if "None" in str(ftype) and text.lower() in ("", "none"):
        return None
    try:
        if "int" in str(ftype):
            return int(text)
        if "float" in str(ftype):
            return float(text)
    except ValueError:
        raise ConfigError(f"{name} = {raw!r} is not a number") from None
    return text


def load_config(path: str | Path) -> RunConfig:
    """Read an INI file; a ``[defects]`` section replaces the preset table."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        ok = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not ok:
        raise ConfigError(f"cannot read config file {path}")
    values: dict = {}
    for section in parser.sections():
        if section == "defects":
            values["defects"] = {k: float(v) for k, v in parser.items("defects")}
            continue
        allowed = SECTIONS.get(section)
        if allowed is None:
            raise ConfigError(f"unknown section [{section}] in {path}")
        for key, raw in parser.items(section):
            if key == "name" and section == "atom":
                key = "atom"
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{section}] of {path}")
            values[key] = _coerce(key, raw)
    return RunConfig.from_dict(values)
