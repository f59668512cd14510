"""Build the whole simulation chain from a RunConfig."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .config import RunConfig
from .dynamics import Carpet, SSFIBins, carpet, l_composition
from .kick import KickOperator, ZSpectrum, build_kick
from .radial import RadialGrid
from .stark import StarkBasis, StarkSystem, WavePacket
from .units import vcm_to_au


@dataclass
class Simulation:
    """Lazily built objects for one configuration; each is computed once."""

    config: RunConfig

    @cached_property
    def defects(self):
        return self.config.defect_table()

    @cached_property
    def system(self) -> StarkSystem:
        c = self.config
        launch = c.launch_state()
        grid = RadialGrid(max(c.n_max, launch.n), step=c.grid_step)
        return StarkSystem(self.defects, c.n_min, c.n_max, launch, grid)

    @cached_property
    def z_spectrum(self) -> ZSpectrum:
        return ZSpectrum.of(self.system.Z)

    @cached_property
    def stark_basis(self) -> StarkBasis:
        return self.system.stark_basis(vcm_to_au(self.config.field_vcm))

    @cached_property
    def packet(self) -> WavePacket:
        return self.system.excitation_amplitudes(self.stark_basis, self.config.excitation())

    @cached_property
    def kick(self) -> KickOperator:
        return build_kick(self.stark_basis, self.z_spectrum, self.config.impulse())

    @cached_property
    def bins(self) -> SSFIBins:
        c = self.config
        return SSFIBins.for_n_star(c.bin_n_low, c.bin_n_high, c.bins, c.smear)

    def carpet(self, workers: int = 1) -> Carpet:
        c = self.config
        meta = {
            "field_vcm": c.field_vcm,
            "q_au": self.kick.Q,
            "basis": [c.n_min, c.n_max],
            "config_sha256": c.digest(),
        }
        return carpet(self.packet, self.kick, c.delays(), self.bins, workers, meta)

    def l_composition(self, manifold: int | None = None):
        mask = None
        if manifold is not None:
            mask = self.stark_basis.manifold(self.defects) == manifold
        return l_composition(self.packet, self.config.delays(), mask)
