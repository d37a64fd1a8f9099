"""Phase-wise material constants and level-set blended nodal fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhaseProperties:
    rho: float      # kg/m^3
    cp: float       # J/(kg K)
    kappa: float    # W/(m K)
    mu: float       # kg/(m s)


@dataclass(frozen=True)
class MaterialPair:
    """Liquid (phase 1) and solid (phase 2) constants plus shared
    latent heat h_m and melting temperature T_m."""
    liquid: PhaseProperties
    solid: PhaseProperties
    h_m: float      # J/kg
    t_m: float      # K

    def __post_init__(self):
        for ph in (self.liquid, self.solid):
            if min(ph.rho, ph.cp, ph.kappa, ph.mu) <= 0:
                raise ValueError("phase properties must be positive")
        if self.h_m <= 0:
            raise ValueError("latent heat must be positive")


@dataclass
class MaterialField:
    """Per-node properties blended across the interface."""
    rho: np.ndarray
    mu: np.ndarray
    cp: np.ndarray
    kappa: np.ndarray


def blend_materials(pair, levelset):
    """Nodal property fields p1 + (p2 - p1) * H_eps(phi)."""
    from .levelset import smoothed_heaviside

    H = smoothed_heaviside(levelset.phi, levelset.epsilon)
    l, s = pair.liquid, pair.solid
    return MaterialField(
        rho=l.rho + (s.rho - l.rho) * H,
        mu=l.mu + (s.mu - l.mu) * H,
        cp=l.cp + (s.cp - l.cp) * H,
        kappa=l.kappa + (s.kappa - l.kappa) * H,
    )
