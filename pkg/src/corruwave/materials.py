"""Dispersion of proton-exchanged LiNbO3 and its cover.

Wavelengths are in micrometres throughout this module.  The substrate
indices follow a four-term Sellmeier form

    n^2 = A + B / (lambda^2 - C) - D lambda^2

and proton exchange shifts the extraordinary index up by ``delta_n`` and
the ordinary index down by ``delta_n / 3``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

ORDINARY = "ordinary"
EXTRAORDINARY = "extraordinary"


@dataclass(frozen=True)
class Sellmeier:
    A: float
    B: float
    C: float
    D: float

    def squared(self, wavelength_um):
        lam2 = np.asarray(wavelength_um, dtype=float) ** 2
        if np.any(lam2 <= self.C):
            raise DomainError(f"wavelength at or below Sellmeier pole sqrt(C)={np.sqrt(self.C):.6g} um")
        return self.A + self.B / (lam2 - self.C) - self.D * lam2


@dataclass(frozen=True)
class MaterialModel:
    sellmeier_ordinary: Sellmeier = field(default_factory=lambda: Sellmeier(4.91300, 0.118717, 0.045932, 0.0278))
    sellmeier_extraordinary: Sellmeier = field(default_factory=lambda: Sellmeier(4.57906, 0.099318, 0.042286, 0.0224))
    proton_exchange_delta: Sellmeier = field(default_factory=lambda: Sellmeier(0.007596, 0.001129, 0.116926, -0.0003126))
    cover_index: float = 1.0

    def _coefficients(self, pol):
        if pol == ORDINARY:
            return self.sellmeier_ordinary
        if pol == EXTRAORDINARY:
            return self.sellmeier_extraordinary
        raise ValueError(f"unknown polarization {pol!r}")

    def substrate_index(self, wavelength_um, pol):
        n2 = self._coefficients(pol).squared(wavelength_um)
        if np.any(n2 <= 0):
            raise DomainError("negative Sellmeier radicand")
        return np.sqrt(n2)

    def index_shift(self, wavelength_um):
        """Proton-exchange index change delta_n (positive root)."""
        dn2 = self.proton_exchange_delta.squared(wavelength_um)
        if np.any(dn2 <= 0):
            raise DomainError("negative proton-exchange radicand")
        return np.sqrt(dn2)

    def waveguide_index(self, wavelength_um, pol):
        n = self.substrate_index(wavelength_um, pol)
        dn = self.index_shift(wavelength_um)
        if pol == ORDINARY:
            return n - dn / 3.0
        return n + dn

    def indices(self, wavelength_um):
        """All indices needed by the slab mode solver at one wavelength."""
        return {
            "n_so": float(self.substrate_index(wavelength_um, ORDINARY)),
            "n_se": float(self.substrate_index(wavelength_um, EXTRAORDINARY)),
            "n_wo": float(self.waveguide_index(wavelength_um, ORDINARY)),
            "n_we": float(self.waveguide_index(wavelength_um, EXTRAORDINARY)),
            "n_u": float(self.cover_index),
        }


LINBO3 = MaterialModel()


def substrate_index(wavelength_um, pol, material=LINBO3):
    return material.substrate_index(wavelength_um, pol)


def waveguide_index(wavelength_um, pol, material=LINBO3):
    return material.waveguide_index(wavelength_um, pol)
