"""One working point end to end: classical solve, fluctuation propagator, squeezing."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classical import BoundaryConditions, amplitude_to_power, conservation_residual, solve_bvp
from .quantum import (MODES, InputFieldSpec, fundamental_matrix, input_moments, propagate_moments,
                      squeeze_compound, squeeze_single)

# defaults of the reference working point
PUMP_POWER = 2.0
SEED_POWER = 1e-10


@dataclass(frozen=True)
class Drive:
    """Incident powers (W) and phases (rad); backward fields enter at z = L."""

    P_pF: float = PUMP_POWER
    P_sF: float = SEED_POWER
    P_pB: float = 0.0
    P_sB: float = 0.0
    phase_pF: float = 0.0
    phase_sF: float = 0.0
    phase_pB: float = 0.0
    phase_sB: float = 0.0

    def boundary(self, device):
        return BoundaryConditions.from_powers(
            device.mode_p, device.mode_s, device.length,
            P_pF=self.P_pF, P_sF=self.P_sF, P_pB=self.P_pB, P_sB=self.P_sB,
            phase_pF=self.phase_pF, phase_sF=self.phase_sF,
            phase_pB=self.phase_pB, phase_sB=self.phase_sB)


SHG_DRIVE = Drive(P_pF=0.0, P_sF=2.0)


@dataclass
class PointResult:
    state: object
    transfer: object
    moments: object
    squeeze: dict
    compound: float
    photons: dict
    powers: dict
    conservation: float
    commutator: float
    band_gap: bool

    @property
    def lambda_sF(self):
        return self.squeeze["sF"]

    @property
    def lambda_pF(self):
        return self.squeeze["pF"]

    def row(self):
        out = {f"lambda_{k}": v for k, v in self.squeeze.items()}
        out["lambda_sF_pF"] = self.compound
        out.update({f"N_{k}": v for k, v in self.photons.items()})
        out.update({f"Pout_{k}": v for k, v in self.powers.items()})
        out["conservation"] = self.conservation
        out["commutator"] = self.commutator
        out["band_gap"] = int(self.band_gap)
        return out


def run_point(device, couplings, drive=Drive(), inputs: Optional[InputFieldSpec] = None,
              n=2001, tol=1e-10, max_iter=50):
    """Solve one working point.

    Photon numbers of the outgoing fields include the spontaneous part,
    N = |A|^2 + B, where B is the normal-ordered fluctuation photon number.
    """
    L = device.length
    state = solve_bvp(couplings, drive.boundary(device), L, n=n, tol=tol, max_iter=max_iter)
    tm = fundamental_matrix(state)
    moments = propagate_moments(tm.U, input_moments(inputs))
    squeeze = {name: squeeze_single(moments, name) for name in MODES}
    out = state.outgoing()
    photons = {name: float(abs(out[name]) ** 2 + moments.B[j]) for j, name in enumerate(MODES)}
    mode_of = {"s": device.mode_s, "p": device.mode_p}
    powers = {name: float(amplitude_to_power(photons[name], mode_of[name[0]], L)) for name in MODES}
    return PointResult(state=state, transfer=tm, moments=moments, squeeze=squeeze,
                       compound=squeeze_compound(moments, "sF", "pF"), photons=photons,
                       powers=powers, conservation=conservation_residual(state),
                       commutator=tm.commutator_error(), band_gap=any(state.band_gap.values()))
