"""Linearized quantum fluctuations around a classical solution.

The fluctuation vector is

    xi = (dA_sF, dA_sF+, dA_pF, dA_pF+, dA_sB, dA_sB+, dA_pB, dA_pB+)

and second moments are carried as the literal operator products
<xi_a xi_b>, so no symmetrization is involved in transporting them.
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy.integrate import solve_ivp

from .errors import PhysicalityError, SingularBlock, StepFailure

MODES = ("sF", "pF", "sB", "pB")
_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
J = np.kron(np.eye(4), _J2)


def mode_index(name):
    return MODES.index(name)


def fluctuation_matrix(z, A, cs):
    """Coefficient matrices M(z), shape (n, 8, 8), with d xi/dz = M xi.

    ``A`` holds classical amplitudes (sF, sB, pF, pB) at the points ``z``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    A = np.asarray(A).reshape(4, -1)
    n = len(z)
    sF, sB, pF, pB = A
    Ks = 1j * cs.K_s * np.exp(-1j * cs.delta_s * z)
    Kp = 1j * cs.K_p * np.exp(-1j * cs.delta_p * z)
    KF = 4 * cs.K_nl * np.exp(1j * cs.delta_nl * z)
    KB = 4 * cs.K_nl * np.exp(-1j * cs.delta_nl * z)
    M = np.zeros((n, 8, 8), dtype=complex)
    # rows of the non-adjoint components
    M[:, 0, 4] = Ks
    M[:, 0, 1] = KF * pF
    M[:, 0, 2] = KF * np.conj(sF)
    M[:, 4, 0] = np.conj(Ks)
    M[:, 4, 5] = -KB * pB
    M[:, 4, 6] = -KB * np.conj(sB)
    M[:, 2, 6] = Kp
    M[:, 2, 0] = -np.conj(KF) * sF
    M[:, 6, 2] = np.conj(Kp)
    M[:, 6, 4] = np.conj(KB) * sB
    # adjoint rows: conjugate and swap each (a, a+) column pair
    swap = np.arange(8) ^ 1
    for r in (0, 2, 4, 6):
        M[:, r + 1, :] = np.conj(M[:, r, swap])
    return M


@dataclass
class TransferMatrices:
    T: np.ndarray
    U: np.ndarray = None

    @property
    def U_FF(self):
        return self.T[:4, :4]

    @property
    def U_FB(self):
        return self.T[:4, 4:]

    @property
    def U_BF(self):
        return self.T[4:, :4]

    @property
    def U_BB(self):
        return self.T[4:, 4:]

    def commutator_error(self):
        return commutator_error(self.U)


def fundamental_matrix(state, couplings=None, rtol=1e-11, atol=1e-13):
    """End-to-end propagator T of the fluctuation equations from z = 0 to L."""
    cs = state.couplings if couplings is None else couplings
    L = state.length
    spline = state.interpolant()

    def f(zeta, y):
        z = zeta * L
        M = fluctuation_matrix(z, spline(z), cs)[0]
        return (L * M @ y.reshape(8, 8)).ravel()

    y0 = np.eye(8, dtype=complex).ravel()
    sol = solve_ivp(f, (0.0, 1.0), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise StepFailure(sol.message)
    tm = TransferMatrices(T=sol.y[:, -1].reshape(8, 8))
    tm.U = input_output_matrix(tm.T)
    return tm


def input_output_matrix(T, max_cond=1e12):
    """Rearrange the end-to-end propagator into the physical input-output map."""
    T = np.asarray(T)
    FF, FB, BF, BB = T[:4, :4], T[:4, 4:], T[4:, :4], T[4:, 4:]
    if np.linalg.cond(BB) > max_cond:
        raise SingularBlock("backward block of the propagator is ill-conditioned")
    BBi = np.linalg.inv(BB)
    return np.block([[FF - FB @ BBi @ BF, FB @ BBi], [-BBi @ BF, BBi]])


def commutator_error(U):
    return float(np.max(np.abs(U @ J @ U.T - J)))


@dataclass(frozen=True)
class InputMode:
    r: float = 0.0
    theta: float = 0.0
    n_chaotic: float = 0.0


@dataclass(frozen=True)
class InputFieldSpec:
    """Squeezing and chaotic photons of each incident field (vacuum by default)."""

    modes: Dict[str, InputMode] = field(default_factory=dict)

    def __getitem__(self, name):
        return self.modes.get(name, InputMode())


@dataclass
class MomentSet:
    """B_j, C_j, D_jk and Dbar_jk for the modes (sF, pF, sB, pB)."""

    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Dbar: np.ndarray
    ordering: str = "normal"

    @classmethod
    def vacuum(cls, ordering="normal"):
        B = np.full(4, 1.0 if ordering == "anti-normal" else 0.0)
        return cls(B, np.zeros(4, complex), np.zeros((4, 4), complex), np.zeros((4, 4), complex), ordering)

    def normal(self):
        if self.ordering == "normal":
            return self
        return MomentSet(self.B - 1.0, self.C, self.D, self.Dbar, "normal")

    def anti_normal(self):
        if self.ordering == "anti-normal":
            return self
        return MomentSet(self.B + 1.0, self.C, self.D, self.Dbar, "anti-normal")

    def second_moments(self):
        """<xi_a xi_b> as an 8x8 matrix."""
        m = self.anti_normal()
        S = np.zeros((8, 8), dtype=complex)
        for j in range(4):
            a, ad = 2 * j, 2 * j + 1
            S[a, a] = m.C[j]
            S[ad, ad] = np.conj(m.C[j])
            S[a, ad] = m.B[j]
            S[ad, a] = m.B[j] - 1.0
            for k in range(4):
                if k == j:
                    continue
                b, bd = 2 * k, 2 * k + 1
                S[a, b] = m.D[j, k]
                S[ad, b] = -m.Dbar[j, k]
                S[a, bd] = -m.Dbar[k, j]
                S[ad, bd] = np.conj(m.D[j, k])
        return S

    @classmethod
    def from_second_moments(cls, S):
        B_A = np.array([S[2 * j, 2 * j + 1] for j in range(4)]).real
        C = np.array([S[2 * j, 2 * j] for j in range(4)])
        D = np.zeros((4, 4), complex)
        Dbar = np.zeros((4, 4), complex)
        for j in range(4):
            for k in range(4):
                if j != k:
                    D[j, k] = S[2 * j, 2 * k]
                    Dbar[j, k] = -S[2 * j + 1, 2 * k]
        return cls(B_A - 1.0, C, D, Dbar, "normal")


def input_moments(spec=None):
    """Anti-normally ordered moments of independent incident fields."""
    spec = InputFieldSpec() if spec is None else spec
    B = np.zeros(4)
    C = np.zeros(4, complex)
    for j, name in enumerate(MODES):
        m = spec[name]
        B[j] = np.cosh(m.r) ** 2 + m.n_chaotic
        C[j] = 0.5 * np.exp(1j * m.theta) * np.sinh(2 * m.r)
    return MomentSet(B, C, np.zeros((4, 4), complex), np.zeros((4, 4), complex), "anti-normal")


def propagate_moments(U, moments_in, check=True):
    """Normal-ordered output moments for the input-output map U."""
    S = np.asarray(U) @ moments_in.second_moments() @ np.asarray(U).T
    out = MomentSet.from_second_moments(S)
    if check:
        lam = [squeeze_single(out, j) for j in range(4)]
        if min(lam) <= 0:
            raise PhysicalityError(f"non-positive principal squeeze variance {min(lam):.3g}")
    return out


def _idx(j):
    return mode_index(j) if isinstance(j, str) else j


def squeeze_single(moments, j):
    """Principal squeeze variance of one mode (1 for vacuum)."""
    m = moments.normal()
    j = _idx(j)
    return float(1 + 2 * (m.B[j] - abs(m.C[j])))


def squeeze_compound(moments, j, k):
    """Principal squeeze variance of the compound mode of j and k (2 for two vacua)."""
    m = moments.normal()
    j, k = _idx(j), _idx(k)
    return float(2 * (1 + m.B[j] + m.B[k] - 2 * m.Dbar[j, k].real
                      - abs(m.C[j] + m.C[k] + 2 * m.D[j, k])))
