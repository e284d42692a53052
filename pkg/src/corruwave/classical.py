"""Classical envelopes of the four counter-propagating fields.

Amplitudes are ordered (A_sF, A_sB, A_pF, A_pB) and normalized so that
|A|^2 is a photon number.  Forward fields are fixed at z = 0, backward
fields at z = L.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.constants import hbar
from scipy.sparse.linalg import spsolve

from .errors import BandGapWarning, NoConvergence
from .modes import CouplingSet

SF, SB, PF, PB = range(4)
NAMES = ("sF", "sB", "pF", "pB")


def power_to_amplitude(power, mode, length):
    """Photon amplitude |A| carried by an incident power (W)."""
    if np.any(np.asarray(power) < 0):
        raise ValueError("power must be non-negative")
    return np.sqrt(power * length * mode.beta / (hbar * mode.omega**2))


def amplitude_to_power(photons, mode, length):
    """Outgoing power (W) of a field holding ``photons`` photons in the guide."""
    return hbar * mode.omega**2 / (mode.beta * length) * photons


@dataclass(frozen=True)
class BoundaryConditions:
    sF_in: complex = 0j
    pF_in: complex = 0j
    sB_in: complex = 0j  # at z = L
    pB_in: complex = 0j  # at z = L

    @classmethod
    def from_powers(cls, mode_p, mode_s, length, P_pF=0.0, P_sF=0.0, P_pB=0.0, P_sB=0.0,
                    phase_pF=0.0, phase_sF=0.0, phase_pB=0.0, phase_sB=0.0):
        amp = lambda P, m, ph: power_to_amplitude(P, m, length) * np.exp(1j * ph)
        return cls(sF_in=amp(P_sF, mode_s, phase_sF), pF_in=amp(P_pF, mode_p, phase_pF),
                   sB_in=amp(P_sB, mode_s, phase_sB), pB_in=amp(P_pB, mode_p, phase_pB))


@dataclass
class FieldState:
    z: np.ndarray  # m
    A: np.ndarray  # (4, N) complex
    couplings: CouplingSet
    length: float
    band_gap: dict = field(default_factory=dict)
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0

    def __getitem__(self, name):
        return self.A[NAMES.index(name)]

    @property
    def photons(self):
        return np.abs(self.A) ** 2

    def outgoing(self):
        """Amplitudes leaving the guide: forward at z = L, backward at z = 0."""
        return {"sF": self.A[SF, -1], "pF": self.A[PF, -1], "sB": self.A[SB, 0], "pB": self.A[PB, 0]}

    def interpolant(self):
        from scipy.interpolate import CubicSpline
        return CubicSpline(self.z, self.A, axis=1)


def rhs(z, A, cs):
    """Right-hand side of the envelope equations at position(s) z (SI)."""
    z = np.asarray(z, dtype=float)
    es = np.exp(-1j * cs.delta_s * z)
    ep = np.exp(-1j * cs.delta_p * z)
    en = np.exp(1j * cs.delta_nl * z)
    K, Ks, Kp = cs.K_nl, cs.K_s, cs.K_p
    sF, sB, pF, pB = A
    return np.array([
        1j * Ks * es * sB + 4 * K * en * pF * np.conj(sF),
        -1j * np.conj(Ks) * np.conj(es) * sF - 4 * K * np.conj(en) * pB * np.conj(sB),
        1j * Kp * ep * pB - 2 * np.conj(K) * np.conj(en) * sF**2,
        -1j * np.conj(Kp) * np.conj(ep) * pF + 2 * np.conj(K) * en * sB**2,
    ])


def _jacobians(z, A, cs):
    """d rhs / dA and d rhs / dA* at each z; shapes (n, 4, 4)."""
    n = len(z)
    es = np.exp(-1j * cs.delta_s * z)
    ep = np.exp(-1j * cs.delta_p * z)
    en = np.exp(1j * cs.delta_nl * z)
    K, Ks, Kp = cs.K_nl, cs.K_s, cs.K_p
    sF, sB, pF, pB = A
    J = np.zeros((n, 4, 4), dtype=complex)
    Jc = np.zeros((n, 4, 4), dtype=complex)
    J[:, SF, SB] = 1j * Ks * es
    J[:, SF, PF] = 4 * K * en * np.conj(sF)
    Jc[:, SF, SF] = 4 * K * en * pF
    J[:, SB, SF] = -1j * np.conj(Ks) * np.conj(es)
    J[:, SB, PB] = -4 * K * np.conj(en) * np.conj(sB)
    Jc[:, SB, SB] = -4 * K * np.conj(en) * pB
    J[:, PF, PB] = 1j * Kp * ep
    J[:, PF, SF] = -4 * np.conj(K) * np.conj(en) * sF
    J[:, PB, PF] = -1j * np.conj(Kp) * np.conj(ep)
    J[:, PB, SB] = 4 * np.conj(K) * en * sB
    return J, Jc


def band_gap_flags(cs):
    """True for a field whose linear coupling opens a gap (|delta/2| < |K|)."""
    return {"s": bool(cs.K_s != 0 and abs(cs.delta_s) / 2 < abs(cs.K_s)),
            "p": bool(cs.K_p != 0 and abs(cs.delta_p) / 2 < abs(cs.K_p))}


def _transfer(delta, K, z):
    """Propagator of (f, g) with A_F = exp(-i delta z/2) f, A_B = exp(i delta z/2) g."""
    Delta = np.sqrt(complex(delta**2 / 4 - abs(K) ** 2))
    cz = np.cos(Delta * z)
    sz = z * np.sinc(Delta * z / np.pi)  # sin(Delta z)/Delta
    M = np.array([[0.5j * delta, 1j * K], [-1j * np.conj(K), -0.5j * delta]])
    return cz[..., None, None] * np.eye(2) + sz[..., None, None] * M, Delta


def linear_coefficients(delta, K, length, A_F0, A_BL):
    """Seeds of the analytic linear solution.

    Returns (B, B_tilde, A_B0, Delta) where A_F(z) = exp(-i delta z/2) [B cos + B_tilde sin].
    B_tilde is nan when Delta = 0.
    """
    Phi, Delta = _transfer(delta, K, np.array(length, dtype=float))
    gL = np.exp(-0.5j * delta * length) * A_BL
    g0 = (gL - Phi[1, 0] * A_F0) / Phi[1, 1]
    if K == 0:
        return A_F0, g0, g0, Delta
    fprime = 0.5j * delta * A_F0 + 1j * K * g0
    B_tilde = fprime / Delta if Delta != 0 else np.nan
    return A_F0, B_tilde, g0, Delta


def linear_solution(couplings, boundary, z, length=None):
    """Analytic solution of the envelope equations without the nonlinear terms."""
    z = np.asarray(z, dtype=float)
    L = z[-1] if length is None else length
    A = np.zeros((4, len(z)), dtype=complex)
    pairs = (("s", SF, SB, couplings.delta_s, couplings.K_s, boundary.sF_in, boundary.sB_in),
             ("p", PF, PB, couplings.delta_p, couplings.K_p, boundary.pF_in, boundary.pB_in))
    for _, iF, iB, delta, K, f0, bL in pairs:
        if K == 0:
            A[iF] = f0
            A[iB] = bL
            continue
        # scattering form of the segments [0, z] and [z, L]: only bounded
        # ratios appear, so the band-gap regime keeps full relative accuracy
        P, _ = _transfer(delta, K, z)
        Q, _ = _transfer(delta, K, L - z)
        gL = np.exp(-0.5j * delta * L) * bL
        a, b = f0 / P[:, 1, 1], P[:, 0, 1] / P[:, 1, 1]
        cc, d = -Q[:, 1, 0] / Q[:, 1, 1], gL / Q[:, 1, 1]
        f = (a + b * d) / (1 - b * cc)
        g = cc * f + d
        A[iF] = np.exp(-0.5j * delta * z) * f
        A[iB] = np.exp(0.5j * delta * z) * g
    return FieldState(z=z, A=A, couplings=couplings, length=L, band_gap=band_gap_flags(couplings))


def _residual(z, A, cs, bc):
    h = np.diff(z)
    zm = 0.5 * (z[1:] + z[:-1])
    Am = 0.5 * (A[:, 1:] + A[:, :-1])
    R = A[:, 1:] - A[:, :-1] - h * rhs(zm, Am, cs)
    r0 = np.array([A[SF, 0] - bc.sF_in, A[PF, 0] - bc.pF_in])
    rL = np.array([A[SB, -1] - bc.sB_in, A[PB, -1] - bc.pB_in])
    return np.concatenate([
        np.concatenate([r0.real, r0.imag])[[0, 2, 1, 3]],
        np.concatenate([R.real.T, R.imag.T], axis=1).ravel(),
        np.concatenate([rL.real, rL.imag])[[0, 2, 1, 3]],
    ])


def _jacobian_matrix(z, A, cs):
    n = len(z)
    h = np.diff(z)[:, None, None]
    zm = 0.5 * (z[1:] + z[:-1])
    Am = 0.5 * (A[:, 1:] + A[:, :-1])
    J, Jc = _jacobians(zm, Am, cs)
    eye = np.eye(4)
    blocks = np.zeros((n - 1, 8, 16))
    for off, P in ((0, -eye - 0.5 * h * J), (8, eye - 0.5 * h * J)):
        Q = -0.5 * h * Jc
        dx, dy = P + Q, 1j * (P - Q)
        blocks[:, :4, off:off + 4] = dx.real
        blocks[:, :4, off + 4:off + 8] = dy.real
        blocks[:, 4:, off:off + 4] = dx.imag
        blocks[:, 4:, off + 4:off + 8] = dy.imag
    j = np.arange(n - 1)[:, None, None]
    rows = np.broadcast_to(4 + 8 * j + np.arange(8)[None, :, None], blocks.shape)
    cols = np.broadcast_to(8 * j + np.arange(16)[None, None, :], blocks.shape)
    base = 8 * (n - 1)
    bc_rows = np.array([0, 1, 2, 3, 8 * n - 4, 8 * n - 3, 8 * n - 2, 8 * n - 1])
    bc_cols = np.array([SF, 4 + SF, PF, 4 + PF, base + SB, base + 4 + SB, base + PB, base + 4 + PB])
    data = np.concatenate([blocks.ravel(), np.ones(8)])
    rows = np.concatenate([rows.ravel(), bc_rows])
    cols = np.concatenate([cols.ravel(), bc_cols])
    return sp.csc_matrix((data, (rows, cols)), shape=(8 * n, 8 * n))


def _newton(z, A, cs, bc, tol, max_iter):
    res = _residual(z, A, cs, bc)
    rnorm = np.max(np.abs(res))
    for it in range(1, max_iter + 1):
        step = spsolve(_jacobian_matrix(z, A, cs), -res).reshape(len(z), 8)
        dA = (step[:, :4] + 1j * step[:, 4:]).T
        scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
        lam = 1.0
        for _ in range(30):
            A_new = A + lam * dA
            res_new = _residual(z, A_new, cs, bc)
            r_new = np.max(np.abs(res_new))
            if r_new <= rnorm or lam < 1e-6:
                break
            lam *= 0.5
        A, res, rnorm = A_new, res_new, r_new
        if lam * np.max(np.abs(dA)) <= tol * scale:
            return A, it, rnorm, True
    return A, max_iter, rnorm, False


def solve_bvp(couplings, boundary, length, n=2001, tol=1e-10, max_iter=50, initial=None,
              continuation=True):
    """Solve the nonlinear two-point problem by damped Newton relaxation.

    The implicit-midpoint discretization conserves the photon-flux
    invariant exactly, so the conservation residual of a converged
    solution only reflects the Newton tolerance.
    """
    z = np.linspace(0.0, length, n)
    flags = band_gap_flags(couplings)
    if any(flags.values()):
        warnings.warn(f"linear seed in band-gap regime: {flags}", BandGapWarning, stacklevel=2)
    A0 = linear_solution(couplings, boundary, z, length).A if initial is None else np.array(initial, dtype=complex)
    A, it, rnorm, ok = _newton(z, A0, couplings, boundary, tol, max_iter)
    total = it
    if not ok and continuation:
        # homotopy in the nonlinear coupling, seeded from the linear solution
        A = linear_solution(couplings, boundary, z, length).A
        ok = True
        for s in np.linspace(0.1, 1.0, 10):
            cs = couplings.replace(K_nl0=couplings.K_nl0 * s)
            A, it, rnorm, ok = _newton(z, A, cs, boundary, tol, max_iter)
            total += it
            if not ok:
                break
    state = FieldState(z=z, A=A, couplings=couplings, length=length, band_gap=flags,
                       iterations=total, converged=ok, residual=rnorm)
    if not ok:
        raise NoConvergence(f"Newton relaxation did not converge (residual {rnorm:.3g})",
                            state=state, residual=rnorm)
    return state


def flux_invariant(A):
    return np.abs(A[SF]) ** 2 + 2 * np.abs(A[PF]) ** 2 - np.abs(A[SB]) ** 2 - 2 * np.abs(A[PB]) ** 2


def conservation_residual(state):
    """Max drift of |A_sF|^2 + 2|A_pF|^2 - |A_sB|^2 - 2|A_pB|^2 along z.

    The drift is referred to the largest total photon flux (all terms with
    plus signs); |Q(0)| alone vanishes for totally reflecting guides.
    """
    A = state.A if isinstance(state, FieldState) else np.asarray(state)
    Q = flux_invariant(A)
    total = np.abs(A[SF]) ** 2 + 2 * np.abs(A[PF]) ** 2 + np.abs(A[SB]) ** 2 + 2 * np.abs(A[PB]) ** 2
    scale = max(np.max(total), np.finfo(float).tiny)
    return float(np.max(np.abs(Q - Q[0])) / scale)


def photon_flux_derivatives(state, couplings=None, split=False):
    """dN/dz of each field from the photon-number equations (rows sF, sB, pF, pB).

    With ``split=True`` returns (linear, nonlinear) contributions separately.
    """
    cs = state.couplings if couplings is None else couplings
    z = state.z
    sF, sB, pF, pB = state.A
    X = cs.K_s * np.exp(-1j * cs.delta_s * z) * np.conj(sF) * sB
    Y = cs.K_p * np.exp(-1j * cs.delta_p * z) * np.conj(pF) * pB
    RF = np.real(cs.K_nl * np.exp(1j * cs.delta_nl * z) * np.conj(sF) ** 2 * pF)
    RB = np.real(cs.K_nl * np.exp(-1j * cs.delta_nl * z) * np.conj(sB) ** 2 * pB)
    lin = np.array([-2 * X.imag, -2 * X.imag, -2 * Y.imag, -2 * Y.imag])
    nl = np.array([8 * RF, -8 * RB, -4 * RF, 4 * RB])
    return (lin, nl) if split else lin + nl


@dataclass(frozen=True)
class DimensionlessView:
    """Quantities rescaled by the guide length L."""

    K_p: complex = 0j
    K_s: complex = 0j
    K_nl0: complex = 0j
    delta_p: float = 0.0
    delta_s: float = 0.0
    delta_nl: float = 0.0
    q: int = 1
    z: Optional[np.ndarray] = None
    beta_p: Optional[float] = None
    beta_s: Optional[float] = None
    corrugation_period: Optional[float] = None
    poling_period: Optional[float] = None


def to_dimensionless(couplings, length, z=None, beta_p=None, beta_s=None,
                     corrugation_period=None, poling_period=None):
    L = length
    opt = lambda v, f: None if v is None else f(v)
    return DimensionlessView(
        K_p=couplings.K_p * L, K_s=couplings.K_s * L, K_nl0=couplings.K_nl0 * L,
        delta_p=couplings.delta_p * L, delta_s=couplings.delta_s * L,
        delta_nl=couplings.delta_nl * L, q=couplings.q,
        z=opt(z, lambda v: np.asarray(v) / L), beta_p=opt(beta_p, lambda v: v * L),
        beta_s=opt(beta_s, lambda v: v * L),
        corrugation_period=opt(corrugation_period, lambda v: v / L),
        poling_period=opt(poling_period, lambda v: v / L))


def from_dimensionless(view, length):
    L = length
    return CouplingSet(K_p=view.K_p / L, K_s=view.K_s / L, K_nl0=view.K_nl0 / L,
                       delta_p=view.delta_p / L, delta_s=view.delta_s / L,
                       delta_nl=view.delta_nl / L, q=view.q)
