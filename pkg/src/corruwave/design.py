"""Phase-matching and transmission-peak design of the corrugation, plus the optimum search."""

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .classical import linear_coefficients
from .errors import DegenerateMismatch, DomainError, InfeasibleBranch
from .modes import linear_coupling, poling_period_for

PUMP = "pump"
SUBHARMONIC = "subharmonic"


def detuning(delta, K):
    """Delta_a = sqrt(delta_a^2/4 - |K_a|^2); imaginary inside the band gap."""
    return np.sqrt(complex(delta**2 / 4 - abs(K) ** 2))


def resonance_residuals(delta_nl, delta_s, delta_p, K_s, K_p):
    """The eight phase-matching residuals delta_nl + delta_s - delta_p/2 -+ D_s -+ D_s +- D_p.

    Ordered over (sign of first D_s, sign of second D_s, sign of D_p) in
    itertools.product((+1, -1), repeat=3) order.  Real unless a field sits in
    its band gap.
    """
    Ds, Dp = detuning(delta_s, K_s), detuning(delta_p, K_p)
    res = np.array([delta_nl + delta_s - delta_p / 2 - a * Ds - b * Ds + c * Dp
                    for a, b, c in itertools.product((1, -1), repeat=3)])
    return res.real if np.all(res.imag == 0) else res


def _nonzero(delta_nl):
    if delta_nl == 0:
        raise DegenerateMismatch("perfectly phase-matched poling needs no corrugation matching")


def pump_corrugation_match(delta_nl, K_p, beta_p=None):
    """(delta_p, Lambda_l) matching a pump corrugation to the nonlinear mismatch."""
    _nonzero(delta_nl)
    K2 = abs(K_p) ** 2
    delta_p = delta_nl + K2 / delta_nl
    period = None if beta_p is None else np.pi / (beta_p - delta_nl / 2 - K2 / (2 * delta_nl))
    return delta_p, period


def subharmonic_corrugation_match(delta_nl, K_s, beta_s=None):
    """(delta_s, Lambda_l) for a corrugation acting on the subharmonic field."""
    _nonzero(delta_nl)
    K2 = abs(K_s) ** 2
    delta_s = -delta_nl / 2 - 2 * K2 / delta_nl
    period = None if beta_s is None else np.pi / (beta_s + delta_nl / 4 + K2 / delta_nl)
    return delta_s, period


def corrugation_period(beta, delta):
    """Corrugation period giving the linear mismatch delta = 2 beta - 2 pi / Lambda."""
    return 2 * np.pi / (2 * beta - delta)


def transmission_peak(K, length, m=1, sign=1, beta=None):
    """Linear mismatch (and period) that puts a field in its m-th transmission peak."""
    if m < 1 or int(m) != m:
        raise DomainError("transmission order m must be a positive integer")
    root = np.sqrt((m * np.pi / length) ** 2 + abs(K) ** 2)
    delta = 2 * np.sign(sign) * root
    period = None if beta is None else np.pi / (beta - np.sign(sign) * root)
    return delta, period


def combined_pump_condition(delta_nl, length, m=1, sign=1):
    """|K_p| meeting both the pump matching and the transmission-peak conditions."""
    x = abs(delta_nl)
    rad = x**2 * (1 + np.sign(sign) * 2 * m * np.pi / (x * length)) if x else 0.0
    if rad < 0:
        raise InfeasibleBranch("negative radicand for the chosen sign")
    return float(np.sqrt(rad))


def combined_subharmonic_condition(delta_nl, length, m=1, sign=1):
    x = abs(delta_nl)
    rad = x**2 / 4 * (1 + np.sign(sign) * 4 * m * np.pi / (x * length)) if x else 0.0
    if rad < 0:
        raise InfeasibleBranch("negative radicand for the chosen sign")
    return float(np.sqrt(rad))


def pump_mismatch_for_coupling(K_p, length, m=1, sign=1):
    """|delta_nl| solving the combined pump condition for a given |K_p|."""
    a = m * np.pi / length
    return float(-np.sign(sign) * a + np.sqrt(a**2 + abs(K_p) ** 2))


def subharmonic_mismatch_for_coupling(K_s, length, m=1, sign=1):
    a = 2 * m * np.pi / length
    return float(-np.sign(sign) * a + np.sqrt(a**2 + 4 * abs(K_s) ** 2))


def enhancement_factor(K, length, m=1):
    """Amplitude enhancement of a field sitting in its m-th transmission peak."""
    if m < 1:
        raise DomainError("m must be >= 1")
    a = m * np.pi / length
    return 0.5 + 0.5 * np.sqrt((abs(K) ** 2 + a**2) / a**2)


def forward_coefficients(delta, K, length, A_F0=1.0, A_BL=0.0):
    """Coefficients (B+, B-) of exp(+-i Delta z) in the forward linear solution.

    Delta takes the sign of delta, so B+ is the coefficient that grows with
    the corrugation strength.
    """
    B, B_tilde, _, Delta = linear_coefficients(delta, K, length, A_F0, A_BL)
    if delta < 0:
        B_tilde = -B_tilde
    return (B - 1j * B_tilde) / 2, (B + 1j * B_tilde) / 2


def improvement_db(lam, lam_ref):
    """Squeezing improvement (dB) of ``lam`` over the reference ``lam_ref``."""
    if lam <= 0 or lam_ref <= 0:
        raise DomainError("principal squeeze variances must be positive")
    return -10 * np.log10(lam / lam_ref)


@dataclass
class DesignPoint:
    field_with_corrugation: str
    transmission_order: int
    sign_branch: int
    K: float  # |K| of the corrugated field, 1/m
    delta: float  # its linear mismatch, 1/m
    delta_nl: float
    corrugation_period: Optional[float] = None
    poling_period: Optional[float] = None
    enhancement: float = np.nan
    lambda_sF: float = np.nan
    lambda_sF_analytic: float = np.nan
    result: object = field(default=None, repr=False)
    evaluations: int = 0

    def couplings(self, base):
        """CouplingSet with this corrugation on top of ``base`` (keeps K_nl and q)."""
        if self.field_with_corrugation == PUMP:
            return base.replace(K_p=1j * self.K, delta_p=self.delta, K_s=0j, delta_s=0.0,
                                delta_nl=self.delta_nl)
        return base.replace(K_s=1j * self.K, delta_s=self.delta, K_p=0j, delta_p=0.0,
                            delta_nl=self.delta_nl)


def analytic_design(length, K=None, delta_nl=None, placement=PUMP, m=1, sign=1, delta_sign=-1):
    """Steps 1-3: corrugation matched to the m-th transmission peak and to delta_nl.

    Give either the corrugation strength ``K`` (|K| in 1/m) or the target
    ``delta_nl``; the other follows from the combined condition.  For a pump
    corrugation ``delta_sign`` is the sign shared by delta_p and delta_nl.
    """
    if (K is None) == (delta_nl is None):
        raise ValueError("give exactly one of K and delta_nl")
    if placement == PUMP:
        if K is None:
            K = combined_pump_condition(delta_nl, length, m, sign)
        else:
            delta_nl = np.sign(delta_sign) * pump_mismatch_for_coupling(K, length, m, sign)
        delta, _ = transmission_peak(K, length, m, np.sign(delta_nl))
        M = enhancement_factor(K, length, m)
    elif placement == SUBHARMONIC:
        if K is None:
            K = combined_subharmonic_condition(delta_nl, length, m, sign)
        else:
            delta_nl = np.sign(delta_sign) * subharmonic_mismatch_for_coupling(K, length, m, sign)
        delta, _ = transmission_peak(K, length, m, -np.sign(delta_nl))
        M = enhancement_factor(K, length, m)
    else:
        raise ValueError(f"unknown placement {placement!r}")
    return DesignPoint(placement, m, sign, float(abs(K)), float(delta), float(delta_nl), enhancement=M)


def _with_periods(point, device):
    beta = device.mode_p.beta if point.field_with_corrugation == PUMP else device.mode_s.beta
    point.corrugation_period = corrugation_period(beta, point.delta)
    try:
        point.poling_period = poling_period_for(device.mode_p, device.mode_s, point.delta_nl)
    except DomainError:
        point.poling_period = None
    return point


def refine_design(point, device, base, objective=None, rel_window=0.05, max_evals=200, **run_kw):
    """Bounded simplex refinement of (delta, delta_nl) minimizing lambda_sF."""
    from .simulate import run_point

    L = device.length
    cache = {}

    def evaluate(x):
        key = tuple(np.round(x, 12))
        if key not in cache:
            p = DesignPoint(point.field_with_corrugation, point.transmission_order, point.sign_branch,
                            point.K, x[0] / L, x[1] / L)
            try:
                res = run_point(device, p.couplings(base), **run_kw)
                val = res.lambda_sF if objective is None else objective(res)
            except Exception:
                res, val = None, np.inf
            cache[key] = (val, res)
        return cache[key]

    x0 = np.array([point.delta * L, point.delta_nl * L])
    f0, r0 = evaluate(x0)
    point.lambda_sF_analytic = f0
    bounds = [tuple(sorted((v * (1 - rel_window), v * (1 + rel_window)))) for v in x0]
    sol = minimize(lambda x: evaluate(x)[0], x0, method="Nelder-Mead", bounds=bounds,
                   options={"maxfev": max_evals, "xatol": 1e-4, "fatol": 1e-6,
                            "initial_simplex": _simplex(x0, rel_window / 2)})
    best = min(cache.items(), key=lambda kv: kv[1][0])
    x_best = np.array(best[0])
    out = DesignPoint(point.field_with_corrugation, point.transmission_order, point.sign_branch,
                      point.K, x_best[0] / L, x_best[1] / L, enhancement=point.enhancement,
                      lambda_sF=best[1][0], lambda_sF_analytic=f0, result=best[1][1],
                      evaluations=len(cache))
    return _with_periods(out, device)


def _simplex(x0, frac):
    pts = [x0]
    for i in range(len(x0)):
        p = x0.copy()
        p[i] *= 1 + frac
        pts.append(p)
    return np.array(pts)


def optimize_design(device, pump_power=2.0, t_l=None, K=None, delta_nl=None, placement=PUMP,
                    m=1, sign=1, delta_sign=None, drive=None, refine=True, max_evals=200, **run_kw):
    """Optimum corrugation for squeezed-light generation.

    1. |K| from the deepest allowed corrugation ``t_l`` (or given directly,
       or implied by a target ``delta_nl``);
    2. the linear mismatch placing the field in its m-th transmission peak;
    3. delta_nl from the combined condition with the chosen sign branch;
    4. bounded simplex refinement of (delta, delta_nl) on the full
       classical + quantum model.
    With ``delta_sign=None`` both signs are tried and the better one kept.
    """
    from .simulate import Drive, run_point

    drive = Drive(P_pF=pump_power) if drive is None else drive
    if t_l is not None:
        mode = device.mode_p if placement == PUMP else device.mode_s
        K = abs(linear_coupling(mode, t_l))
    base = device.qpm_couplings()
    if delta_nl is not None:
        signs = [np.sign(delta_nl)]
    else:
        signs = [-1, 1] if delta_sign is None else [delta_sign]
    best = None
    for sgn in signs:
        if delta_nl is not None:
            p = analytic_design(device.length, delta_nl=delta_nl, placement=placement, m=m, sign=sign)
        else:
            p = analytic_design(device.length, K=K, placement=placement, m=m, sign=sign, delta_sign=sgn)
        if refine:
            p = refine_design(p, device, base, max_evals=max_evals, drive=drive, **run_kw)
        else:
            res = run_point(device, p.couplings(base), drive=drive, **run_kw)
            p.result, p.lambda_sF = res, res.lambda_sF
            p.lambda_sF_analytic = res.lambda_sF
            p = _with_periods(p, device)
        if best is None or p.lambda_sF < best.lambda_sF:
            best = p
    return best
