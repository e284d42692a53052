"""TM modes of the proton-exchanged slab and the coupling constants built from them.

Coordinates: cover (air) for x > 0, guiding film for -t < x < 0, substrate
for x < -t.  The optical axis lies along x, so eps_xx is extraordinary and
eps_zz ordinary.  All mode fields are kept as piecewise sums of complex
exponentials, which makes every overlap integral exact.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.constants import c, epsilon_0, hbar
from scipy.optimize import brentq

from .errors import DomainError, MissingPeriod, NoGuidedMode, WindowNotFound
from .materials import LINBO3, MaterialModel

N_SCAN = 2000

# Nonzero second-order coefficients (m/V) in lab axes (x = crystal optic axis).
# Partners with the last two indices swapped are filled in by symmetry.
_D_PRINTED = {
    "zzz": 3.1e-12, "zyy": -3.1e-12, "yyz": -3.1e-12,
    "xyy": 5.87e-12, "xzz": 5.87e-12, "zzx": 5.87e-12, "yyx": 5.87e-12,
    "xxx": 41.05e-12,
}


def nonlinear_tensor(values=None):
    """Return d_ijk as a 3x3x3 array, symmetric in j and k."""
    values = _D_PRINTED if values is None else values
    axis = {"x": 0, "y": 1, "z": 2}
    d = np.zeros((3, 3, 3))
    for key, v in values.items():
        i, j, k = (axis[ch] for ch in key)
        d[i, j, k] = v
        d[i, k, j] = v
    return d


LINBO3_D = nonlinear_tensor()


@dataclass(frozen=True)
class WaveguideSpec:
    """Geometry of one corrugated, optionally poled, planar waveguide (SI units)."""

    thickness: float = 0.5e-6
    length: float = 1e-3
    width: float = 1e-5
    pump_wavelength: float = 0.532e-6
    corrugation_depth: Optional[float] = None
    corrugation_period: Optional[float] = None
    poling_period: Optional[float] = None
    material: MaterialModel = field(default_factory=lambda: LINBO3)

    def __post_init__(self):
        if self.thickness <= 0 or self.length <= 0 or self.width <= 0:
            raise DomainError("thickness, length and width must be positive")
        if self.corrugation_depth is not None and not 0 < self.corrugation_depth <= self.thickness:
            raise DomainError("corrugation depth must satisfy 0 < t_l <= t")

    @property
    def subharmonic_wavelength(self):
        return 2.0 * self.pump_wavelength

    @property
    def omega_p(self):
        return 2 * np.pi * c / self.pump_wavelength

    @property
    def omega_s(self):
        return self.omega_p / 2

    def with_thickness(self, t):
        return replace(self, thickness=t)


class ExpSum:
    """f(x) = sum_k coef_k * exp(kappa_k * x), with complex coef and kappa."""

    def __init__(self, coef, kappa):
        self.coef = np.atleast_1d(np.asarray(coef, dtype=complex))
        self.kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(self.coef * np.exp(np.multiply.outer(x, self.kappa)), axis=-1)

    def __mul__(self, other):
        if np.isscalar(other):
            return ExpSum(self.coef * other, self.kappa)
        coef = np.multiply.outer(self.coef, other.coef).ravel()
        kappa = np.add.outer(self.kappa, other.kappa).ravel()
        return ExpSum(coef, kappa)

    __rmul__ = __mul__

    def conj(self):
        return ExpSum(np.conj(self.coef), np.conj(self.kappa))

    def integrate(self, a, b):
        """Exact integral over [a, b]; infinite limits need decaying terms."""
        total = 0j
        for cf, kp in zip(self.coef, self.kappa):
            if kp == 0:
                if not (np.isfinite(a) and np.isfinite(b)):
                    raise DomainError("non-decaying term on infinite interval")
                total += cf * (b - a)
            elif np.isinf(a) and np.isinf(b):
                raise DomainError("integral over the whole line of a single region")
            elif np.isinf(a):
                if kp.real <= 0:
                    raise DomainError("term does not decay at -inf")
                total += cf * np.exp(kp * b) / kp
            elif np.isinf(b):
                if kp.real >= 0:
                    raise DomainError("term does not decay at +inf")
                total -= cf * np.exp(kp * a) / kp
            else:
                total += cf * np.exp(kp * a) * np.expm1(kp * (b - a)) / kp
        return total


def _mode_coefficients(beta, k0, ind):
    """h, q, p, p~, q~ for propagation constant(s) beta."""
    n_so, n_se, n_wo, n_we, n_u = ind["n_so"], ind["n_se"], ind["n_wo"], ind["n_we"], ind["n_u"]
    beta = np.asarray(beta, dtype=float)
    h2 = (n_wo * k0) ** 2 - (n_wo / n_we * beta) ** 2
    q2 = beta**2 - (n_u * k0) ** 2
    p2 = (n_so / n_se * beta) ** 2 - (n_so * k0) ** 2
    return h2, q2, p2


def _reduced_residual(beta, k0, t, ind):
    """Cross-multiplied dispersion relation divided by h (pole- and h=0-root-free)."""
    h2, q2, p2 = _mode_coefficients(beta, k0, ind)
    h = np.sqrt(np.clip(h2, 0, None))
    q = np.sqrt(np.clip(q2, 0, None))
    p = np.sqrt(np.clip(p2, 0, None))
    pt = ind["n_wo"] ** 2 / ind["n_so"] ** 2 * p
    qt = ind["n_wo"] ** 2 / ind["n_u"] ** 2 * q
    return (pt + qt) * np.cos(h * t) - h * np.sin(h * t) + pt * qt * t * np.sinc(h * t / np.pi)


def dispersion_residual(beta, k0, t, ind):
    """sin(atan(p~/h) + atan(q~/h) - h t): the cross-multiplied relation, scaled to O(1)."""
    h2, q2, p2 = _mode_coefficients(beta, k0, ind)
    h, q, p = np.sqrt(h2), np.sqrt(q2), np.sqrt(p2)
    pt = ind["n_wo"] ** 2 / ind["n_so"] ** 2 * p
    qt = ind["n_wo"] ** 2 / ind["n_u"] ** 2 * q
    num = h * (pt + qt) * np.cos(h * t) - (h**2 - pt * qt) * np.sin(h * t)
    return num / np.hypot(h * (pt + qt), h**2 - pt * qt)


def guided_bracket(spec, omega):
    lam_um = 2 * np.pi * c / omega * 1e6
    ind = spec.material.indices(lam_um)
    k0 = omega / c
    return ind["n_se"] * k0, ind["n_we"] * k0, ind


def solve_dispersion(spec, omega, n_scan=N_SCAN, rtol=1e-15):
    """All guided TM propagation constants at ``omega``, in descending order."""
    lo, hi, ind = guided_bracket(spec, omega)
    if not ind["n_we"] > ind["n_se"]:
        raise DomainError("guiding condition n_we > n_se violated")
    k0 = omega / c
    t = spec.thickness
    betas = np.linspace(lo, hi, n_scan)
    f = _reduced_residual(betas, k0, t, ind)
    roots = []
    for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
        roots.append(brentq(_reduced_residual, betas[i], betas[i + 1], args=(k0, t, ind),
                            xtol=1e-300, rtol=max(rtol, 4.5e-16), maxiter=200))
    if not roots:
        raise NoGuidedMode(f"no guided TM mode for t={t:g} m at lambda={2*np.pi*c/omega:g} m")
    return sorted(roots, reverse=True)


def mode_count(spec, omega):
    try:
        return len(solve_dispersion(spec, omega))
    except NoGuidedMode:
        return 0


@dataclass(frozen=True, eq=False)
class GuidedMode:
    """Photon-normalized TM mode: h_y, e_x and e_z as piecewise exponential sums."""

    omega: float
    beta: float
    thickness: float
    width: float
    length: float
    indices: dict
    h: float
    q: float
    p: float
    p_tilde: float
    q_tilde: float
    norm: float  # C, the h_y amplitude of one photon (A/m)

    @property
    def wavelength(self):
        return 2 * np.pi * c / self.omega

    def _eps(self):
        ind = self.indices
        # (eps_xx, eps_zz) per region: cover, film, substrate
        return ((ind["n_u"] ** 2, ind["n_u"] ** 2),
                (ind["n_we"] ** 2, ind["n_wo"] ** 2),
                (ind["n_se"] ** 2, ind["n_so"] ** 2))

    def pieces(self, norm=None):
        """[(region bounds, h_y, dh_y/dx)] for cover, film and substrate."""
        C = self.norm if norm is None else norm
        h, q, p, t = self.h, self.q, self.p, self.thickness
        a = -h / self.q_tilde
        cover = ExpSum([C * a], [-q])
        cover_d = ExpSum([C * h / self.q_tilde * q], [-q])
        cp, cm = C * (a / 2 + 1 / 2j), C * (a / 2 - 1 / 2j)
        film = ExpSum([cp, cm], [1j * h, -1j * h])
        film_d = ExpSum([cp * 1j * h, -cm * 1j * h], [1j * h, -1j * h])
        amp = -C * (h / self.q_tilde * np.cos(h * t) + np.sin(h * t)) * np.exp(p * t)
        sub = ExpSum([amp], [p])
        sub_d = ExpSum([amp * p], [p])
        return [((0.0, np.inf), cover, cover_d),
                ((-t, 0.0), film, film_d),
                ((-np.inf, -t), sub, sub_d)]

    def field_pieces(self, norm=None):
        """[(bounds, e_x, e_z, eps_xx, eps_zz)] per region."""
        out = []
        for (bounds, hy, dhy), (exx, ezz) in zip(self.pieces(norm), self._eps()):
            ex = hy * (self.beta / (self.omega * epsilon_0 * exx))
            ez = dhy * (-1j / (self.omega * epsilon_0 * ezz))
            out.append((bounds, ex, ez, exx, ezz))
        return out

    def _evaluate(self, x, which):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for (lo, hi), ex, ez, _, _ in self.field_pieces():
            sel = (x >= lo) & (x <= hi) if np.isfinite(lo) and np.isfinite(hi) else (
                (x >= lo) if np.isfinite(lo) else (x <= hi))
            if np.isfinite(lo) and np.isfinite(hi):
                sel &= ~(x == hi)  # film owns -t, cover owns 0
            f = {"x": ex, "z": ez}[which]
            out[sel] = f(x[sel])
        return out

    def e_x(self, x):
        return self._evaluate(x, "x")

    def e_y(self, x):
        return np.zeros(np.shape(x), dtype=complex)

    def e_z(self, x):
        return self._evaluate(x, "z")

    def h_y(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        (_, cov, _), (_, film, _), (_, sub, _) = self.pieces()
        t = self.thickness
        out[x >= 0] = cov(x[x >= 0])
        m = (x < 0) & (x >= -t)
        out[m] = film(x[m])
        out[x < -t] = sub(x[x < -t])
        return out

    def energy_integral(self, norm=None):
        """2 eps0 dy L int (eps_xx |e_x|^2 + eps_zz |e_z|^2) dx; hbar*omega when normalized."""
        total = 0.0
        for (lo, hi), ex, ez, exx, ezz in self.field_pieces(norm):
            total += (exx * (ex * ex.conj()).integrate(lo, hi) + ezz * (ez * ez.conj()).integrate(lo, hi)).real
        return 2 * epsilon_0 * self.width * self.length * total

    def intensity_integral(self, lo=-np.inf, hi=np.inf):
        """Integral of |e_x|^2 and of |e_z|^2 over [lo, hi], returned separately."""
        ix = iz = 0.0
        for (a, b), ex, ez, _, _ in self.field_pieces():
            a2, b2 = max(a, lo), min(b, hi)
            if a2 >= b2:
                continue
            ix += (ex * ex.conj()).integrate(a2, b2).real
            iz += (ez * ez.conj()).integrate(a2, b2).real
        return ix, iz


def build_mode(spec, omega, beta):
    lo, hi, ind = guided_bracket(spec, omega)
    k0 = omega / c
    h2, q2, p2 = _mode_coefficients(beta, k0, ind)
    if h2 < 0 or q2 < 0 or p2 < 0:
        raise DomainError("beta is not a guided propagation constant")
    h, q, p = np.sqrt(h2), np.sqrt(q2), np.sqrt(p2)
    mode = GuidedMode(omega=omega, beta=float(beta), thickness=spec.thickness, width=spec.width,
                      length=spec.length, indices=ind, h=float(h), q=float(q), p=float(p),
                      p_tilde=float(ind["n_wo"] ** 2 / ind["n_so"] ** 2 * p),
                      q_tilde=float(ind["n_wo"] ** 2 / ind["n_u"] ** 2 * q), norm=1.0)
    unit = mode.energy_integral(1.0)
    return replace(mode, norm=float(np.sqrt(hbar * omega / unit)))


def fundamental_mode(spec, omega):
    return build_mode(spec, omega, solve_dispersion(spec, omega)[0])


def single_mode_window(spec, t_range=(0.2e-6, 0.8e-6), tol=1e-11, n_coarse=241):
    """Largest thickness interval where pump and subharmonic are both single-mode."""
    ts = np.linspace(*t_range, n_coarse)

    def ok(t):
        s = spec.with_thickness(t)
        return mode_count(s, s.omega_p) == 1 and mode_count(s, s.omega_s) == 1

    flags = np.array([ok(t) for t in ts])
    if not flags.any():
        raise WindowNotFound("no single-mode thickness in range")
    # longest run of True
    best, start = (0, 0), None
    for i, f in enumerate(np.append(flags, False)):
        if f and start is None:
            start = i
        elif not f and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    i0, i1 = best[0], best[1] - 1

    def edge(a, b, inside_at_b):
        while b - a > tol:
            m = 0.5 * (a + b)
            if ok(m) == inside_at_b:
                b = m
            else:
                a = m
        return 0.5 * (a + b)

    t_min = ts[i0] if i0 == 0 else edge(ts[i0 - 1], ts[i0], True)
    t_max = ts[i1] if i1 == len(ts) - 1 else edge(ts[i1], ts[i1 + 1], False)
    return t_min, t_max


def linear_coupling(mode, t_l):
    """Forward-backward coupling constant K_a (1/m) of a corrugation of depth t_l."""
    if not 0 <= t_l <= mode.thickness:
        raise DomainError("corrugation depth must satisfy 0 <= t_l <= t")
    ind = mode.indices
    ix, iz = mode.intensity_integral(-t_l, 0.0)
    tx, tz = mode.intensity_integral()
    fx = (ind["n_we"] ** 2 - 1) / ind["n_we"] ** 2
    fz = (ind["n_wo"] ** 2 - 1) / ind["n_wo"] ** 2
    return 1j * mode.omega**2 / (2 * np.pi * c**2 * mode.beta) * (fx * ix + fz * iz) / (tx + tz)


def _overlap_pieces(mode_p, mode_s, d):
    """Exact int_{-inf}^0 d_ijk e_p,i e*_s,j e*_s,k dx."""
    total = 0j
    fp, fs = mode_p.field_pieces(), mode_s.field_pieces()
    for region in (1, 2):  # film, substrate
        (lo, hi), pex, pez, _, _ = fp[region]
        _, sex, sez, _, _ = fs[region]
        ep = {0: pex, 2: pez}
        es = {0: sex.conj(), 2: sez.conj()}
        for i in (0, 2):
            for j in (0, 2):
                for k in (0, 2):
                    if d[i, j, k] != 0:
                        total += d[i, j, k] * (ep[i] * es[j] * es[k]).integrate(lo, hi)
    return total


def nonlinear_coupling(mode_p, mode_s, d=None, q=0):
    """Nonlinear coupling constant K_nl,q (1/m) for one-photon mode amplitudes."""
    d = LINBO3_D if d is None else np.asarray(d)
    overlap = _overlap_pieces(mode_p, mode_s, d)
    tx, tz = mode_s.intensity_integral()
    k0 = 1j * mode_s.omega**2 / (2 * c**2 * mode_s.beta) * overlap / (tx + tz)
    if q == 0:
        return k0
    if q in (1, -1):
        return -2j / np.pi * k0
    raise ValueError("poling order q must be 0 or +-1")


def mismatches(mode_p, mode_s, corrugation_period=None, poling_period=None, q=0):
    """(delta_p, delta_s, delta_nl) in 1/m; delta_p, delta_s are None without a corrugation."""
    if corrugation_period is None:
        dp = ds = None
    else:
        if corrugation_period <= 0:
            raise DomainError("corrugation period must be positive")
        g = 2 * np.pi / corrugation_period
        dp, ds = 2 * mode_p.beta - g, 2 * mode_s.beta - g
    dnl = mode_p.beta - 2 * mode_s.beta
    if q != 0:
        if poling_period is None:
            raise MissingPeriod("poling order q != 0 needs a poling period")
        dnl += q * 2 * np.pi / poling_period
    return dp, ds, dnl


def qpm_order(mode_p, mode_s):
    """Sign of the first-order poling term that cancels beta_p - 2 beta_s."""
    return -1 if mode_p.beta - 2 * mode_s.beta > 0 else 1


def qpm_period(mode_p, mode_s):
    """Positive first-order poling period giving delta_nl = 0."""
    return 2 * np.pi / abs(2 * mode_s.beta - mode_p.beta)


def poling_period_for(mode_p, mode_s, delta_nl, q=None):
    """Poling period producing the nonlinear mismatch ``delta_nl`` at order q."""
    q = qpm_order(mode_p, mode_s) if q is None else q
    period = 2 * np.pi * q / (delta_nl - mode_p.beta + 2 * mode_s.beta)
    if period <= 0:
        raise DomainError("requested mismatch needs the opposite poling order")
    return period


@dataclass(frozen=True)
class CouplingSet:
    """Coupling constants and phase mismatches (SI, 1/m) for one working point."""

    K_p: complex = 0j
    K_s: complex = 0j
    K_nl0: complex = 0j
    delta_p: float = 0.0
    delta_s: float = 0.0
    delta_nl: float = 0.0
    q: int = 1

    @property
    def K_nl1(self):
        return -2j / np.pi * self.K_nl0

    @property
    def K_nl(self):
        """The nonlinear constant of the active poling order."""
        return self.K_nl0 if self.q == 0 else self.K_nl1

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class Device:
    """A waveguide together with its fundamental pump and subharmonic modes."""

    spec: WaveguideSpec
    mode_p: GuidedMode
    mode_s: GuidedMode

    @classmethod
    def from_spec(cls, spec):
        return cls(spec, fundamental_mode(spec, spec.omega_p), fundamental_mode(spec, spec.omega_s))

    @property
    def length(self):
        return self.spec.length

    def couplings(self, q=1, d=None):
        """CouplingSet from the geometry (corrugation depth/period, poling period)."""
        spec = self.spec
        K_p = K_s = 0j
        if spec.corrugation_depth is not None:
            K_p = linear_coupling(self.mode_p, spec.corrugation_depth)
            K_s = linear_coupling(self.mode_s, spec.corrugation_depth)
        dp, ds, dnl = mismatches(self.mode_p, self.mode_s, spec.corrugation_period,
                                 spec.poling_period, q)
        if dp is None and spec.corrugation_depth is not None:
            raise MissingPeriod("corrugation depth given without a corrugation period")
        K0 = nonlinear_coupling(self.mode_p, self.mode_s, d, 0)
        return CouplingSet(K_p=K_p, K_s=K_s, K_nl0=K0, delta_p=dp or 0.0, delta_s=ds or 0.0,
                           delta_nl=dnl, q=q)

    def qpm_couplings(self, delta_nl=0.0, q=1, d=None):
        """Couplings for a poled guide without corrugation at the given nonlinear mismatch."""
        return CouplingSet(K_nl0=nonlinear_coupling(self.mode_p, self.mode_s, d, 0),
                           delta_nl=delta_nl, q=q)
