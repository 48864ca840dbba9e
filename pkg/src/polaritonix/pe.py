"""Closed-form P(E) for Brownian-damped harmonic vibrations.

The momentum correlator of a vibration coupled to an Ohmic bath is split
into pole contributions.  Each contribution has the form
``(a + i b sgn t) (exp(i w0 t - G |t|) - 1)`` and its exponential has an
exact Fourier transform as a Lorentzian mixture
(:func:`exp_correlator_transform`).  Vibronic poles give the emission and
absorption series, thermal (Matsubara) poles give zero-centred broadening
series, and everything is combined by closed-form convolution.

Units: hbar = k_B = 1 and all frequencies share one unit.
"""
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import CriticalDampingError, DomainError, IllConditionedError
from .lineshapes import PRUNE_FLOOR, Mixture, convolve

UNDERDAMPED = "underdamped"
OVERDAMPED = "overdamped"

DEFAULT_TOLERANCE = 1e-12
MAX_ORDER = 512
CUTOFF_FACTOR = 25.0
COINCIDENCE_RTOL = 1e-12
PERTURBATION = 1e-9
MAX_AMPLIFICATION = 1e8
CONDITIONING_WARN = 1e9
CONDITIONING_LIMIT = 1e16


@dataclass(frozen=True)
class VibrationalMode:
    """One Brownian-damped vibration.

    ``multiplicity`` identical independent copies act as a single mode
    with Huang-Rhys factor ``multiplicity * huang_rhys``.
    """

    omega_v: float
    huang_rhys: float
    quality: float
    multiplicity: int = 1

    def __post_init__(self):
        if not self.omega_v > 0:
            raise DomainError("omega_v must be positive")
        if self.huang_rhys < 0:
            raise DomainError("Huang-Rhys factor must be non-negative")
        if not self.quality > 0:
            raise DomainError("quality factor must be positive")
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise DomainError("multiplicity must be a positive integer")

    @property
    def damping(self):
        return self.omega_v / self.quality

    @property
    def total_huang_rhys(self):
        return self.multiplicity * self.huang_rhys


@dataclass(frozen=True)
class ThermalEnv:
    """Bath temperature ``k_B T`` and the Matsubara cutoff frequency.

    ``cutoff=None`` means 25 times the largest vibrational frequency, resolved
    with :meth:`cutoff_for`.
    """

    temperature: float
    cutoff: float = None

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError("temperature must be positive")
        if self.cutoff is not None and not self.cutoff > 0:
            raise DomainError("cutoff must be positive")

    @property
    def beta(self):
        return 1.0 / self.temperature

    def cutoff_for(self, modes):
        if self.cutoff is not None:
            return self.cutoff
        modes = _as_list(modes)
        if not modes:
            return 0.0
        return CUTOFF_FACTOR * max(m.omega_v for m in modes)

    def k_max(self, modes):
        return int(math.floor(self.cutoff_for(modes) / (2 * math.pi * self.temperature)))

    def matsubara_frequency(self, k):
        return 2 * math.pi * k * self.temperature


@dataclass(frozen=True)
class Regime:
    name: str
    renormalized_frequency: float
    rates: tuple


@dataclass(frozen=True)
class ResidueCoefficients:
    regime: str
    renormalized_frequency: float
    rates: tuple
    d_plus: complex
    d_minus: complex
    bose_complex: complex = None


def _as_list(modes):
    if isinstance(modes, VibrationalMode):
        return [modes]
    return list(modes)


def classify_regime(mode):
    """Underdamped (Q > 1/2) or overdamped (Q < 1/2) pole structure.

    Underdamped poles sit at ``+-w~ - i gamma/2`` with
    ``w~ = w_v sqrt(1 - 1/(4Q^2))``; overdamped poles sit on the imaginary
    axis at ``-i Gamma_+-`` where ``Gamma_+- = (gamma +- sqrt(gamma^2 - 4 w_v^2))/2``.
    """
    q, wv = mode.quality, mode.omega_v
    if abs(q - 0.5) <= COINCIDENCE_RTOL * 0.5:
        raise CriticalDampingError("critical damping Q = 1/2 is not supported")
    gamma = wv / q
    if q > 0.5:
        wt = wv * math.sqrt(1.0 - 1.0 / (4 * q * q))
        return Regime(UNDERDAMPED, wt, (gamma / 2, gamma / 2))
    root = math.sqrt(gamma * gamma - 4 * wv * wv)
    g_plus = 0.5 * (gamma + root)
    # product form avoids cancellation for small Q
    g_minus = wv * wv / g_plus
    return Regime(OVERDAMPED, 0.0, (g_plus, g_minus))


def _coincides(rate, temperature):
    x = rate / (2 * math.pi * temperature)
    k = round(x)
    return k >= 1 and abs(x - k) <= COINCIDENCE_RTOL * x


def resolve_double_poles(mode, env):
    """Move Q off a vibronic/thermal double pole, warning when it does so."""
    if mode.quality >= 0.5:
        return mode
    for _ in range(8):
        rates = classify_regime(mode).rates
        if not any(_coincides(r, env.temperature) for r in rates):
            return mode
        warnings.warn(
            "overdamped rate coincides with a Matsubara frequency; "
            f"perturbing Q by a relative {PERTURBATION:g}",
            RuntimeWarning,
            stacklevel=3,
        )
        mode = replace(mode, quality=mode.quality * (1 + PERTURBATION))
    return mode


def residue_coefficients(mode, env):
    """Residue weights D+ (emission) and D- (absorption) of the vibronic poles."""
    mode = resolve_double_poles(mode, env)
    reg = classify_regime(mode)
    s, q, wv = mode.total_huang_rhys, mode.quality, mode.omega_v
    beta = env.beta
    if reg.name == UNDERDAMPED:
        wt = reg.renormalized_frequency
        gamma = mode.damping
        bose = 1.0 / np.expm1(beta * complex(wt, gamma / 2))
        c = (wv / wt) * (1.0 / (2 * q * q) - 1.0)
        d_minus = s * bose * (1j / q - c)
        d_plus = s * (np.conj(bose) + 1.0) * (-1j / q - c)
        return ResidueCoefficients(reg.name, wt, reg.rates, complex(d_plus), complex(d_minus), complex(bose))
    g_plus, g_minus = reg.rates
    # residues of w^3/((w^2 + G+^2)(w^2 + G-^2)) at w = -i G+-, times 2 pi S/(pi Q)
    split = (g_plus - g_minus) * (g_plus + g_minus)
    d_plus = s / q * g_plus ** 2 / split * (-1j + 1.0 / math.tan(g_plus * beta / 2))
    d_minus = -s / q * g_minus ** 2 / split * (-1j + 1.0 / math.tan(g_minus * beta / 2))
    return ResidueCoefficients(reg.name, 0.0, reg.rates, complex(d_plus), complex(d_minus))


def truncation_order(a, modulus, tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER):
    """Smallest n whose remainder bound ``e^(|z|-a) |z|^(n+1)/(n+1)!`` is below ``tolerance``."""
    if modulus == 0:
        return 0
    log_tol = math.log(tolerance)
    log_z = math.log(modulus)
    base = modulus - a
    for n in range(max_order + 1):
        if base + (n + 1) * log_z - math.lgamma(n + 2) < log_tol:
            return n
    return max_order


def exp_correlator_transform(a, b, omega_0, half_width, n_max=None,
                             tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER,
                             prune_floor=PRUNE_FLOOR):
    """Fourier transform of ``exp[(a + i b sgn t)(exp(i w0 t - G|t|) - 1)]``.

    With ``z = a + i b = |z| e^{i theta}`` the transform (with kernel
    ``e^{iEt}/2pi``) is

        e^{-a} sum_n |z|^n/n! [cos(b - n theta) f(E; -n w0, n G)
                               + sin(b - n theta) g(E; -n w0, n G)].

    The n = 0 term has zero width.  ``n_max=None`` picks the order from the
    remainder bound, capped at ``max_order``.
    """
    if half_width < 0:
        raise DomainError("half_width must be non-negative")
    z = complex(a, b)
    modulus = abs(z)
    if n_max is None:
        n_max = truncation_order(a, modulus, tolerance, max_order)
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    if modulus == 0:
        return Mixture.delta(1.0)
    ld = np.longdouble
    theta = np.arctan2(ld(b), ld(a))
    n = np.arange(n_max + 1)
    log_w = -ld(a) + n * np.log(np.hypot(ld(a), ld(b))) - np.cumsum(np.log(np.maximum(n, 1).astype(ld)))
    phase = ld(b) - n * theta
    amp = np.exp(log_w) * (np.cos(phase) + 1j * np.sin(phase))
    m = Mixture(amp, -n * omega_0, n * half_width)
    return m.simplified(prune_floor=prune_floor, merge_rtol=None) if n_max else m


@dataclass(frozen=True)
class PoleTerm:
    """One factor ``exp[(a + i b sgn t)(exp(i w0 t - G|t|) - 1)]`` of the correlator exponential."""

    a: float
    b: float
    omega_0: float
    half_width: float

    @property
    def amplification(self):
        """``e^{|z| - a}``: sum of absolute amplitudes over the (unit) total of the series."""
        return math.exp(abs(complex(self.a, self.b)) - self.a)

    def transform(self, tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER, prune_floor=PRUNE_FLOOR):
        return exp_correlator_transform(self.a, self.b, self.omega_0, self.half_width,
                                        tolerance=tolerance, max_order=max_order,
                                        prune_floor=prune_floor)


def vibronic_terms(coeffs):
    if coeffs.regime == UNDERDAMPED:
        wt = coeffs.renormalized_frequency
        half = coeffs.rates[0]
        # e^{-i w~ t} places emission atoms at E = +n w~
        pairs = ((coeffs.d_plus, -wt, half), (coeffs.d_minus, wt, half))
    else:
        pairs = ((coeffs.d_plus, 0.0, coeffs.rates[0]), (coeffs.d_minus, 0.0, coeffs.rates[1]))
    return [PoleTerm(d.real, d.imag, w0, g) for d, w0, g in pairs if d != 0]


def matsubara_terms(coefficients):
    return [PoleTerm(c, 0.0, 0.0, wk) for wk, c in coefficients if c != 0]


def expand_terms(terms, tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER, prune_floor=PRUNE_FLOOR):
    """Transform every pole term and convolve the results.

    Series with ``Re z < 0`` or large phases alternate in sign, so a product
    of them carries absolute amplitudes far above its unit total.  The
    truncation tolerance and the pruning floor are divided by that
    amplification, and the tolerance is split evenly over the terms, so that
    the absolute error of the result stays at ``tolerance``.
    """
    terms = list(terms)
    # beyond ~1e8 extended precision is exhausted anyway; cap to bound the atom count
    amp = min(math.prod(t.amplification for t in terms), MAX_AMPLIFICATION)
    # each series may leave `tol` of its mass behind, so the budget is shared
    tol = max(tolerance / (amp * max(len(terms), 1)), 1e-300)
    floor = prune_floor / amp if prune_floor else prune_floor
    # zero-centred terms on the Matsubara lattice merge on convolution, so they go first
    terms.sort(key=lambda t: (t.b != 0 or t.omega_0 != 0, t.half_width))
    parts = [t.transform(tol, max_order, floor) for t in terms]
    out = Mixture.delta()
    for part in parts:
        out = convolve(out, part, prune_floor=floor)
    return out


def vibronic_expansion(coeffs, tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER):
    """Emission/absorption series P+ * P- built from the residue weights."""
    return expand_terms(vibronic_terms(coeffs), tolerance, max_order)


def matsubara_coefficients(mode, env, cutoff=None):
    """Matsubara frequencies ``w_k = 2 pi k T`` and weights ``C_k`` for k = 1..k_max.

    ``C_k = (4 S T / Q) w_k^3 / ((w_k^2 + w_v^2)^2 - gamma^2 w_k^2)``.  In the
    overdamped regime ``C_k`` is negative for ``Gamma_- < w_k < Gamma_+``.
    """
    mode = resolve_double_poles(mode, env)
    if cutoff is None:
        cutoff = env.cutoff_for([mode])
    k_max = int(math.floor(cutoff / (2 * math.pi * env.temperature)))
    s, q, wv, gamma = mode.total_huang_rhys, mode.quality, mode.omega_v, mode.damping
    out = []
    for k in range(1, k_max + 1):
        wk = env.matsubara_frequency(k)
        den = (wk * wk + wv * wv) ** 2 - gamma * gamma * wk * wk
        out.append((wk, 4 * s * env.temperature / q * wk ** 3 / den))
    return out


def matsubara_expansion(coefficients, tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER):
    """Zero-centred broadening series: convolution over k of the ``C_k`` Poisson series."""
    return expand_terms(matsubara_terms(coefficients), tolerance, max_order)


def pole_terms(modes, env):
    """All vibronic and Matsubara pole terms of a list of modes."""
    modes = _as_list(modes)
    cutoff = env.cutoff_for(modes)
    terms = []
    for m in modes:
        if m.total_huang_rhys == 0:
            continue
        terms += vibronic_terms(residue_coefficients(m, env))
        terms += matsubara_terms(matsubara_coefficients(m, env, cutoff))
    return terms


def conditioning(modes, env):
    """Amplification ``prod e^{|z|-a}`` of the series product.

    Rounding errors of the mixture amplitudes are magnified by this factor;
    amplitudes are kept in extended precision (about 1e-19), so results
    degrade once it exceeds roughly 1e7.
    """
    return math.prod(t.amplification for t in pole_terms(modes, env))


def single_mode_pe(mode, env, tolerance=DEFAULT_TOLERANCE, cutoff=None, max_order=MAX_ORDER):
    if cutoff is not None:
        env = replace(env, cutoff=cutoff)
    return total_pe([mode], env, tolerance, max_order)


def total_pe(modes, env, tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER):
    """P(E) of all modes: the convolution of every single-mode P(E).

    All modes share the cutoff resolved from the full mode list.  A mode of
    multiplicity M enters with Huang-Rhys factor M*S.  An empty list gives a
    unit delta.

    Warns when the series amplification (see :func:`conditioning`) exceeds
    1e9 and raises :class:`IllConditionedError` above 1e16, where rounding
    errors of order 1e-3 would swamp the result.
    """
    terms = pole_terms(modes, env)
    amp = math.prod(t.amplification for t in terms)
    if amp > CONDITIONING_LIMIT:
        raise IllConditionedError(
            f"series amplification {amp:.3g} exceeds {CONDITIONING_LIMIT:.0e}: the residues nearly "
            "cancel (a vibronic rate close to a Matsubara frequency) and P(E) cannot be resolved")
    if amp > CONDITIONING_WARN:
        warnings.warn(
            f"series amplification {amp:.3g} exceeds {CONDITIONING_WARN:.0e}; "
            "P(E) amplitudes may carry rounding errors above the tolerance",
            RuntimeWarning,
            stacklevel=2,
        )
    return expand_terms(terms, tolerance, max_order)


def correlator_from_residues(mode, env, t, cutoff=None):
    """Regularised correlator ``J~(t)`` rebuilt from the residue weights.

    Sum of the vibronic and truncated Matsubara pole contributions; useful as
    a cross-check against direct quadrature of the frequency integral.
    """
    t = np.asarray(t, dtype=float)
    coeffs = residue_coefficients(mode, env)
    sgn = np.sign(t)
    at = np.abs(t)
    if coeffs.regime == UNDERDAMPED:
        wt, half = coeffs.renormalized_frequency, coeffs.rates[0]
        e_plus = np.exp(-1j * wt * t - half * at)
        e_minus = np.exp(1j * wt * t - half * at)
    else:
        e_plus = np.exp(-coeffs.rates[0] * at)
        e_minus = np.exp(-coeffs.rates[1] * at)
    out = np.zeros(t.shape, dtype=complex)
    for d, e in ((coeffs.d_plus, e_plus), (coeffs.d_minus, e_minus)):
        out += (d.real + 1j * d.imag * sgn) * (e - 1)
    for wk, c in matsubara_coefficients(mode, env, cutoff):
        out += c * (np.exp(-wk * at) - 1)
    return out
