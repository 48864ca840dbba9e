"""Brute-force route to P(E): quadrature of the correlator and a DFT.

Nothing here uses the residue weights or the Lorentzian series of
:mod:`polaritonix.pe`.  The correlator

    J(t) = S/(pi Q) int dw e^{-iwt} w^3 / ((w^2 - wv^2)^2 + w^2 gamma^2)
                           * [coth(w/2T) + 1]

is integrated numerically.  Its logarithmic ultraviolet divergence is cut
off the same way as in the closed form: the spectral weight of every
thermal pole beyond ``k_max`` is removed, which in frequency space means
subtracting ``sum_{k>k_max} c_k w_k / (pi (w^2 + w_k^2))``.  That tail is
summed in closed form with digamma functions.
"""
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve
from scipy.special import polygamma, psi, sici

from .errors import DomainError
from .lineshapes import Mixture, convolve
from .pe import total_pe

_REL_STEP = 1e-3
_CHUNK = 2**23


def rational_part(omega, mode):
    """``w^3 / ((w^2 - wv^2)^2 + w^2 gamma^2)``; accepts complex ``omega``."""
    wv, gamma = mode.omega_v, mode.damping
    w2 = omega * omega
    return omega * w2 / ((w2 - wv * wv) ** 2 + w2 * gamma * gamma)


def thermal_pole_weight(mode, env, k):
    """Weight of ``e^{-w_k |t|}`` in J from the coth pole at ``w = -i w_k``.

    Computed as ``-2 pi i * (S/(pi Q)) * Res coth * rational(-i w_k)`` with
    ``Res coth(w/2T) = 2T``.
    """
    wk = 2 * np.pi * k * env.temperature
    pref = mode.total_huang_rhys / (np.pi * mode.quality)
    return (-2j * np.pi * pref * 2 * env.temperature * rational_part(-1j * wk, mode)).real


class Correlator:
    """Numerical ``J~(t) = J(t) - J(0)`` for one mode with a Matsubara cutoff."""

    def __init__(self, mode, env, cutoff=None, upper=None):
        self.mode = mode
        self.env = env
        cutoff = env.cutoff_for([mode]) if cutoff is None else cutoff
        self.k_max = int(np.floor(cutoff / (2 * np.pi * env.temperature)))
        self.pref = mode.total_huang_rhys / (np.pi * mode.quality)
        wv, gamma = mode.omega_v, mode.damping
        # y^2 + (2 wv^2 - gamma^2) y + wv^4 = (y + s1)(y + s2)
        self._sigma = np.roots([1.0, -(2 * wv * wv - gamma * gamma), wv ** 4]).astype(complex)
        scale = max(wv, gamma, 2 * np.pi * env.temperature * (self.k_max + 1))
        self.upper = 1e4 * scale if upper is None else upper
        fine = min(wv, gamma / 2, wv * wv / gamma, 2 * np.pi * env.temperature) / 50
        self.nodes = _graded_nodes(fine, self.upper)
        self._even = self.even_part(self.nodes)
        self._odd = rational_part(self.nodes, mode)
        # F_even ~ c2 / w^2 beyond the last node
        self._c2 = self._even[-1] * self.upper ** 2
        self._j0 = 2 * (np.trapezoid(self._even, self.nodes) + self._c2 / self.upper)

    @property
    def asymptote(self):
        """``J~(t -> inf) = -J(0)``; the oscillatory integrals vanish at long times."""
        return -(self._j0 - 1j * np.pi * self.pref)

    def thermal_tail(self, omega):
        """Spectral density of the thermal poles beyond ``k_max``."""
        omega = np.asarray(omega, dtype=float)
        a = 2 * np.pi * self.env.temperature
        w2 = omega * omega
        s1, s2 = self._sigma
        # keep w^2 away from s1, s2 so the partial fractions stay finite
        for s in (s1, s2):
            close = np.abs(w2 - s) < 1e-7 * np.abs(s)
            w2 = np.where(close, w2 * (1 + 1e-6), w2)
        poles = [w2 + 0j, np.full_like(w2, s1, dtype=complex), np.full_like(w2, s2, dtype=complex)]
        total = np.zeros(w2.shape, dtype=complex)
        for j, sj in enumerate(poles):
            den = np.ones_like(total)
            for l, sl in enumerate(poles):
                if l != j:
                    den = den * (sl - sj)
            total += sj * sj / den * _inverse_square_tail(sj, a, self.k_max + 1)
        return self.pref * 4 * self.env.temperature * total.real

    def even_part(self, omega):
        omega = np.asarray(omega, dtype=float)
        x = omega / (2 * self.env.temperature)
        with np.errstate(divide="ignore", invalid="ignore"):
            coth_term = np.where(omega == 0, 0.0, rational_part(omega, self.mode) / np.tanh(x))
        return self.pref * coth_term - self.thermal_tail(omega)

    def __call__(self, t):
        """``J~(t)`` for real ``t`` (any sign); ``J~(0) = 0``."""
        t = np.asarray(t, dtype=float)
        at = np.abs(t).ravel()
        out = np.zeros(at.shape, dtype=complex)
        pos = at > 0
        if np.any(pos):
            tp = at[pos]
            cos_part = _filon(self.nodes, self._even, tp, "cos") + self._c2 * _inv_square_cos_tail(self.upper, tp)
            sin_part = _filon(self.nodes, self._odd, tp, "sin") + (np.pi / 2 - sici(self.upper * tp)[0])
            j_t = 2 * cos_part - 2j * self.pref * sin_part
            # J(0+) carries the -i pi pref jump of the 1/w tail of the odd part
            out[pos] = j_t - (self._j0 - 1j * np.pi * self.pref)
        out = out.reshape(t.shape)
        return np.where(t < 0, np.conj(out), out)


def _inverse_square_tail(s, a, start):
    """``sum_{k >= start} 1 / (a^2 k^2 + s)`` for complex ``s``."""
    c = np.sqrt(s) / a
    small = np.abs(c) < 1e-8
    c_safe = np.where(small, 1.0, c)
    val = (psi(start + 1j * c_safe) - psi(start - 1j * c_safe)) / (2j * c_safe)
    return np.where(small, polygamma(1, start), val) / (a * a)


def _inv_square_cos_tail(w, t):
    """``int_w^inf cos(x t) / x^2 dx``."""
    si, _ = sici(w * t)
    return np.cos(w * t) / w - t * (np.pi / 2 - si)


def _graded_nodes(fine, upper):
    """Uniform spacing ``fine`` near zero, then geometric growth up to ``upper``."""
    knee = fine / _REL_STEP
    uniform = np.arange(0.0, knee, fine)
    geometric = knee * np.exp(np.arange(0.0, np.log(upper / knee) + _REL_STEP, _REL_STEP))
    return np.concatenate([uniform, geometric])


def _filon(x, f, t, kind):
    """Exact ``int f(w) cos(wt)`` (or sin) for piecewise-linear ``f`` on nodes ``x``."""
    h = np.diff(x)
    m = 0.5 * (x[1:] + x[:-1])
    s = np.diff(f) / h
    out = np.empty(t.shape)
    step = max(1, _CHUNK // h.size)
    for i in range(0, t.size, step):
        tt = t[i:i + step, None]
        half = np.sinc(h * tt / (2 * np.pi))  # sin(ht/2)/(ht/2)
        if kind == "cos":
            bulk = -(s * h * m * np.sinc(m * tt / np.pi) * half).sum(axis=1)
            edge = f[-1] * x[-1] * np.sinc(x[-1] * tt[:, 0] / np.pi) - f[0] * x[0] * np.sinc(x[0] * tt[:, 0] / np.pi)
        else:
            bulk = (s * h * np.cos(m * tt) * half).sum(axis=1) / tt[:, 0]
            edge = -(f[-1] * np.cos(x[-1] * tt[:, 0]) - f[0] * np.cos(x[0] * tt[:, 0])) / tt[:, 0]
        out[i:i + step] = bulk + edge
    return out


def j_numeric(mode, env, t, cutoff=None):
    """Regularised correlator ``J~(t)`` by direct frequency quadrature."""
    if mode.total_huang_rhys == 0:
        return np.zeros(np.shape(t), dtype=complex)
    return Correlator(mode, env, cutoff)(t)


@dataclass(frozen=True)
class TimeGrid:
    """Symmetric time grid ``t_j = j dt`` for ``j = -n/2 .. n/2 - 1``."""

    t_max: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise DomainError("n_points must be a power of two")
        if not self.t_max > 0:
            raise DomainError("t_max must be positive")

    @property
    def dt(self):
        return 2 * self.t_max / self.n_points

    @property
    def times(self):
        return (np.arange(self.n_points) - self.n_points // 2) * self.dt

    @property
    def d_energy(self):
        return np.pi / self.t_max

    @property
    def energies(self):
        return (np.arange(self.n_points) - self.n_points // 2) * self.d_energy

    @property
    def e_max(self):
        return np.pi / self.dt


def default_time_grid(mode, env, e_max=None, max_points=2**22):
    """Grid long enough for the slowest decay and fine enough for ``e_max``.

    ``t_max = 50 / (slowest vibronic rate)``; ``e_max`` defaults to 50 times
    a crude width estimate of P(E) so that aliased tails stay small.
    """
    gamma = mode.damping
    if mode.quality > 0.5:
        slow = gamma / 2
    else:
        slow = mode.omega_v ** 2 / (0.5 * (gamma + np.sqrt(gamma * gamma - 4 * mode.omega_v ** 2)))
    t_max = 50.0 / slow
    if e_max is None:
        e_max = 50 * _width_scale(mode, env)
    n = 2 ** int(np.ceil(np.log2(2 * t_max * e_max / np.pi)))
    return TimeGrid(t_max, int(min(max(n, 2**12), max_points)))


def _width_scale(mode, env):
    # characteristic spread of P(E): Huang-Rhys weighted vibronic energy + thermal widths
    s, wv, gamma, temp = mode.total_huang_rhys, mode.omega_v, mode.damping, env.temperature
    thermal = s * (1 + 2 * temp / wv)
    return max(wv, (thermal + 3 * np.sqrt(thermal)) * (wv + gamma) + s * temp / mode.quality * 8)


def _sampled_correlator(corr, grid):
    """``J~`` at ``t = 0, dt, ..., t_max`` via a dense spline."""
    t_pos = np.arange(grid.n_points // 2 + 1) * grid.dt
    mode = corr.mode
    scale = 1.0 / max(mode.omega_v, mode.damping, 2 * np.pi * corr.env.temperature * max(corr.k_max, 1))
    step = 0.1 / mode.omega_v
    knots = np.unique(np.concatenate([
        [0.0],
        np.geomspace(1e-6 * scale, 20 * scale, 400),
        np.arange(20 * scale, grid.t_max + 2 * step, step),
    ]))
    values = corr(knots)
    spline_re = CubicSpline(knots, values.real)
    spline_im = CubicSpline(knots, values.imag)
    return t_pos, spline_re(t_pos) + 1j * spline_im(t_pos)


def p_numeric(mode, env, grid=None, regularization=None, cutoff=None):
    """P(E) by discrete Fourier transform of ``exp(J~(t))``.

    ``P(E) = (1/2pi) int dt e^{iEt} exp(J~(t)) exp(-w|t|)``; the damping
    ``w`` (default ``4 dE``) equals convolving P with a Lorentzian of
    half-width ``w``.  With ``regularization=0`` and S = 0 the result is a
    discrete delta (height ``1/dE``) at E = 0.  Returns ``(energies, P)``.

    Raises :class:`DomainError` when the time step cannot resolve the
    width of P or when ``exp(J~)`` has not settled by ``t_max``.
    """
    grid = default_time_grid(mode, env) if grid is None else grid
    w = 4 * grid.d_energy if regularization is None else regularization
    if w < 0:
        raise DomainError("regularization must be non-negative")
    if grid.e_max < 5 * _width_scale(mode, env):
        raise DomainError(
            f"time step {grid.dt:.3g} too coarse: energies up to {grid.e_max:.3g} "
            f"cannot hold a P(E) of width ~{_width_scale(mode, env):.3g}")
    n = grid.n_points
    times = grid.times
    signal = np.ones(n, dtype=complex)
    if mode.total_huang_rhys > 0:
        corr = Correlator(mode, env, cutoff)
        _, j_pos = _sampled_correlator(corr, grid)
        x = np.exp(j_pos)
        residual = abs(x[-1] - np.exp(corr.asymptote))
        if residual > 1e-8:
            raise DomainError(f"exp(J~) has not decayed by t_max={grid.t_max:.3g} (residual {residual:.2e})")
        i0 = n // 2
        signal[i0:] = x[:-1]
        # J~(-t) = conj J~(t); index i0 - j holds time -j dt
        signal[:i0] = np.conj(x[i0:0:-1])
    signal *= np.exp(-w * np.abs(times))
    # sum_j X_j e^{i E_m t_j} with both grids centred
    spec = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(signal))) * n
    p = spec * grid.dt / (2 * np.pi)
    # Hermitian symmetry of the signal makes P real; the imaginary part is rounding
    return grid.energies, p.real


def convolve_numeric(grid, f, g):
    """Discrete convolution ``(f*g)(x_i) = sum_j f(x_j) g(x_i - x_j) dx``.

    ``grid`` must be uniform, of odd length and centred on zero so that the
    result lives on the same grid.
    """
    grid = np.asarray(grid, dtype=float)
    f = np.asarray(f)
    g = np.asarray(g)
    if not (grid.shape == f.shape == g.shape) or grid.ndim != 1:
        raise DomainError("grid and samples must share one shape")
    if grid.size % 2 == 0 or abs(grid[grid.size // 2]) > 1e-12 * np.abs(grid).max():
        raise DomainError("grid must have odd length and be centred on zero")
    dx = np.diff(grid)
    if not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
        raise DomainError("grid must be uniform")
    return fftconvolve(f, g, mode="same") * dx[0]


def closed_form_distance(mode, env, pe=None, grid=None, max_samples=4096):
    """Relative L1 distance between the series P(E) and :func:`p_numeric`.

    The series mixture is widened by the oracle's regularisation so that its
    delta atoms become the same Lorentzians the DFT produces.  Only the
    window ``|E| <= E_max/4`` is compared, where aliasing of the slowly
    decaying Lorentzian tails stays negligible; it is subsampled to about
    ``max_samples`` points.

    Returns
    -------
    distance : float
    energies, p_oracle : ndarray
        The full oracle output, handy for further checks.
    """
    grid = default_time_grid(mode, env) if grid is None else grid
    energies, p_oracle = p_numeric(mode, env, grid)
    mix = total_pe([mode], env) if pe is None else pe
    mix = mix.widened(4 * grid.d_energy)
    window = np.flatnonzero(np.abs(energies) <= grid.e_max / 4)
    window = window[:: max(1, window.size // max_samples)]
    closed = np.asarray(mix(energies[window]), dtype=float)
    distance = np.abs(closed - p_oracle[window]).sum() / np.abs(closed).sum()
    return float(distance), energies, p_oracle


def detailed_balance_error(energies, p, beta, floor=1e-6):
    """Worst relative violation of ``|ln(P(E)/P(-E))| = beta |E|``.

    Only pairs with both ``P(E)`` and ``P(-E)`` above ``floor * max(P)`` and
    ``E != 0`` take part.  ``energies`` must be symmetric about zero, or
    be an FFT grid whose first point is the unpaired ``-E_max``.

    Returns
    -------
    error : float
        ``max | |ln(P(E)/P(-E))| - beta|E| | / (beta|E|)``; zero when no
        pair qualifies.
    n_pairs : int
    """
    energies = np.asarray(energies, dtype=float)
    p = np.asarray(p, dtype=float)
    if energies.size % 2 == 0:
        # FFT ordering: the most negative energy has no positive partner
        energies, p = energies[1:], p[1:]
    if not np.allclose(energies, -energies[::-1], atol=1e-9 * np.abs(energies).max()):
        raise DomainError("energies must be symmetric about zero")
    mirrored = p[::-1]
    keep = (energies > 0) & (p > floor * p.max()) & (mirrored > floor * p.max())
    if not keep.any():
        return 0.0, 0
    ratio = np.abs(np.log(p[keep] / mirrored[keep]))
    expected = beta * energies[keep]
    return float(np.max(np.abs(ratio - expected) / expected)), int(keep.sum())


def convolution_table_errors():
    """L1 error of the three closed-form convolution rules on a sampled grid.

    The anti-Lorentzian decays like 1/x, so the truncated grid loses a
    fraction of order ``width/half_span`` of the g*g result; the half-span of
    8e4 keeps that near 3e-4.
    """
    x = np.linspace(-80_000.0, 80_000.0, 3_200_001)
    cases = [
        (Mixture.lorentzian(1.0, 0.7), Mixture.lorentzian(-0.5, 1.3)),
        (Mixture.lorentzian(1.0, 0.7), Mixture.hilbert(-0.5, 1.3)),
        (Mixture.hilbert(1.0, 0.7), Mixture.hilbert(-0.5, 1.3)),
    ]
    names = ["f*f", "f*g", "g*g"]
    errors = []
    for name, (a, b) in zip(names, cases):
        exact = np.asarray(convolve(a, b)(x), dtype=float)
        numeric = convolve_numeric(x, np.asarray(a(x), dtype=float), np.asarray(b(x), dtype=float))
        window = np.abs(x) <= 50
        errors.append((name, float(np.abs(numeric - exact)[window].sum() / np.abs(exact)[window].sum())))
    return errors
