"""Observables of the polariton spectrum.

Peaks, FWHM linewidths, the Rabi splitting ``R = min_delta (w+ - w-)`` with
its detuning ``delta_R``, the equal-linewidth detuning ``delta_Gamma`` and
the upper/lower intensity ratio.  Peak positions are always refined on the
exact response, never read off interpolated samples.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    AmbiguousSplittingError,
    NoPeaksError,
    NoSplittingError,
    NotBracketedError,
    OverlappingPeaksError,
)
from .response import absorption_mixture

DOMINANCE = 0.05
PEAK_XTOL = 1e-7
CROSSING_XTOL = 1e-7
SPLITTING_XTOL = 1e-4
LINEWIDTH_XTOL = 1e-3
MAX_SCAN_POINTS = 8001


class Peak(NamedTuple):
    position: float
    height: float


@dataclass(frozen=True)
class PolaritonFeatures:
    """Spectral features at the detuning of minimum splitting."""

    omega_plus: float
    omega_minus: float
    rabi_splitting: float
    delta_R: float
    linewidth_plus: float
    linewidth_minus: float
    intensity_ratio: float
    delta_Gamma: Optional[float] = None


def find_peaks(evaluator, bracket, n_scan=2001, samples=None, xtol=PEAK_XTOL):
    """All interior local maxima of a real function on ``bracket``.

    A coarse scan (``n_scan`` points, or the supplied ``(grid, values)``
    ``samples``) locates candidate maxima, each refined by a bounded
    scalar minimisation to ``xtol``.

    Returns
    -------
    list of Peak
        Sorted by position.

    Raises
    ------
    NoPeaksError
        If the function has no interior maximum on the bracket.
    """
    if samples is None:
        grid = np.linspace(bracket[0], bracket[1], n_scan)
        values = np.asarray(evaluator(grid), dtype=float)
    else:
        grid, values = samples
    idx = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])) + 1
    peaks = []
    for i in idx:
        res = minimize_scalar(lambda x: -float(evaluator(np.array([x]))[0]),
                              bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                              options={"xatol": xtol})
        x = float(res.x)
        h = float(evaluator(np.array([x]))[0])
        if h < values[i]:
            x, h = float(grid[i]), float(values[i])
        peaks.append(Peak(x, h))
    if not peaks:
        raise NoPeaksError("no local maximum inside the bracket")
    return sorted(peaks)


def dominant_peaks(peaks, threshold=DOMINANCE):
    """Peaks higher than ``threshold`` times the tallest one."""
    top = max(p.height for p in peaks)
    return [p for p in peaks if p.height >= threshold * top]


def fwhm(evaluator, position, height, bracket, step=None, xtol=CROSSING_XTOL):
    """Full width at half maximum of the peak at ``position``.

    Walks outwards in ``step`` increments until the function drops below
    ``height/2`` and then bisects for the crossing.

    Raises
    ------
    OverlappingPeaksError
        When a side rises again (another peak) or leaves ``bracket``
        before reaching half height.
    """
    lo, hi = bracket
    if step is None:
        step = (hi - lo) / 4000
    half = height / 2

    def f(x):
        return float(evaluator(np.array([x]))[0]) - half

    def crossing(direction):
        x = position
        prev = height
        while True:
            nxt = x + direction * step
            if nxt < lo or nxt > hi:
                raise OverlappingPeaksError("half height not reached inside the bracket")
            val = f(nxt) + half
            if val < half:
                a, b = sorted((x, nxt))
                return brentq(f, a, b, xtol=xtol)
            if val > prev * (1 + 1e-12) and nxt != position + direction * step:
                raise OverlappingPeaksError("neighbouring peak before half height")
            x, prev = nxt, val

    return crossing(+1) - crossing(-1)


class PolaritonModel:
    """Cavity response with the absorption function cached.

    ``A(w_d - w_m + shift)`` does not depend on the cavity frequency, so it is
    tabulated once on the drive grid and every detuning reuses it.
    """

    def __init__(self, cav, mol, env, absorption=None, span=None, n_points=None):
        self.cav = cav
        self.mol = mol
        self.env = env
        self.absorption = absorption_mixture(mol, env) if absorption is None else absorption
        kappa_m = self.absorption.kappa_m
        wv = max((m.omega_v for m in mol.modes), default=cav.g_N / 8 or 1.0)
        self.omega_v = wv
        if span is None:
            span = 3 * cav.g_N + 10 * wv + 5 * (cav.kappa_c + kappa_m)
        centre = mol.omega_m - mol.polaron_shift / 2
        if n_points is None:
            spacing = min(cav.kappa_c, kappa_m, wv) / 8
            n_points = int(min(MAX_SCAN_POINTS, max(2001, 2 * span / spacing + 1)))
        self.grid = np.linspace(centre - span, centre + span, n_points)
        self._a_grid = self.absorption(self.grid - mol.omega_m + mol.polaron_shift)

    @property
    def bracket(self):
        return float(self.grid[0]), float(self.grid[-1])

    def _inverse(self, omega_d, a, omega_c):
        return 1j * (omega_d - omega_c) - self.cav.kappa_c / 2 + self.cav.g_N ** 2 * a

    def evaluator(self, detuning):
        """``|r(w_d)|^2`` at cavity frequency ``w_m + detuning``."""
        omega_c = self.mol.omega_m + detuning
        shift = -self.mol.omega_m + self.mol.polaron_shift

        def spectrum(omega_d):
            omega_d = np.asarray(omega_d, dtype=float)
            return np.abs(1.0 / self._inverse(omega_d, self.absorption(omega_d + shift), omega_c)) ** 2

        return spectrum

    def sampled(self, detuning):
        omega_c = self.mol.omega_m + detuning
        return self.grid, np.abs(1.0 / self._inverse(self.grid, self._a_grid, omega_c)) ** 2

    def peaks(self, detuning):
        return find_peaks(self.evaluator(detuning), self.bracket, samples=self.sampled(detuning))

    def polariton_pair(self, detuning):
        """The two dominant peaks ``(lower, upper)`` at this detuning.

        Raises
        ------
        AmbiguousSplittingError
            More than two peaks above 5% of the maximum.
        NoSplittingError
            Fewer than two.
        """
        dom = dominant_peaks(self.peaks(detuning))
        if len(dom) > 2:
            raise AmbiguousSplittingError(
                f"{len(dom)} peaks above {DOMINANCE:.0%} of the maximum at detuning {detuning:.6g}",
                n_peaks=len(dom), detuning=detuning)
        if len(dom) < 2:
            raise NoSplittingError(f"single peak at detuning {detuning:.6g}")
        return dom[0], dom[1]

    def splitting(self, detuning):
        lower, upper = self.polariton_pair(detuning)
        return upper.position - lower.position

    def linewidths(self, detuning):
        """FWHM of the (lower, upper) polariton peaks."""
        lower, upper = self.polariton_pair(detuning)
        ev = self.evaluator(detuning)
        step = (self.grid[1] - self.grid[0])
        return (fwhm(ev, lower.position, lower.height, self.bracket, step),
                fwhm(ev, upper.position, upper.height, self.bracket, step))


def _default_range(cav):
    return (-2 * cav.g_N, 2 * cav.g_N)


def _model(cav, mol, env, model):
    return PolaritonModel(cav, mol, env) if model is None else model


def rabi_splitting(cav, mol, env, detuning_range=None, model=None, step=None):
    """Minimum polariton spacing over detuning and where it occurs.

    Coarse scan with step ``w_v/4`` then bounded refinement to ``1e-4``.

    Returns
    -------
    (R, delta_R)
    """
    model = _model(cav, mol, env, model)
    lo, hi = _default_range(cav) if detuning_range is None else detuning_range
    step = model.omega_v / 4 if step is None else step
    deltas = np.arange(lo, hi + step / 2, step)
    values = np.full(deltas.shape, np.inf)
    for i, d in enumerate(deltas):
        try:
            values[i] = model.splitting(d)
        except NoSplittingError:
            continue
    if not np.isfinite(values).any():
        raise NoSplittingError("no detuning in range shows two polariton peaks")
    i = int(np.argmin(values))
    a, b = deltas[max(i - 1, 0)], deltas[min(i + 1, deltas.size - 1)]

    def objective(d):
        try:
            return model.splitting(d)
        except NoSplittingError:
            return np.inf

    res = minimize_scalar(objective, bounds=(a, b), method="bounded",
                          options={"xatol": SPLITTING_XTOL})
    if res.fun <= values[i]:
        return float(res.fun), float(res.x)
    return float(values[i]), float(deltas[i])


def equal_linewidth_detuning(cav, mol, env, detuning_range=None, model=None, step=None):
    """Detuning where the two polariton FWHMs coincide.

    Raises
    ------
    NotBracketedError
        If ``Gamma+ - Gamma-`` keeps one sign over the scanned range.
    """
    model = _model(cav, mol, env, model)
    lo, hi = _default_range(cav) if detuning_range is None else detuning_range
    step = model.omega_v / 2 if step is None else step

    def diff(d):
        lower, upper = model.linewidths(d)
        return upper - lower

    prev = None
    for d in np.arange(lo, hi + step / 2, step):
        try:
            val = diff(d)
        except (OverlappingPeaksError, NoSplittingError, AmbiguousSplittingError):
            prev = None
            continue
        if val == 0:
            return float(d)
        if prev is not None and np.sign(val) != np.sign(prev[1]):
            return float(brentq(diff, prev[0], d, xtol=LINEWIDTH_XTOL))
        prev = (d, val)
    raise NotBracketedError("linewidth difference does not change sign in the range")


def intensity_ratio(cav, mol, env, detuning, model=None):
    """Height of the upper polariton peak over that of the lower one."""
    lower, upper = _model(cav, mol, env, model).polariton_pair(detuning)
    return upper.height / lower.height


def extract_features(cav, mol, env, detuning_range=None, with_delta_gamma=True, model=None):
    """All polariton observables in one pass."""
    model = _model(cav, mol, env, model)
    r, delta_r = rabi_splitting(cav, mol, env, detuning_range, model)
    lower, upper = model.polariton_pair(delta_r)
    gamma_minus, gamma_plus = model.linewidths(delta_r)
    delta_gamma = None
    if with_delta_gamma:
        try:
            delta_gamma = equal_linewidth_detuning(cav, mol, env, detuning_range, model)
        except NotBracketedError:
            delta_gamma = None
    return PolaritonFeatures(
        omega_plus=upper.position,
        omega_minus=lower.position,
        rabi_splitting=r,
        delta_R=delta_r,
        linewidth_plus=gamma_plus,
        linewidth_minus=gamma_minus,
        intensity_ratio=upper.height / lower.height,
        delta_Gamma=delta_gamma,
    )


def absorption_fwhm(absorption, bracket=None, n_scan=20001):
    """FWHM of the absorption profile ``Re(-A)`` around its global maximum."""
    if bracket is None:
        half = 40 * absorption.kappa_m + 60
        bracket = (-half, half)
    grid = np.linspace(bracket[0], bracket[1], n_scan)
    values = absorption.profile(grid)
    peaks = find_peaks(absorption.profile, bracket, samples=(grid, values))
    top = max(peaks, key=lambda p: p.height)
    return fwhm(absorption.profile, top.position, top.height, bracket, grid[1] - grid[0])


__all__ = [
    "Peak", "PolaritonFeatures", "PolaritonModel", "find_peaks", "dominant_peaks",
    "fwhm", "rabi_splitting", "equal_linewidth_detuning", "intensity_ratio", "extract_features",
    "absorption_fwhm",
]
