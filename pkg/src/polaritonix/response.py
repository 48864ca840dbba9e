"""Absorption function, cavity response and the coupled-oscillator baseline.

The molecular absorption function is

    A(w) = int dE P(E) / (i (w - E) - kappa_m / 2),

the convolution of P(E) with the electronic susceptibility
``chi(w) = 1/(i w - kappa_m/2) = -pi (f + i g)(w; 0, kappa_m/2)``.  Since P
is a Lorentzian mixture, A is one too and is evaluated exactly at any
frequency.  The elastic cavity transmission is ``|r(w_d)|^2`` with

    r(w_d) = 1 / [i (w_d - w_c) - kappa_c/2 + g_N^2 A(w_d - w_m + shift)]

where ``shift = sum_i M_i S_i w_v,i`` is the polaron shift.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .lineshapes import Mixture, convolve
from .pe import DEFAULT_TOLERANCE, MAX_ORDER, VibrationalMode, total_pe

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_GRID_POINTS = 2**15


@dataclass(frozen=True)
class CavityParams:
    """Cavity frequency, cavity loss rate and collective coupling ``g_N``."""

    omega_c: float
    kappa_c: float
    g_N: float

    def __post_init__(self):
        if not self.kappa_c > 0:
            raise ConfigurationError("kappa_c must be positive")
        if self.g_N < 0:
            raise ConfigurationError("g_N must be non-negative")


@dataclass(frozen=True)
class MoleculeParams:
    """Electronic transition with its vibrational modes.

    ``kappa_tilde`` is the purely electronic loss rate; the effective
    linewidth adds ``S gamma`` for every mode (see :func:`effective_kappa_m`).
    """

    omega_m: float
    kappa_tilde: float = 0.0
    modes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kappa_tilde < 0:
            raise ConfigurationError("kappa_tilde must be non-negative")
        modes = tuple(self.modes)
        if not all(isinstance(m, VibrationalMode) for m in modes):
            raise ConfigurationError("modes must be VibrationalMode instances")
        object.__setattr__(self, "modes", modes)

    @property
    def polaron_shift(self):
        """``sum M S w_v`` using the bare vibrational frequencies."""
        return sum(m.total_huang_rhys * m.omega_v for m in self.modes)


@dataclass(frozen=True)
class Spectrum:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        if grid.shape != values.shape or grid.ndim != 1:
            raise DomainError("grid and values must be one-dimensional and of equal length")
        if grid.size > 1:
            step = np.diff(grid)
            if np.any(step <= 0):
                raise DomainError("grid must be strictly increasing")
            if not np.allclose(step, step[0], rtol=1e-8, atol=0):
                raise DomainError("grid must be uniform")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self):
        return float(self.grid[1] - self.grid[0]) if self.grid.size > 1 else 0.0


def effective_kappa_m(mol):
    """``kappa_tilde + sum_i M_i S_i w_v,i / Q_i``.

    Raises
    ------
    ConfigurationError
        If the molecule has no dissipation channel at all.
    """
    kappa = mol.kappa_tilde + sum(m.total_huang_rhys * m.damping for m in mol.modes)
    if not kappa > 0:
        raise ConfigurationError("molecule has no dissipation: kappa_m must be positive")
    return kappa


class AbsorptionFunction:
    """Complex absorption function ``A(w)`` backed by a Lorentzian mixture.

    ``A(w) = mixture.analytic(w)``; the absorption profile of the bare
    molecule is ``Re(-A)``.
    """

    def __init__(self, mixture, kappa_m):
        self.mixture = mixture
        self.kappa_m = kappa_m

    def __call__(self, omega):
        return self.mixture.analytic(omega)

    def profile(self, omega):
        """Absorption profile ``Re(-A(w))``."""
        return -self(omega).real

    def __len__(self):
        return len(self.mixture)


def susceptibility_mixture(kappa_m):
    """``chi = 1/(i w - kappa_m/2)`` as a one-atom mixture (amplitude ``-pi``)."""
    return Mixture([-np.pi], [0.0], [kappa_m / 2])


def absorption_mixture(mol, env, tolerance=DEFAULT_TOLERANCE, max_order=MAX_ORDER, pe=None):
    """Build ``A = P * chi`` in closed form.

    Parameters
    ----------
    mol : MoleculeParams
    env : ThermalEnv
    pe : Mixture, optional
        Precomputed P(E); computed with :func:`total_pe` when omitted.

    Returns
    -------
    AbsorptionFunction
    """
    kappa_m = effective_kappa_m(mol)
    if pe is None:
        pe = total_pe(list(mol.modes), env, tolerance=tolerance, max_order=max_order)
    return AbsorptionFunction(convolve(pe, susceptibility_mixture(kappa_m)), kappa_m)


def _inverse_response(cav, mol, absorption, omega_d):
    omega_d = np.asarray(omega_d, dtype=float)
    a = absorption(omega_d - mol.omega_m + mol.polaron_shift)
    return 1j * (omega_d - cav.omega_c) - cav.kappa_c / 2 + cav.g_N ** 2 * a


def response_function(cav, mol, env, omega_d, absorption=None):
    """Cavity response ``r(w_d)``; pass ``absorption`` to reuse a built A."""
    if absorption is None:
        absorption = absorption_mixture(mol, env)
    return 1.0 / _inverse_response(cav, mol, absorption, omega_d)


def default_grid(cav, mol, n_points=DEFAULT_GRID_POINTS):
    """Uniform grid centred at ``w_m``.

    The half-span ``max(40 w_v, 5 g_N, 10 kappa_m)`` leaves room for the heavy
    Lorentzian tails; ``w_v`` is the largest mode frequency (1 when there are
    no modes).
    """
    wv = max((m.omega_v for m in mol.modes), default=1.0)
    half = max(40 * wv, 5 * cav.g_N, 10 * effective_kappa_m(mol))
    return np.linspace(mol.omega_m - half, mol.omega_m + half, n_points)


def elastic_spectrum(cav, mol, env, grid=None, absorption=None):
    """``|r(w_d)|^2`` sampled on a uniform grid.

    Warns when the grid spacing exceeds both ``kappa_c/4`` and ``kappa_m/4``
    because narrow features may then fall between samples.
    """
    if absorption is None:
        absorption = absorption_mixture(mol, env)
    grid = default_grid(cav, mol) if grid is None else np.asarray(grid, dtype=float)
    spectrum = Spectrum(grid, np.zeros(grid.shape))
    kappa_m = absorption.kappa_m
    if spectrum.spacing > cav.kappa_c / 4 and spectrum.spacing > kappa_m / 4:
        warnings.warn(
            f"grid spacing {spectrum.spacing:.3g} is coarser than a quarter of both "
            f"kappa_c={cav.kappa_c:.3g} and kappa_m={kappa_m:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    values = np.abs(response_function(cav, mol, env, grid, absorption)) ** 2
    return Spectrum(grid, values)


@dataclass(frozen=True)
class CoupledOscillatorResult:
    """Eigenfrequencies of the two-mode model and its spectrum.

    ``omega_plus``/``omega_minus`` are real without dissipation and complex
    (imaginary part ``-linewidth``) with it.
    """

    omega_plus: complex
    omega_minus: complex
    spectrum: Spectrum


def coupled_oscillator_reference(cav, kappa_m, detuning, grid=None):
    """Lorentzian-molecule baseline at detuning ``w_c - w_m``.

    The eigenfrequencies diagonalise ``[[w_c - i kc, g], [g, w_m - i km]]``;
    at resonance this gives ``w_m - i (kc + km)/2 +- sqrt(g^2 - (kc - km)^2/4)``.
    The spectrum is the cavity response with ``P(E) = delta(E)``, i.e. a
    molecule with susceptibility ``1/(i w - kappa_m/2)``.
    """
    if not kappa_m > 0:
        raise ConfigurationError("kappa_m must be positive")
    omega_m = cav.omega_c - detuning
    mean = 0.5 * (cav.omega_c + omega_m) - 0.5j * (cav.kappa_c + kappa_m)
    half_gap = 0.5 * (cav.omega_c - omega_m) - 0.5j * (cav.kappa_c - kappa_m)
    root = np.sqrt(complex(cav.g_N ** 2 + half_gap ** 2))
    # order the branches by real part
    if root.real < 0 or (root.real == 0 and root.imag < 0):
        root = -root
    mol = MoleculeParams(omega_m, kappa_m)
    grid = default_grid(cav, mol) if grid is None else np.asarray(grid, dtype=float)
    a = AbsorptionFunction(susceptibility_mixture(kappa_m), kappa_m)
    values = np.abs(1.0 / _inverse_response(cav, mol, a, grid)) ** 2
    return CoupledOscillatorResult(complex(mean + root), complex(mean - root), Spectrum(grid, values))


def undamped_polariton_frequencies(omega_c, omega_m, g):
    """``(w_c + w_m)/2 +- sqrt(g^2 + (w_c - w_m)^2/4)``."""
    root = math.sqrt(g * g + 0.25 * (omega_c - omega_m) ** 2)
    mid = 0.5 * (omega_c + omega_m)
    return mid + root, mid - root


def resonance_peaks(omega_m, g, kappa_c, kappa_m):
    """Maxima of ``|r|^2`` at ``w_c = w_m`` without vibrations.

    ``w_m +- sqrt(g^2 sqrt(1 + km (km + kc) / (2 g^2)) - km^2/4)``.
    """
    inner = g * g * math.sqrt(1 + kappa_m * (kappa_m + kappa_c) / (2 * g * g)) - kappa_m ** 2 / 4
    if inner <= 0:
        raise DomainError("dissipation too strong: the two peaks have merged")
    root = math.sqrt(inner)
    return omega_m + root, omega_m - root


def cavity_frequency_from_geometry(length, angle, n_eff, speed_of_light=SPEED_OF_LIGHT):
    """Fabry-Perot frequency ``(pi c / L) / sqrt(1 - sin^2(alpha) / n_eff^2)``.

    ``angle`` is in radians; ``n_eff=inf`` gives the normal-incidence value.
    """
    if not length > 0:
        raise DomainError("cavity length must be positive")
    if not n_eff > 0:
        raise DomainError("n_eff must be positive")
    s = abs(math.sin(angle))
    if s >= n_eff:
        raise DomainError("|sin(angle)| must be smaller than n_eff")
    return (math.pi * speed_of_light / length) / math.sqrt(1.0 - (s / n_eff) ** 2)
