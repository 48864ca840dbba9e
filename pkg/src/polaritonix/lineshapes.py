"""Lorentzian mixtures and their closed-form convolution algebra.

A mixture is a weighted sum of the Cauchy-Lorentz density

    f(w; c, G) = (1/pi) G / ((w - c)**2 + G**2)

and of its Hilbert transform

    g(w; c, G) = (1/pi) (w - c) / ((w - c)**2 + G**2).

Each term is stored as one complex amplitude ``a``: ``Re(a)`` multiplies
``f`` and ``Im(a)`` multiplies ``g``.  With this encoding the convolution
rules f*f = f, g*f = g, g*g = -f reduce to multiplication of the complex
amplitudes, while centers and half-widths add.
"""
from typing import NamedTuple

import numpy as np

from .errors import DomainError

PRUNE_FLOOR = 1e-14
MERGE_RTOL = 1e-12
_CHUNK = 2**22
# extended precision: alternating Poisson series cancel strongly for overdamped modes
AMPLITUDE_DTYPE = np.clongdouble


def eval_f(omega, center, half_width):
    """Cauchy-Lorentz density with the given center and half-width."""
    half_width = np.asarray(half_width, dtype=float)
    if np.any(half_width <= 0):
        raise DomainError("half_width must be positive")
    x = np.asarray(omega, dtype=float) - center
    return half_width / (np.pi * (x * x + half_width * half_width))


def eval_g(omega, center, half_width):
    """Hilbert transform of :func:`eval_f`; odd about ``center``."""
    half_width = np.asarray(half_width, dtype=float)
    if np.any(half_width <= 0):
        raise DomainError("half_width must be positive")
    x = np.asarray(omega, dtype=float) - center
    return x / (np.pi * (x * x + half_width * half_width))


class PoleAtom(NamedTuple):
    amplitude: complex
    center: float
    half_width: float


def _frozen(x, dtype):
    x = np.array(x, dtype=dtype, ndmin=1)
    x.setflags(write=False)
    return x


class Mixture:
    """Immutable weighted sum of f/g Lorentzian atoms.

    Parameters
    ----------
    amplitudes : array_like of complex
        ``Re`` weights the Lorentzian, ``Im`` weights its Hilbert transform.
    centers, half_widths : array_like of float
        Half-width zero marks a Dirac delta (real part) or a principal
        value ``1/(pi w)`` (imaginary part).  Such atoms must be widened by a
        later convolution before the mixture can be evaluated.
    """

    __slots__ = ("amplitudes", "centers", "half_widths")

    def __init__(self, amplitudes, centers, half_widths):
        amplitudes = _frozen(amplitudes, AMPLITUDE_DTYPE)
        centers = _frozen(centers, float)
        half_widths = _frozen(half_widths, float)
        if not (amplitudes.shape == centers.shape == half_widths.shape):
            raise DomainError("amplitudes, centers and half_widths differ in length")
        if amplitudes.ndim != 1:
            raise DomainError("mixture arrays must be one dimensional")
        if np.any(half_widths < 0):
            raise DomainError("negative half-width")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "half_widths", half_widths)

    def __setattr__(self, name, value):
        raise AttributeError("Mixture is immutable")

    @classmethod
    def from_atoms(cls, atoms):
        atoms = list(atoms)
        if not atoms:
            return cls([], [], [])
        a, c, w = zip(*atoms)
        return cls(a, c, w)

    @classmethod
    def delta(cls, weight=1.0, center=0.0):
        return cls([weight], [center], [0.0])

    @classmethod
    def lorentzian(cls, center, half_width, weight=1.0):
        return cls([weight], [center], [half_width])

    @classmethod
    def hilbert(cls, center, half_width, weight=1.0):
        return cls([1j * weight], [center], [half_width])

    def __len__(self):
        return self.amplitudes.size

    def __iter__(self):
        for a, c, w in zip(self.amplitudes, self.centers, self.half_widths):
            yield PoleAtom(complex(a), float(c), float(w))

    def __repr__(self):
        return f"Mixture({len(self)} atoms, total={self.total_amplitude():.6g})"

    @property
    def atoms(self):
        return list(self)

    def total_amplitude(self):
        """Sum of the complex amplitudes; its real part is the integral."""
        if not len(self):
            return 0j
        return complex(np.sort(self.amplitudes.real).sum()) + 1j * float(np.sort(self.amplitudes.imag).sum())

    def integral(self):
        return self.total_amplitude().real

    def is_regular(self):
        """True when every atom has a positive width (pointwise evaluable)."""
        return bool(np.all(self.half_widths > 0))

    def scaled(self, factor):
        return Mixture(self.amplitudes * factor, self.centers, self.half_widths)

    def shifted(self, offset):
        return Mixture(self.amplitudes, self.centers + offset, self.half_widths)

    def widened(self, extra):
        """Convolution with a unit Lorentzian of half-width ``extra``."""
        if extra < 0:
            raise DomainError("extra width must be non-negative")
        return Mixture(self.amplitudes, self.centers, self.half_widths + extra)

    def reflected(self):
        """The mixture of ``E -> -E``: centers flip and g-parts change sign."""
        return Mixture(np.conj(self.amplitudes), -self.centers, self.half_widths)

    def _kernel(self, omega):
        # (i/pi) / (w - c + iG) == f + i g
        omega = np.asarray(omega, dtype=float)
        flat = omega.ravel()
        out = np.empty(flat.shape, dtype=complex)
        step = max(1, _CHUNK // max(len(self), 1))
        ca = np.conj(self.amplitudes).astype(complex)
        for i in range(0, flat.size, step):
            x = flat[i:i + step, None] - self.centers[None, :] + 1j * self.half_widths[None, :]
            out[i:i + step] = (1j / np.pi) * (ca[None, :] / x).sum(axis=1)
        return out.reshape(omega.shape)

    def __call__(self, omega):
        """Evaluate the real density ``sum Re(a) f + Im(a) g`` at ``omega``."""
        if not self.is_regular():
            raise DomainError("mixture contains zero-width atoms; widen it before evaluation")
        return self._kernel(omega).real

    def evaluate(self, omega):
        return self(omega)

    def analytic(self, omega):
        """Evaluate ``sum conj(a) (f + i g)``.

        The real part is the density itself.  For a probability density P
        this equals ``(i/pi) * int P(E) / (omega - E + i0) dE``, i.e. the
        boundary value of its Cauchy transform.
        """
        if not self.is_regular():
            raise DomainError("mixture contains zero-width atoms; widen it before evaluation")
        return self._kernel(omega)

    def simplified(self, prune_floor=PRUNE_FLOOR, merge_rtol=MERGE_RTOL):
        """Merge coincident atoms and drop negligible ones."""
        return _simplify(self.amplitudes, self.centers, self.half_widths, prune_floor, merge_rtol)


def _simplify(a, c, w, prune_floor, merge_rtol):
    if a.size == 0:
        return Mixture(a, c, w)
    if merge_rtol is not None and a.size > 1:
        scale = max(np.abs(c).max(), w.max(), np.finfo(float).tiny)
        q = scale * merge_rtol
        keys = np.stack([np.round(c / q), np.round(w / q)], axis=1).astype(np.int64)
        order = np.lexsort((keys[:, 1], keys[:, 0]))
        keys = keys[order]
        starts = np.flatnonzero(np.r_[True, np.any(keys[1:] != keys[:-1], axis=1)])
        if starts.size < a.size:
            a = np.add.reduceat(a[order], starts)
            c, w = c[order][starts], w[order][starts]
    if prune_floor:
        mag = np.abs(a)
        keep = mag >= prune_floor * mag.max()
        a, c, w = a[keep], c[keep], w[keep]
    order = np.lexsort((c, w))
    return Mixture(a[order], c[order], w[order])


def convolve(a, b, prune_floor=PRUNE_FLOOR, merge_rtol=MERGE_RTOL):
    """Closed-form convolution of two mixtures.

    Every pair of atoms produces one atom whose amplitude is the complex
    product and whose center and half-width are the sums.  Coincident atoms
    are merged and atoms below ``prune_floor`` times the largest amplitude
    are dropped (pass ``prune_floor=0`` to keep everything).
    """
    if len(a) == 0 or len(b) == 0:
        return Mixture([], [], [])
    amp = np.multiply.outer(a.amplitudes, b.amplitudes).ravel()
    cen = np.add.outer(a.centers, b.centers).ravel()
    wid = np.add.outer(a.half_widths, b.half_widths).ravel()
    return _simplify(amp, cen, wid, prune_floor, merge_rtol)


def convolve_all(mixtures, **kwargs):
    """Fold :func:`convolve` over an iterable; the empty fold is a unit delta."""
    out = Mixture.delta()
    for m in mixtures:
        out = convolve(out, m, **kwargs)
    return out
