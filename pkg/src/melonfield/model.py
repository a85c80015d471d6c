"""Closed-form leading-order and next-to-leading-order quantities.

The model is the D-color intermediate-field matrix model with weight

    exp(-(N^(D-1)/2) sum_c Tr M_c^2) / det(1 + i sqrt(lam/2) sum_c (M_c
    embedded in the N^D-dimensional tensor product space)).

At leading order in 1/N all eigenvalues of every color collapse onto a
single purely imaginary point ``alpha``; the next order spreads them into
a semicircle of scale ``s = 1 - alpha^2`` around it.  This module holds
the closed forms for the collapse point, the saddle partition function,
the 2-point function, the limiting semicircle law and its resolvents.

Everything here is pure double-precision arithmetic; ``*_hp`` variants
re-evaluate the same formulas with mpmath at >= 50 digits and serve as
the documented cross-check path.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import BranchCutError, DomainError, PoleError

#: Documented lambda -> 0 limit of the collapse point (the closed form has
#: numerator ~ D*lam, so the limit is exactly zero).
ALPHA_AT_ZERO_COUPLING = 0j

#: Documented lambda -> 0 limit of the 2-point function.
G2_AT_ZERO_COUPLING = 2.0


@dataclass(frozen=True)
class ModelParams:
    """One model instance: D colors, matrix size N, coupling lambda >= 0."""

    colors: int
    size: int
    coupling: float

    def __post_init__(self):
        if self.colors < 1:
            raise DomainError(f"colors must be >= 1, got {self.colors}")
        if self.size < 1:
            raise DomainError(f"size must be >= 1, got {self.size}")
        if self.coupling < 0:
            raise DomainError(f"coupling must be >= 0, got {self.coupling}")


@dataclass(frozen=True)
class LOQuantities:
    """Leading-order observables of one model instance."""

    alpha: complex
    log_z_saddle: float
    g2: float


@dataclass(frozen=True)
class SemicircleLaw:
    """Limiting law of the rescaled fluctuations around the collapse point.

    ``scale`` is s = 1 - alpha^2 (real and > 1 for lam > 0, exactly 1 at
    lam = 0) and ``half_width`` is r = 2/sqrt(s).  The density is
    rho(x) = (s/2pi) sqrt(r^2 - x^2) on [-r, r] and integrates to one;
    r * sqrt(s) = 2 holds exactly.
    """

    scale: float
    half_width: float

    @classmethod
    def from_scale(cls, scale: float) -> "SemicircleLaw":
        if scale <= 0:
            raise DomainError(f"scale must be positive, got {scale}")
        return cls(scale=scale, half_width=2.0 / math.sqrt(scale))

    @property
    def second_moment(self) -> float:
        return 1.0 / self.scale

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(self.half_width**2 - x**2, 0.0, None)
        return np.where(
            np.abs(x) <= self.half_width,
            self.scale / (2.0 * math.pi) * np.sqrt(inside),
            0.0,
        )

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        u = np.clip(x / self.half_width, -1.0, 1.0)
        inner = u * np.sqrt(np.clip(1.0 - u**2, 0.0, None)) + np.arcsin(u)
        return 0.5 + inner / math.pi

    def quantile(self, q: float) -> float:
        from scipy.optimize import brentq

        if not 0.0 < q < 1.0:
            raise DomainError(f"quantile level must be in (0,1), got {q}")
        r = self.half_width
        return brentq(lambda x: float(self.cdf(x)) - q, -r, r, xtol=1e-14)


def alpha_lo(colors: int, coupling: float) -> complex:
    """Collapse point of the leading-order eigenvalue distribution.

    Returns the small-modulus root of
    i sqrt(lam/2) D alpha^2 + alpha + i sqrt(lam/2) = 0, i.e.
    alpha = (-1 + sqrt(1 + 2 D lam)) / (2 i D sqrt(lam/2)),
    evaluated in the cancellation-free form
    alpha = -i sqrt(2 lam) / (1 + sqrt(1 + 2 D lam)).

    Purely imaginary with non-positive imaginary part for lam > 0.
    Raises DomainError for lam <= 0; see ALPHA_AT_ZERO_COUPLING for the
    documented limit.
    """
    if colors < 1:
        raise DomainError(f"colors must be >= 1, got {colors}")
    if coupling <= 0:
        raise DomainError(
            "alpha_lo requires coupling > 0; the lambda -> 0 limit is the "
            "documented constant ALPHA_AT_ZERO_COUPLING"
        )
    return -1j * math.sqrt(2.0 * coupling) / (1.0 + math.sqrt(1.0 + 2.0 * colors * coupling))


def alpha_lo_hp(colors: int, coupling, dps: int = 50) -> mp.mpc:
    """Same closed form evaluated verbatim with mpmath at >= 50 digits."""
    with mp.workdps(dps):
        lam = mp.mpf(str(coupling)) if not isinstance(coupling, mp.mpf) else coupling
        d = mp.mpf(colors)
        return (-1 + mp.sqrt(1 + 2 * d * lam)) / (2j * d * mp.sqrt(lam / 2))


def log_z_saddle(params: ModelParams) -> float:
    """Log of the saddle-point partition function, evaluated verbatim.

    log Z = (N^D/2) log(1 + 2 D lam)
          - (N^D/(4 D lam)) (1 + 2 D lam - 2 sqrt(1 + 2 D lam))

    Kept in log space throughout; the formula diverges as lam -> 0 and no
    limit is exposed.  The free energy is -log Z; no separate formula.
    """
    if params.coupling <= 0:
        raise DomainError("log_z_saddle requires coupling > 0")
    d, lam = params.colors, params.coupling
    nd = float(params.size) ** d
    u = math.sqrt(1.0 + 2.0 * d * lam)
    return nd * (0.5 * math.log1p(2.0 * d * lam) - (1.0 + 2.0 * d * lam - 2.0 * u) / (4.0 * d * lam))


def log_z_saddle_hp(colors: int, size: int, coupling, dps: int = 50) -> mp.mpf:
    """High-precision verbatim evaluation of the log_z_saddle formula."""
    with mp.workdps(dps):
        lam = mp.mpf(str(coupling)) if not isinstance(coupling, mp.mpf) else coupling
        d = mp.mpf(colors)
        nd = mp.mpf(size) ** d
        u = mp.sqrt(1 + 2 * d * lam)
        return nd * (mp.log(1 + 2 * d * lam) / 2 - (1 + 2 * d * lam - 2 * u) / (4 * d * lam))


def g2_lo(colors: int, coupling: float) -> float:
    """Leading-order 2-point function (2/(D lam)) (-1 + sqrt(1 + 2 D lam)).

    Evaluated as 4 / (1 + sqrt(1 + 2 D lam)), which is the same value
    without subtractive cancellation and extends continuously to the
    documented lam = 0 limit of 2.  Equals (2 i sqrt 2 / sqrt lam) alpha.
    """
    if colors < 1:
        raise DomainError(f"colors must be >= 1, got {colors}")
    if coupling < 0:
        raise DomainError(f"coupling must be >= 0, got {coupling}")
    return 4.0 / (1.0 + math.sqrt(1.0 + 2.0 * colors * coupling))


def g2_lo_hp(colors: int, coupling, dps: int = 50) -> mp.mpf:
    """Verbatim high-precision evaluation of the g2 closed form."""
    with mp.workdps(dps):
        lam = mp.mpf(str(coupling)) if not isinstance(coupling, mp.mpf) else coupling
        d = mp.mpf(colors)
        return (2 / (d * lam)) * (-1 + mp.sqrt(1 + 2 * d * lam))


def lo_quantities(params: ModelParams) -> LOQuantities:
    """Bundle alpha, log Z and G2 for one instance (coupling > 0)."""
    return LOQuantities(
        alpha=alpha_lo(params.colors, params.coupling),
        log_z_saddle=log_z_saddle(params),
        g2=g2_lo(params.colors, params.coupling),
    )


def semicircle_law(colors: int, coupling: float) -> SemicircleLaw:
    """Limiting fluctuation law with scale s = 1 - alpha^2.

    At lam = 0 the documented limit s = 1, r = 2 (pure Gaussian) applies.
    """
    if coupling == 0:
        return SemicircleLaw.from_scale(1.0)
    a = alpha_lo(colors, coupling)
    # alpha is purely imaginary, so s = 1 + |alpha|^2 is real.
    s = 1.0 + abs(a) ** 2
    return SemicircleLaw.from_scale(s)


def nlo_resolvent(x: complex, law: SemicircleLaw, side: str | None = None) -> complex:
    """Stieltjes transform of the semicircle law, decaying branch.

    Solves W^2 - s x W + s = 0 with W(x) ~ 1/x as |x| -> infinity:
    W = (s x - sqrt(s^2 x^2 - 4 s)) / 2, with the square-root branch cut
    on [-r, r].  For real x strictly inside the cut a ``side`` of
    ``"above"`` or ``"below"`` must name the boundary value wanted.
    """
    s, r = law.scale, law.half_width
    z = complex(x)
    if z.imag == 0.0 and abs(z.real) < r:
        if side == "above":
            root = 1j * math.sqrt(r * r - z.real * z.real)
        elif side == "below":
            root = -1j * math.sqrt(r * r - z.real * z.real)
        else:
            raise BranchCutError(
                f"x={x} lies on the cut (-{r}, {r}); pass side='above' or 'below'"
            )
        return 0.5 * s * (z.real - root)
    # sqrt(x-r)*sqrt(x+r) with principal branches puts the cut exactly on
    # [-r, r] and behaves like x at infinity, which selects the decaying root.
    root = cmath.sqrt(z - r) * cmath.sqrt(z + r)
    return 0.5 * s * (z - root)


def total_resolvent(x: complex, params: ModelParams) -> complex:
    """Resolvent of one matrix through next-to-leading order.

    1/(x - alpha) plus N^(-(D-2)/2) times the fluctuation resolvent
    evaluated in the fluctuation variable x - alpha (fluctuations are
    defined relative to the collapse point).
    """
    a = alpha_lo(params.colors, params.coupling)
    z = complex(x)
    if z == a:
        raise PoleError(f"total_resolvent has a pole at x = alpha = {a}")
    law = semicircle_law(params.colors, params.coupling)
    prefactor = float(params.size) ** (-(params.colors - 2) / 2.0)
    return 1.0 / (z - a) + prefactor * nlo_resolvent(z - a, law)
