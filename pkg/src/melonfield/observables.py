"""Hermite-polynomial dictionary between tensor and matrix moments.

The Hermite family used here is the monic one attached to the Gaussian
weight exp(-x^2/(2 sigma^2)):

    H_0 = 1,  H_1 = x,  H_{p+1} = x H_p - p sigma^2 H_{p-1}.

For sigma^2 = 1 this is the generator-defined family (H_2 = x^2 - 1); the
variant sigma^2 = 1/2 reproduces the alternative printed inversion
coefficients n!/(4^k k! (n-2k)!).  Both conventions are exposed and the
default is sigma^2 = 1.

The moment dictionary is, per color c and with nu(lam) = 2 i sqrt(2)/sqrt(lam):

    <Tr Theta_c^p>  = nu^p <Tr H_p(M_c)>          (theta_from_matrix)
    <Tr M_c^p>      = sum_k c_k nu^(2k-p) ... via x^n = sum c_k H_{n-2k}
                                                   (matrix_from_theta)

Matrix Hermite moments are evaluated spectrally, sum_k H_p(eigenvalue_k),
and the recurrence extends verbatim to complex eigenvalues.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import DomainError, InsufficientMomentsError
from .model import SemicircleLaw

DEFAULT_VARIANCE = Fraction(1)


def hermite_eval(p: int, x, variance=DEFAULT_VARIANCE):
    """Evaluate the degree-p monic Hermite polynomial at x (real or complex)."""
    if p < 0:
        raise DomainError(f"degree must be >= 0, got {p}")
    s2 = float(variance)
    prev, cur = 1.0 + 0.0 * x, x
    if p == 0:
        return prev
    for q in range(1, p):
        prev, cur = cur, x * cur - q * s2 * prev
    return cur


def monomial_to_hermite(n: int, variance=DEFAULT_VARIANCE) -> list:
    """Exact coefficients c_k with x^n = sum_k c_k H_{n-2k}(x; sigma^2).

    c_k = n! sigma^(2k) / (2^k k! (n-2k)!); only same-parity Hermite
    degrees appear.
    """
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    s2 = Fraction(variance)
    return [
        Fraction(factorial(n), 2**k * factorial(k) * factorial(n - 2 * k)) * s2**k
        for k in range(n // 2 + 1)
    ]


@dataclass(frozen=True)
class HermiteBasisMap:
    """Triangular exact-rational change of basis monomials <-> Hermite.

    ``to_hermite[n]`` lists c_k for x^n = sum c_k H_{n-2k};
    ``to_monomial[p]`` lists the monomial coefficients of H_p (degree p
    down to degree p mod 2, same parity only).
    """

    degree: int
    variance: Fraction
    to_hermite: tuple = field(init=False)
    to_monomial: tuple = field(init=False)

    def __post_init__(self):
        if self.degree < 0:
            raise DomainError(f"degree must be >= 0, got {self.degree}")
        s2 = Fraction(self.variance)
        object.__setattr__(self, "variance", s2)
        if s2 <= 0:
            raise DomainError(f"variance must be positive, got {s2}")
        # Hermite -> monomial by the recurrence, exact.
        polys = [[Fraction(1)], [Fraction(0), Fraction(1)]]
        for p in range(1, self.degree):
            prev, cur = polys[p - 1], polys[p]
            nxt = [Fraction(0)] + cur
            for i, c in enumerate(prev):
                nxt[i] -= p * s2 * c
            while len(nxt) < p + 2:
                nxt.append(Fraction(0))
            polys.append(nxt)
        object.__setattr__(
            self, "to_monomial", tuple(tuple(c) for c in polys[: self.degree + 1])
        )
        object.__setattr__(
            self,
            "to_hermite",
            tuple(tuple(monomial_to_hermite(n, s2)) for n in range(self.degree + 1)),
        )

    def hermite_to_power_moments(self, hermite_moments) -> list:
        """Convert <H_q> tables to <x^q> tables (q up to their length - 1)."""
        out = []
        for q in range(len(hermite_moments)):
            acc = 0
            for k, c_k in enumerate(self.to_hermite[q]):
                acc = acc + float(c_k) * hermite_moments[q - 2 * k]
            out.append(acc)
        return out

    def power_to_hermite_moments(self, power_moments) -> list:
        """Convert <x^q> tables to <H_q> tables."""
        out = []
        for q in range(len(power_moments)):
            acc = 0
            for j, c in enumerate(self.to_monomial[q]):
                if c:
                    acc = acc + float(c) * power_moments[j]
            out.append(acc)
        return out


def coupling_factor(coupling: float) -> complex:
    """The per-power dictionary constant 2 i sqrt(2) / sqrt(lam)."""
    if coupling <= 0:
        raise DomainError(f"coupling must be > 0, got {coupling}")
    return 2j * cmath.sqrt(2.0) / cmath.sqrt(coupling)


def theta_from_matrix(p: int, matrix_hermite_moments, coupling: float) -> complex:
    """<Tr Theta_c^p> from the table of matrix Hermite moments <Tr H_q(M_c)>."""
    if p < 0:
        raise DomainError(f"p must be >= 0, got {p}")
    if len(matrix_hermite_moments) <= p:
        raise InsufficientMomentsError(
            f"need Hermite moments through degree {p}, got {len(matrix_hermite_moments)}"
        )
    return coupling_factor(coupling) ** p * complex(matrix_hermite_moments[p])


def matrix_from_theta(
    p: int, theta_moments, coupling: float, variance=DEFAULT_VARIANCE
) -> complex:
    """<Tr M_c^p> from the tower of <Tr Theta_c^q>, q <= p, same parity.

    Applies x^p = sum_k c_k H_{p-2k} with <Tr H_q(M_c)> mapped back to
    theta moments through the inverse dictionary constant.
    """
    if p < 0:
        raise DomainError(f"p must be >= 0, got {p}")
    if len(theta_moments) <= p:
        raise InsufficientMomentsError(
            f"need theta moments through power {p}, got {len(theta_moments)}"
        )
    inv = 1.0 / coupling_factor(coupling)
    acc = 0j
    for k, c_k in enumerate(monomial_to_hermite(p, variance)):
        q = p - 2 * k
        acc += float(c_k) * inv**q * complex(theta_moments[q])
    return acc


def spectral_hermite_moments(eigenvalues, max_degree: int, variance=DEFAULT_VARIANCE) -> list:
    """<Tr H_q(M)> for q = 0..max_degree from the eigenvalue list."""
    vals = np.asarray(eigenvalues, dtype=complex)
    s2 = float(variance)
    moments = []
    prev = np.ones_like(vals)
    moments.append(complex(prev.sum()))
    if max_degree == 0:
        return moments
    cur = vals.copy()
    moments.append(complex(cur.sum()))
    for q in range(1, max_degree):
        prev, cur = cur, vals * cur - q * s2 * prev
        moments.append(complex(cur.sum()))
    return moments


def empirical_ks(samples, law: SemicircleLaw) -> float:
    """Kolmogorov-Smirnov sup-distance between samples and the law's CDF."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise DomainError("empirical_ks requires at least one sample")
    cdf = law.cdf(xs)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(cdf - upper), np.abs(cdf - lower))))
