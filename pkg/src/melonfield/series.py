"""Exact-rational truncated power series and the coupling expansions.

All coefficients are ``fractions.Fraction``; no floating point enters this
module.  Binary operations truncate to the smaller order of the two
operands, so precision never silently inflates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import DomainError, MelonfieldError


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


@dataclass(frozen=True)
class RationalSeries:
    """Truncated power series with exact rational coefficients.

    ``coefficients[n]`` multiplies the n-th power of the coupling;
    the length is always ``order + 1``.
    """

    coefficients: tuple
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise DomainError(f"order must be >= 0, got {self.order}")
        coeffs = tuple(_as_fraction(c) for c in self.coefficients)
        if len(coeffs) != self.order + 1:
            raise DomainError(
                f"expected {self.order + 1} coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_coefficients(cls, coeffs) -> "RationalSeries":
        coeffs = list(coeffs)
        return cls(coefficients=tuple(coeffs), order=len(coeffs) - 1)

    @classmethod
    def constant(cls, value, order: int) -> "RationalSeries":
        return cls(
            coefficients=(_as_fraction(value),) + (Fraction(0),) * order,
            order=order,
        )

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficients[n]

    def truncate(self, order: int) -> "RationalSeries":
        if order >= self.order:
            return self
        return RationalSeries(self.coefficients[: order + 1], order)

    def __add__(self, other: "RationalSeries") -> "RationalSeries":
        n = min(self.order, other.order)
        return RationalSeries(
            tuple(self[i] + other[i] for i in range(n + 1)), n
        )

    def __sub__(self, other: "RationalSeries") -> "RationalSeries":
        n = min(self.order, other.order)
        return RationalSeries(
            tuple(self[i] - other[i] for i in range(n + 1)), n
        )

    def __mul__(self, other) -> "RationalSeries":
        if isinstance(other, RationalSeries):
            n = min(self.order, other.order)
            out = [Fraction(0)] * (n + 1)
            for i in range(n + 1):
                for j in range(n + 1 - i):
                    out[i + j] += self[i] * other[j]
            return RationalSeries(tuple(out), n)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, factor) -> "RationalSeries":
        f = _as_fraction(factor)
        return RationalSeries(tuple(f * c for c in self.coefficients), self.order)

    def shift_down(self) -> "RationalSeries":
        """Divide by the coupling; requires a vanishing constant term."""
        if self[0] != 0:
            raise DomainError("cannot divide by the coupling: constant term nonzero")
        if self.order == 0:
            raise DomainError("cannot shift a constant series down")
        return RationalSeries(self.coefficients[1:], self.order - 1)

    def compose(self, inner: "RationalSeries") -> "RationalSeries":
        """Substitute ``inner`` (no constant term) for the coupling."""
        if inner[0] != 0:
            raise DomainError("composition requires inner constant term zero")
        n = min(self.order, inner.order)
        result = RationalSeries.constant(self[0], n)
        power = RationalSeries.constant(1, n)
        for k in range(1, n + 1):
            power = power * inner.truncate(n)
            result = result + power.scale(self[k])
        return result

    def invert(self) -> "RationalSeries":
        """Multiplicative inverse; requires a nonzero constant term."""
        if self[0] == 0:
            raise DomainError("cannot invert a series with zero constant term")
        out = [Fraction(0)] * (self.order + 1)
        out[0] = 1 / self[0]
        for n in range(1, self.order + 1):
            acc = Fraction(0)
            for k in range(1, n + 1):
                acc += self[k] * out[n - k]
            out[n] = -acc / self[0]
        return RationalSeries(tuple(out), self.order)

    def to_json_dict(self) -> dict:
        return {
            "order": self.order,
            "coefficients": [str(c) for c in self.coefficients],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RationalSeries":
        return cls(
            coefficients=tuple(Fraction(c) for c in data["coefficients"]),
            order=int(data["order"]),
        )


def sqrt_one_plus_series(order: int) -> RationalSeries:
    """Binomial series of sqrt(1+u) through ``order``, exact."""
    coeffs = []
    c = Fraction(1)
    for k in range(order + 1):
        coeffs.append(c)
        # binomial(1/2, k+1) = binomial(1/2, k) * (1/2 - k)/(k + 1)
        c = c * (Fraction(1, 2) - k) / (k + 1)
    return RationalSeries.from_coefficients(coeffs)


def g2_series(colors: int, order: int) -> RationalSeries:
    """Expansion of the 2-point closed form (2/(D lam))(-1+sqrt(1+2 D lam)).

    Built by exact binomial expansion of sqrt(1+u) composed with u = 2 D lam,
    never via the recursion that ``catalan_oracle`` uses.
    """
    if colors < 1:
        raise DomainError(f"colors must be >= 1, got {colors}")
    if order < 0:
        raise DomainError(f"order must be >= 0, got {order}")
    root = sqrt_one_plus_series(order + 1)
    u = RationalSeries.from_coefficients(
        [Fraction(0), Fraction(2 * colors)] + [Fraction(0)] * order
    )
    inner = root.compose(u) - RationalSeries.constant(1, order + 1)
    return inner.shift_down().scale(Fraction(2, colors))


def catalan_numbers(count: int) -> list:
    """First ``count`` Catalan numbers via Cat_{n+1} = sum Cat_k Cat_{n-k}."""
    cats = [Fraction(1)]
    for n in range(count - 1):
        cats.append(sum(cats[k] * cats[n - k] for k in range(n + 1)))
    return cats


def catalan_oracle(colors: int, order: int) -> RationalSeries:
    """Independent 2-point expansion: coefficient n is 2 Cat_n (-D/2)^n.

    Uses only the Catalan convolution recurrence; no square roots anywhere.
    """
    if order < 0:
        raise DomainError(f"order must be >= 0, got {order}")
    cats = catalan_numbers(order + 1)
    ratio = Fraction(-colors, 2)
    return RationalSeries.from_coefficients(
        [2 * cats[n] * ratio**n for n in range(order + 1)]
    )


def fixed_point_check(series: RationalSeries, colors: int) -> bool:
    """True iff series = 2 - (D lam / 4) series^2 exactly through its order."""
    if series.order < 1:
        raise DomainError("fixed_point_check needs order >= 1")
    sq = series * series
    # multiply by lam: shift the square up one order, then compare truncated
    shifted = RationalSeries.from_coefficients(
        (Fraction(0),) + sq.coefficients[: series.order]
    )
    rhs = RationalSeries.constant(2, series.order) - shifted.scale(Fraction(colors, 4))
    return series.coefficients == rhs.coefficients


def tutte_series(order: int) -> RationalSeries:
    """Rooted planar quadrangulation 2-point series in the quartic coupling.

    Coefficient of (-t4)^n is 2 * 3^n / ((n+2)(n+1)) * binom(2n, n), so the
    coefficient of t4^n carries an extra (-1)^n.  All entries are integers.
    """
    if order < 0:
        raise DomainError(f"order must be >= 0, got {order}")
    coeffs = [
        Fraction((-1) ** n * 2 * 3**n * comb(2 * n, n), (n + 2) * (n + 1))
        for n in range(order + 1)
    ]
    return RationalSeries.from_coefficients(coeffs)


def planar_moment_table(order: int) -> dict:
    """Even planar moments m_p(t4) of the quartic one-matrix model.

    Solves sum_{n=0}^{k} m_n m_{k-n} = m_{k+2} + t4 m_{k+4} order by order
    in t4, with m_0 = 1 and odd moments zero (even potential).  Returns
    {p: RationalSeries} for even p with p + 2j <= 2*order + 2, each series
    truncated to the order it is fully determined at.
    """
    max_pair = 2 * order + 2
    # table[p][j]: t4^j coefficient of m_p, filled for p + 2j <= max_pair
    table: dict = {0: [Fraction(1)] + [Fraction(0)] * order}

    def coeff(p: int, j: int) -> Fraction:
        if p % 2 == 1:
            return Fraction(0)
        if p == 0:
            return Fraction(1) if j == 0 else Fraction(0)
        try:
            return table[p][j]
        except (KeyError, IndexError):
            raise MelonfieldError(
                f"planar moment recursion is not closed at power {p}, order {j}"
            ) from None

    for j in range(order + 1):
        p = 2
        while p + 2 * j <= max_pair:
            k = p - 2
            conv = Fraction(0)
            for n in range(0, k + 1):
                for a in range(j + 1):
                    cn = coeff(n, a)
                    if cn:
                        conv += cn * coeff(k - n, j - a)
            value = conv - (coeff(p + 2, j - 1) if j >= 1 else Fraction(0))
            table.setdefault(p, [])
            assert len(table[p]) == j, "moments must fill in order"
            table[p].append(value)
            p += 2

    out = {}
    for p, col in table.items():
        out[p] = RationalSeries.from_coefficients(col[: order + 1] if p == 0 else col)
    return out


def planar_moment_solve(order: int, power: int = 2) -> RationalSeries:
    """Planar moment m_power(t4) from the loop-equation tower (default m_2)."""
    if order < 0:
        raise DomainError(f"order must be >= 0, got {order}")
    if power % 2 == 1 or power < 2:
        raise DomainError("only even moments m_2, m_4, ... are tracked")
    table = planar_moment_table(order + (power - 2) // 2)
    series = table[power]
    if series.order < order:
        raise MelonfieldError(
            f"recursion closure failure: m_{power} only determined to order {series.order}"
        )
    return series.truncate(order)
