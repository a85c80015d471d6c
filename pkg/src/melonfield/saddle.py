"""Finite-N solution of the coupled D-color saddle-point equations.

The stationarity condition of the eigenvalue action reads, for each color c
and index k (gamma = sqrt(lam/2)),

    0 = -lam_k^c / N
        + (2/N^D) sum_{l != k} 1/(lam_k^c - lam_l^c)
        - (i gamma / N^D) sum over one index j_b per other color b of
              1 / (1 + i gamma (lam_k^c + sum_b lam_{j_b}^b)).

The Coulomb coefficient is 2, from the squared Vandermonde factor; the
interaction sum runs over N^(D-1) terms.  ``full_coupled`` mode evaluates
that sum directly; ``symmetric_ansatz`` mode requires all colors to carry
the same values and collapses it by multiset counting.

The next-to-leading-order limit of these equations is the fixed-scale
electrostatic problem (1 - alpha^2) x_k = (2/N) sum_{l != k} 1/(x_k - x_l),
solved exactly by rescaled roots of the physicists' Hermite polynomial.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import (
    CollisionError,
    DivergenceError,
    DomainError,
    SingularDenominatorError,
)
from .model import ModelParams, SemicircleLaw, alpha_lo, semicircle_law
from .observables import empirical_ks

#: Minimum within-color separation of eigenvalues.
MIN_SEPARATION = 1e-14

#: Minimum modulus of an interaction denominator.
MIN_DENOMINATOR = 1e-12

#: Cap on the number of interaction terms per eigenvalue in full mode.
FULL_MODE_TERM_CAP = 10**6

SYMMETRIC = "symmetric_ansatz"
FULL = "full_coupled"


@dataclass(frozen=True)
class Spectrum:
    """Per-color eigenvalue lists; values within a color must stay apart."""

    values: tuple

    def __post_init__(self):
        vals = tuple(tuple(complex(v) for v in color) for color in self.values)
        if not vals:
            raise DomainError("spectrum needs at least one color")
        n = len(vals[0])
        if any(len(color) != n for color in vals):
            raise DomainError("all colors must hold the same number of eigenvalues")
        for c, color in enumerate(vals):
            arr = np.asarray(color)
            diff = np.abs(arr[:, None] - arr[None, :])
            np.fill_diagonal(diff, np.inf)
            i, j = np.unravel_index(np.argmin(diff), diff.shape)
            if diff[i, j] <= MIN_SEPARATION:
                raise CollisionError(c, int(i), int(j), float(diff[i, j]))
        object.__setattr__(self, "values", vals)

    @property
    def colors(self) -> int:
        return len(self.values)

    @property
    def size(self) -> int:
        return len(self.values[0])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=complex)

    @classmethod
    def from_array(cls, arr) -> "Spectrum":
        arr = np.asarray(arr, dtype=complex)
        return cls(tuple(tuple(row) for row in arr))

    def is_color_symmetric(self) -> bool:
        first = self.values[0]
        return all(color == first for color in self.values)


@dataclass(frozen=True)
class ReducedSpectrum:
    """Real NLO fluctuation values; they sum to zero and form a symmetric set."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        arr = np.asarray(vals)
        if abs(arr.sum()) > 1e-10:
            raise DomainError(f"fluctuations must sum to zero, got {arr.sum():.3e}")
        if not np.allclose(np.sort(arr), np.sort(-arr), atol=1e-10):
            raise DomainError("fluctuations must form a negation-symmetric set")
        object.__setattr__(self, "values", vals)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-12
    max_iterations: int = 100
    damping: float = 1.0
    mode: str = SYMMETRIC
    seed: int = 0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise DomainError(f"tolerance must be > 0, got {self.tolerance}")
        if not 0.0 < self.damping <= 1.0:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")
        if self.mode not in (SYMMETRIC, FULL):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")


@dataclass(frozen=True)
class SaddleSolution:
    spectrum: Spectrum
    residual_norm: float
    iterations: int
    converged: bool
    residual_history: tuple


@dataclass(frozen=True)
class NLOComparison:
    """Deviation of a converged solution from the NLO prediction."""

    max_deviation: float
    ks_distance: float | None
    rescaled: tuple
    reference: tuple


def hermite_roots(n: int) -> np.ndarray:
    """Roots of the degree-n physicists' Hermite polynomial, ascending.

    Computed as eigenvalues of the symmetric tridiagonal recurrence matrix
    (off-diagonal sqrt(k/2)), then polished with one Newton step through
    the rescaled three-term recurrence.  The returned array is exactly
    antisymmetric; each root satisfies the electrostatic identity
    sum_{l != k} 1/(x_k - x_l) = x_k.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n == 1:
        return np.zeros(1)
    off = np.sqrt(np.arange(1, n) / 2.0)
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    roots = np.sort(np.linalg.eigvalsh(jacobi))

    # One Newton polish: H_n'(x) = 2 n H_{n-1}(x); propagate the pair
    # (H_{n-1}, H_n) with per-step rescaling so the ratio never overflows.
    prev = np.ones_like(roots)
    cur = 2.0 * roots
    for k in range(1, n):
        prev, cur = cur, 2.0 * roots * cur - 2.0 * k * prev
        norm = np.maximum(np.abs(prev), np.abs(cur))
        norm[norm == 0.0] = 1.0
        prev /= norm
        cur /= norm
    roots = roots - cur / (2.0 * n * prev)

    roots = np.sort(roots)
    roots = 0.5 * (roots - roots[::-1])  # enforce exact antisymmetry
    return roots


def electrostatic_residual(points) -> np.ndarray:
    """Residual of sum_{l != k} 1/(x_k - x_l) = x_k per point."""
    x = np.asarray(points, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    return (1.0 / diff).sum(axis=1) - x


def nlo_reduced_solve(params: ModelParams) -> ReducedSpectrum:
    """Unique real solution of the NLO fluctuation equation, ascending.

    x_k = sqrt(2 / (N s)) h_k with h_k the physicists' Hermite roots and
    s the semicircle scale of the instance.
    """
    if params.coupling <= 0:
        raise DomainError("nlo_reduced_solve requires coupling > 0")
    s = semicircle_law(params.colors, params.coupling).scale
    scale = math.sqrt(2.0 / (params.size * s))
    return ReducedSpectrum(tuple(scale * hermite_roots(params.size)))


def nlo_equation_residual(reduced: ReducedSpectrum, params: ModelParams) -> np.ndarray:
    """Residual of (1 - alpha^2) x_k - (2/N) sum_{l != k} 1/(x_k - x_l)."""
    x = reduced.as_array()
    s = semicircle_law(params.colors, params.coupling).scale
    n = x.size
    if n == 1:
        return s * x
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    return s * x - (2.0 / n) * (1.0 / diff).sum(axis=1)


def _multiset_sums(vals: np.ndarray, picks: int):
    """All sums of ``picks`` values drawn with repetition, with tuple counts."""
    if picks == 0:
        return np.zeros(1, dtype=complex), np.ones(1)
    n = vals.size
    idx = np.fromiter(
        itertools.chain.from_iterable(
            itertools.combinations_with_replacement(range(n), picks)
        ),
        dtype=np.intp,
    ).reshape(-1, picks)
    sums = vals[idx].sum(axis=1)
    base = factorial(picks)
    counts = np.array(
        [
            base // math.prod(factorial(m) for m in Counter(row).values())
            for row in map(tuple, idx)
        ],
        dtype=float,
    )
    return sums, counts


def _ordered_sums(arrays) -> np.ndarray:
    """Flattened broadcast sum over one pick per array (N^len grid)."""
    total = np.zeros(1, dtype=complex)
    for arr in arrays:
        total = (total[:, None] + arr[None, :]).ravel()
    return total


def _check_denominators(denom: np.ndarray, color: int):
    if np.min(np.abs(denom)) <= MIN_DENOMINATOR:
        raise SingularDenominatorError(
            f"interaction denominator below {MIN_DENOMINATOR} for color {color}"
        )


def _coulomb_sums(vals: np.ndarray, color: int):
    """sum_{l != k} 1/(lam_k - lam_l) and its k-derivative, with collision check."""
    diff = vals[:, None] - vals[None, :]
    np.fill_diagonal(diff, np.inf)
    dist = np.abs(diff)
    i, j = np.unravel_index(np.argmin(dist), dist.shape)
    if dist[i, j] <= MIN_SEPARATION:
        raise CollisionError(color, int(i), int(j), float(dist[i, j]))
    inv = 1.0 / diff
    return inv.sum(axis=1), inv**2


def _residual_symmetric(vals: np.ndarray, params: ModelParams) -> np.ndarray:
    d, n, lam = params.colors, params.size, params.coupling
    gamma = math.sqrt(lam / 2.0)
    coul, _ = _coulomb_sums(vals, 0)
    sums, counts = _multiset_sums(vals, d - 1)
    denom = 1.0 + 1j * gamma * (vals[:, None] + sums[None, :])
    _check_denominators(denom, 0)
    interaction = (counts[None, :] / denom).sum(axis=1)
    nd = float(n) ** d
    return -vals / n + (2.0 / nd) * coul - (1j * gamma / nd) * interaction


def _jacobian_symmetric(vals: np.ndarray, params: ModelParams) -> np.ndarray:
    d, n, lam = params.colors, params.size, params.coupling
    gamma = math.sqrt(lam / 2.0)
    nd = float(n) ** d
    _, inv2 = _coulomb_sums(vals, 0)
    jac = (2.0 / nd) * inv2
    np.fill_diagonal(jac, np.diag(jac) - 1.0 / n - (2.0 / nd) * inv2.sum(axis=1))

    def gprime(u):
        return -1j * gamma / (1.0 + 1j * gamma * u) ** 2

    sums, counts = _multiset_sums(vals, d - 1)
    a_diag = (counts[None, :] * gprime(vals[:, None] + sums[None, :])).sum(axis=1)
    jac[np.arange(n), np.arange(n)] -= (1j * gamma / nd) * a_diag
    if d >= 2:
        sums2, counts2 = _multiset_sums(vals, d - 2)
        pair = vals[:, None] + vals[None, :]
        cross = (counts2[None, None, :] * gprime(pair[:, :, None] + sums2[None, None, :])).sum(
            axis=2
        )
        jac -= (1j * gamma / nd) * (d - 1) * cross
    return jac


def _residual_full(arr: np.ndarray, params: ModelParams) -> np.ndarray:
    d, n, lam = params.colors, params.size, params.coupling
    gamma = math.sqrt(lam / 2.0)
    nd = float(n) ** d
    if n ** max(d - 1, 0) > FULL_MODE_TERM_CAP:
        raise DomainError(
            f"full mode interaction sum has N^(D-1) = {n**(d-1)} terms, "
            f"cap is {FULL_MODE_TERM_CAP}"
        )
    out = np.empty((d, n), dtype=complex)
    for c in range(d):
        coul, _ = _coulomb_sums(arr[c], c)
        others = [arr[b] for b in range(d) if b != c]
        sums = _ordered_sums(others)
        denom = 1.0 + 1j * gamma * (arr[c][:, None] + sums[None, :])
        _check_denominators(denom, c)
        interaction = (1.0 / denom).sum(axis=1)
        out[c] = -arr[c] / n + (2.0 / nd) * coul - (1j * gamma / nd) * interaction
    return out


def _jacobian_full(arr: np.ndarray, params: ModelParams) -> np.ndarray:
    d, n, lam = params.colors, params.size, params.coupling
    gamma = math.sqrt(lam / 2.0)
    nd = float(n) ** d

    def gprime(u):
        return -1j * gamma / (1.0 + 1j * gamma * u) ** 2

    jac = np.zeros((d, n, d, n), dtype=complex)
    for c in range(d):
        _, inv2 = _coulomb_sums(arr[c], c)
        block = (2.0 / nd) * inv2
        np.fill_diagonal(block, np.diag(block) - 1.0 / n - (2.0 / nd) * inv2.sum(axis=1))
        others = [arr[b] for b in range(d) if b != c]
        sums = _ordered_sums(others)
        block[np.arange(n), np.arange(n)] -= (1j * gamma / nd) * gprime(
            arr[c][:, None] + sums[None, :]
        ).sum(axis=1)
        jac[c, :, c, :] = block
        for b in range(d):
            if b == c:
                continue
            rest = [arr[e] for e in range(d) if e not in (c, b)]
            sums2 = _ordered_sums(rest)
            pair = arr[c][:, None] + arr[b][None, :]
            cross = gprime(pair[:, :, None] + sums2[None, None, :]).sum(axis=2)
            jac[c, :, b, :] = -(1j * gamma / nd) * cross
    return jac.reshape(d * n, d * n)


def saddle_residual(spectrum: Spectrum, params: ModelParams, mode: str = FULL) -> np.ndarray:
    """Residual of the saddle equations, shape (D, N) complex.

    ``full_coupled`` evaluates the N^(D-1)-term interaction sum directly;
    ``symmetric_ansatz`` requires identical color lists and collapses it
    by multiset counting.  Both return one row per color.
    """
    if params.coupling <= 0:
        raise DomainError("saddle_residual requires coupling > 0")
    if spectrum.colors != params.colors or spectrum.size != params.size:
        raise DomainError("spectrum shape does not match params")
    if params.size ** max(params.colors - 1, 0) > FULL_MODE_TERM_CAP:
        raise DomainError(
            f"interaction sum has N^(D-1) = {params.size ** (params.colors - 1)} "
            f"terms, cap is {FULL_MODE_TERM_CAP}"
        )
    arr = spectrum.as_array()
    if mode == SYMMETRIC:
        if not spectrum.is_color_symmetric():
            raise DomainError("symmetric mode requires identical values in every color")
        row = _residual_symmetric(arr[0], params)
        return np.tile(row, (params.colors, 1))
    if mode == FULL:
        return _residual_full(arr, params)
    raise DomainError(f"unknown mode {mode!r}")


def _initial_guess(params: ModelParams, config: SolverConfig, law: SemicircleLaw):
    d, n = params.colors, params.size
    alpha = alpha_lo(params.colors, params.coupling)
    scale = math.sqrt(2.0 / (float(n) ** (d - 1) * law.scale))
    offsets = scale * hermite_roots(n)
    rng = np.random.default_rng(config.seed)
    if config.mode == SYMMETRIC:
        jitter = 1e-3 * scale * rng.standard_normal(n)
        return alpha + offsets + jitter
    jitter = 1e-3 * scale * rng.standard_normal((d, n))
    return alpha + offsets[None, :] + jitter


def solve_newton(params: ModelParams, config: SolverConfig) -> SaddleSolution:
    """Damped Newton iteration with the analytic Jacobian.

    Starts from the collapse point plus rescaled Hermite roots (the NLO
    basin) with seeded jitter of relative size 1e-3.  Backtracking halves
    the step until the residual sup-norm decreases, with floor 1/64; five
    consecutive non-decreasing steps raise DivergenceError.  Identical
    seeds produce identical output.
    """
    if params.coupling <= 0:
        raise DomainError("solve_newton requires coupling > 0")
    if params.size ** max(params.colors - 1, 0) > FULL_MODE_TERM_CAP:
        raise DomainError("interaction sum exceeds the term cap; reduce N or D")
    law = semicircle_law(params.colors, params.coupling)
    symmetric = config.mode == SYMMETRIC
    state = _initial_guess(params, config, law)

    def residual(x):
        if symmetric:
            return _residual_symmetric(x, params)
        return _residual_full(x, params).ravel()

    def jacobian(x):
        if symmetric:
            return _jacobian_symmetric(x, params)
        return _jacobian_full(x, params)

    flat = state if symmetric else state.ravel()
    shape = state.shape
    res = residual(state)
    norm = float(np.max(np.abs(res)))
    history = [norm]
    bad_steps = 0
    iterations = 0
    converged = norm <= config.tolerance

    while not converged and iterations < config.max_iterations:
        step = np.linalg.solve(jacobian(flat.reshape(shape)), -res)
        eta = config.damping
        best_flat, best_res, best_norm = None, None, math.inf
        while True:
            candidate = flat + eta * step
            try:
                cand_res = residual(candidate.reshape(shape))
            except (CollisionError, SingularDenominatorError):
                cand_res = None
            if cand_res is not None:
                cand_norm = float(np.max(np.abs(cand_res)))
                if cand_norm < best_norm:
                    best_flat, best_res, best_norm = candidate, cand_res, cand_norm
                if cand_norm < norm:
                    break
            if eta <= 1.0 / 64.0:
                break
            eta /= 2.0
        if best_flat is None:
            raise DivergenceError(
                f"all damped steps collide or cross a pole at residual {norm:.3e}", norm
            )
        if best_norm >= norm:
            bad_steps += 1
            if bad_steps >= 5:
                raise DivergenceError(
                    f"residual grew for {bad_steps} consecutive damped steps, "
                    f"last residual {best_norm:.3e}",
                    best_norm,
                )
        else:
            bad_steps = 0
        flat, res, norm = best_flat, best_res, best_norm
        iterations += 1
        history.append(norm)
        converged = norm <= config.tolerance

    alpha = alpha_lo(params.colors, params.coupling)
    state = flat.reshape(shape)
    if symmetric:
        order = np.argsort((state - alpha).real, kind="stable")
        row = tuple(state[order])
        spectrum = Spectrum(tuple(row for _ in range(params.colors)))
    else:
        rows = []
        for c in range(params.colors):
            order = np.argsort((state[c] - alpha).real, kind="stable")
            rows.append(tuple(state[c][order]))
        spectrum = Spectrum(tuple(rows))
    return SaddleSolution(
        spectrum=spectrum,
        residual_norm=norm,
        iterations=iterations,
        converged=converged,
        residual_history=tuple(history),
    )


def compare_to_nlo(solution: SaddleSolution, params: ModelParams) -> NLOComparison:
    """Deviation of rescaled fluctuations from the NLO prediction.

    Rescaled values sqrt(N^(D-2)) (lam_k - alpha) of color 0 are matched
    against the NLO solution by sorted order; the KS distance compares
    their real parts with the semicircle CDF.  For N = 1 the KS distance
    of a single degenerate point is reported as None.
    """
    if not solution.converged:
        raise DomainError("compare_to_nlo requires a converged solution")
    alpha = alpha_lo(params.colors, params.coupling)
    nu = math.sqrt(float(params.size) ** (params.colors - 2))
    vals = np.asarray(solution.spectrum.values[0], dtype=complex)
    rescaled = nu * (vals - alpha)
    rescaled = rescaled[np.argsort(rescaled.real, kind="stable")]
    reference = nlo_reduced_solve(params).as_array()
    deviation = float(np.max(np.abs(rescaled - reference)))
    if params.size == 1:
        ks = None
    else:
        law = semicircle_law(params.colors, params.coupling)
        ks = empirical_ks(rescaled.real, law)
    return NLOComparison(
        max_deviation=deviation,
        ks_distance=ks,
        rescaled=tuple(rescaled),
        reference=tuple(reference),
    )


def solution_to_json(solution: SaddleSolution, params: ModelParams) -> dict:
    """Serialization of a solution in the documented wire format."""
    return {
        "params": {
            "colors": params.colors,
            "size": params.size,
            "coupling": params.coupling,
        },
        "spectrum": [
            [{"re": v.real, "im": v.imag} for v in color]
            for color in solution.spectrum.values
        ],
        "residual_norm": solution.residual_norm,
        "iterations": solution.iterations,
        "converged": solution.converged,
    }
