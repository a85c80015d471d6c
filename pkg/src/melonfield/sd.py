"""Schwinger-Dyson identity verification for the shifted matrix model.

The shifted variables are M_c = alpha + Mtilde_c / nu with nu = N^((D-2)/2),
and the action, up to an additive constant, is

    S(Mtilde) = (N/2) sum_c Tr Mtilde_c^2 + alpha N^(D/2) sum_c Tr Mtilde_c
                + Tr log(1 - (alpha/nu) sum_c embed_c(Mtilde_c)),

where embed_c places Mtilde_c into slot c of the N^D-dimensional tensor
product.  Writing the log argument this way uses the collapse-point
identity i sqrt(lam/2) / (1 + i sqrt(lam/2) D alpha) = -alpha, which is
equivalent to the quadratic that defines alpha.

Integrating the total derivative of (Mtilde_c^k)_ij against the weight
gives, for every color c and k >= 0, the exact identity

    0 = < sum_{n=0}^{k-1} Tr Mtilde^n Tr Mtilde^{k-1-n} >
        - N < Tr Mtilde^{k+1} >
        - alpha N^(D/2) < Tr Mtilde^k >
        + (alpha/nu) < Tr[ Mtilde_c^k Ptr_{!=c}(A^{-1}) ] >,

with A = 1 - (alpha/nu) sum_c embed_c(Mtilde_c) evaluated densely and
Ptr the partial trace over every slot except c.  The truncated leading
form keeps only the first term and -N (1 - alpha^2) < Tr Mtilde^{k+1} >.

Estimators: adaptive quadrature for N = 1 (the matrices are D real
scalars) and phase-reweighted Metropolis Monte Carlo for small dense N.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.integrate import quad as scipy_quad

from . import quadrature
from .errors import DomainError, QuadratureError, SignProblemError
from .model import ModelParams, alpha_lo
from .observables import theta_from_matrix

#: Dense-resolvent cap on the embedded matrix dimension.
DENSE_DIMENSION_CAP = 4096

#: Below this mean phase magnitude an MC estimate is deemed unreliable.
PHASE_FLOOR = 0.05

QUADRATURE = "quadrature"
MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class CorrelatorEstimate:
    value: complex
    std_error: float
    method: str
    samples_or_nodes: int
    phase_mean: float | None = None


@dataclass(frozen=True)
class SDReportEntry:
    """Residual of one identity at one (color, k), with its natural scale."""

    color: int
    k: int
    residual: complex
    scale: float
    normalized: float
    method: str
    std_error: float
    phase_mean: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "color": self.color,
            "k": self.k,
            "residual_re": self.residual.real,
            "residual_im": self.residual.imag,
            "scale": self.scale,
            "normalized": self.normalized,
            "method": self.method,
            "std_error": self.std_error,
            "phase_mean": self.phase_mean,
        }


@dataclass(frozen=True)
class FactorizationReport:
    s: int
    t: int
    connected: complex
    normalized: complex
    scale: float
    std_error: float
    phase_mean: float | None


@dataclass(frozen=True)
class TensorSideReport:
    p: int
    tensor_side: float
    matrix_side: complex
    difference: float
    matrix_coupling: float
    tolerance: float


class ShiftedModel:
    """Shifted model instance: parameters, collapse point, scaling factor."""

    def __init__(self, params: ModelParams):
        if params.size**params.colors > DENSE_DIMENSION_CAP:
            raise DomainError(
                f"N^D = {params.size**params.colors} exceeds the dense cap "
                f"{DENSE_DIMENSION_CAP}"
            )
        self.params = params
        self.alpha = (
            alpha_lo(params.colors, params.coupling) if params.coupling > 0 else 0j
        )
        self.nu = float(params.size) ** ((params.colors - 2) / 2.0)

    # -- dense embedded-space helpers ------------------------------------

    def embed(self, color: int, matrix: np.ndarray) -> np.ndarray:
        """Place an N x N matrix into slot ``color`` of the product space."""
        n, d = self.params.size, self.params.colors
        factors = [np.eye(n)] * d
        factors[color] = matrix
        return reduce(np.kron, factors)

    def big_matrix(self, matrices) -> np.ndarray:
        """A = 1 - (alpha/nu) sum_c embed_c(Mtilde_c)."""
        n, d = self.params.size, self.params.colors
        total = np.zeros((n**d, n**d), dtype=complex)
        for c in range(d):
            total += self.embed(c, np.asarray(matrices[c], dtype=complex))
        return np.eye(n**d) - (self.alpha / self.nu) * total

    def partial_trace_except(self, big: np.ndarray, color: int) -> np.ndarray:
        """Trace the N^D x N^D matrix over every slot except ``color``."""
        n, d = self.params.size, self.params.colors
        tensor = big.reshape((n,) * (2 * d))
        row = list(range(d))
        col = [i if i != color else d for i in range(d)]
        return np.einsum(tensor, row + col, [color, d])

    def action(self, matrices) -> complex:
        """S(Mtilde) up to its additive constant; the weight is exp(-S)."""
        n, d = self.params.size, self.params.colors
        quad_term = 0j
        lin_term = 0j
        for c in range(d):
            m = np.asarray(matrices[c], dtype=complex)
            quad_term += complex(np.trace(m @ m))
            lin_term += complex(np.trace(m))
        sign, logabs = np.linalg.slogdet(self.big_matrix(matrices))
        logdet = logabs + cmath.log(complex(sign))
        return (
            0.5 * n * quad_term
            + self.alpha * float(n) ** (d / 2.0) * lin_term
            + logdet
        )

    def log_weight(self, matrices) -> complex:
        return -self.action(matrices)


# ---------------------------------------------------------------------------
# Quadrature estimators (N = 1: the matrices are D real scalars)
# ---------------------------------------------------------------------------


def _require_scalar_model(model: ShiftedModel):
    if model.params.size != 1:
        raise DomainError("quadrature estimators require N = 1")
    if model.params.colors > 4:
        raise DomainError("quadrature estimators require D <= 4")


def _monomial_obs(powers):
    def obs(coords, total):
        out = 1.0
        for x, m in zip(coords, powers):
            if m:
                out = out * x**m
        return out

    return obs


def scalar_expectations(
    model: ShiftedModel,
    observables,
    tolerance: float = 1e-8,
    variables: str = "shifted",
):
    """Adaptive expectations of callables in the N = 1 reduction."""
    _require_scalar_model(model)
    if variables == "shifted":
        factor = quadrature.coupled_weight_shifted(model.alpha)
    elif variables == "original":
        factor = quadrature.coupled_weight_original(
            model.params.colors, model.params.coupling
        )
    else:
        raise DomainError(f"unknown variable set {variables!r}")
    return quadrature.expectations(
        model.params.colors, factor, observables, tolerance=tolerance
    )


def correlator_quadrature(
    model: ShiftedModel,
    powers,
    tolerance: float = 1e-8,
    variables: str = "shifted",
) -> CorrelatorEstimate:
    """< prod_c x_c^(m_c) > in the N = 1 reduction by adaptive quadrature."""
    _require_scalar_model(model)
    powers = tuple(int(m) for m in powers)
    if len(powers) != model.params.colors:
        raise DomainError(
            f"need one exponent per color, got {len(powers)} for D = {model.params.colors}"
        )
    if any(m < 0 for m in powers):
        raise DomainError("exponents must be non-negative")
    values, errors, nodes = scalar_expectations(
        model, [_monomial_obs(powers)], tolerance=tolerance, variables=variables
    )
    return CorrelatorEstimate(
        value=complex(values[0]),
        std_error=float(errors[0]),
        method=QUADRATURE,
        samples_or_nodes=nodes,
    )


# ---------------------------------------------------------------------------
# Monte Carlo estimator with phase reweighting
# ---------------------------------------------------------------------------


def _combine_chains(chain_values, chain_phases, n_obs):
    values = np.mean(chain_values, axis=0)
    if len(chain_values) > 1:
        errors = np.std(chain_values, axis=0, ddof=1) / math.sqrt(len(chain_values))
    else:
        errors = np.zeros(n_obs)
    phase_mean = float(np.mean(chain_phases))
    return values, np.abs(errors), phase_mean


def _tune(delta: float, accepted: int, window: int) -> float:
    rate = accepted / window
    if rate > 0.5:
        return delta * 1.2
    if rate < 0.3:
        return delta / 1.2
    return delta


def _run_scalar_chains(model, obs_fn, n_obs, chains, steps, seed, measure_every):
    """Lockstep Metropolis over all chains; state is (chains, D) real."""
    d = model.params.colors
    alpha = model.alpha
    rngs = [np.random.default_rng((seed, c)) for c in range(chains)]
    x = np.zeros((chains, d))
    total = x.sum(axis=1)
    re_logw = -0.5 * (x**2).sum(axis=1) - np.log(1.0 - alpha * total).real

    burn = max(steps // 10, 1)
    deltas = np.full(chains, 1.0)
    accepted = np.zeros(chains, dtype=int)
    window = 100

    num = np.zeros((chains, n_obs), dtype=complex)
    den = np.zeros(chains, dtype=complex)
    phase_acc = np.zeros(chains, dtype=complex)
    count = 0

    block = 8192
    step = 0
    while step < steps:
        size = min(block, steps - step)
        cols = np.stack([rng.integers(0, d, size) for rng in rngs])
        incs = np.stack([rng.standard_normal(size) for rng in rngs])
        logus = np.stack([np.log(rng.random(size)) for rng in rngs])
        for t in range(size):
            col = cols[:, t]
            dx = deltas * incs[:, t]
            old = x[np.arange(chains), col]
            new = old + dx
            new_total = total + dx
            re_new = (
                re_logw
                - 0.5 * (new**2 - old**2)
                - np.log(1.0 - alpha * new_total).real
                + np.log(1.0 - alpha * total).real
            )
            accept = logus[:, t] < (re_new - re_logw)
            x[np.arange(chains), col] = np.where(accept, new, old)
            total = np.where(accept, new_total, total)
            re_logw = np.where(accept, re_new, re_logw)
            accepted += accept

            global_step = step + t
            if global_step < burn:
                if (global_step + 1) % window == 0:
                    for c in range(chains):
                        deltas[c] = _tune(deltas[c], int(accepted[c]), window)
                    accepted[:] = 0
            elif (global_step - burn) % measure_every == 0:
                im_logw = -(alpha * total).imag - np.log(1.0 - alpha * total).imag
                phase = np.exp(1j * im_logw)
                num += obs_fn(x, total) * phase[:, None]
                den += phase
                phase_acc += phase
                count += 1
        step += size

    chain_values = num / den[:, None]
    chain_phases = np.abs(phase_acc / count)
    return chain_values, chain_phases, count


def _run_matrix_chain(model, obs_fn, n_obs, steps, seed_pair, measure_every):
    d, n = model.params.colors, model.params.size
    alpha, nu = model.alpha, model.nu
    rng = np.random.default_rng(seed_pair)
    mats = [np.zeros((n, n), dtype=complex) for _ in range(d)]

    # Incremental state: per-color embeddings, their sum, and the cheap
    # quadratic and linear trace pieces of the action.
    eye_big = np.eye(n**d)
    embedded = [model.embed(c, mats[c]) for c in range(d)]
    sum_embedded = sum(embedded)
    quad_traces = [0.0] * d  # Tr M_c^2, real for Hermitian states
    lin_traces = [0.0] * d  # Tr M_c
    lin_factor = alpha * float(n) ** (d / 2.0)

    def logdet_of(sum_emb):
        sign, logabs = np.linalg.slogdet(eye_big - (alpha / nu) * sum_emb)
        return logabs + cmath.log(complex(sign))

    logdet = logdet_of(sum_embedded)

    def current_logw(ld):
        return -(0.5 * n * sum(quad_traces) + lin_factor * sum(lin_traces) + ld)

    logw = current_logw(logdet)
    burn = max(steps // 10, 1)
    delta = 1.0 / math.sqrt(n)
    accepted = 0
    window = 100

    num = np.zeros(n_obs, dtype=complex)
    den = 0.0 + 0.0j
    phase_acc = 0.0 + 0.0j
    count = 0

    for step in range(steps):
        c = int(rng.integers(0, d))
        i = int(rng.integers(0, n))
        j = int(rng.integers(i, n))
        old_ij, old_ji = mats[c][i, j], mats[c][j, i]
        if i == j:
            mats[c][i, i] = old_ij + delta * rng.standard_normal()
        else:
            z = delta * (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2)
            mats[c][i, j] = old_ij + z
            mats[c][j, i] = old_ji + z.conjugate()
        new_embed = model.embed(c, mats[c])
        new_sum = sum_embedded - embedded[c] + new_embed
        new_quad = float(np.sum(np.abs(mats[c]) ** 2))
        new_lin = float(np.trace(mats[c]).real)
        old_quad, old_lin = quad_traces[c], lin_traces[c]
        quad_traces[c], lin_traces[c] = new_quad, new_lin
        new_logdet = logdet_of(new_sum)
        new_logw = current_logw(new_logdet)
        if math.log(rng.random()) < (new_logw.real - logw.real):
            logw = new_logw
            logdet = new_logdet
            embedded[c] = new_embed
            sum_embedded = new_sum
            accepted += 1
        else:
            mats[c][i, j], mats[c][j, i] = old_ij, old_ji
            quad_traces[c], lin_traces[c] = old_quad, old_lin

        if step < burn:
            if (step + 1) % window == 0:
                delta = _tune(delta, accepted, window)
                accepted = 0
        elif (step - burn) % measure_every == 0:
            phase = cmath.exp(1j * logw.imag)
            num += np.asarray(obs_fn(mats, model), dtype=complex) * phase
            den += phase
            phase_acc += phase
            count += 1

    return num / den, abs(phase_acc / count), count


def mc_expectations(
    model: ShiftedModel,
    obs_fn_scalar,
    obs_fn_matrix,
    n_obs: int,
    chains: int = 4,
    steps: int = 100_000,
    seed: int = 0,
    measure_every: int | None = None,
    threads: int | None = None,
):
    """Phase-reweighted Metropolis estimates of a vector observable.

    Chains are independent (stream (seed, chain)) and reduced in chain
    order, so the result is bit-identical for a fixed configuration.
    Raises SignProblemError when the mean phase magnitude drops below
    PHASE_FLOOR.
    """
    if chains < 1 or steps < 10:
        raise DomainError("need chains >= 1 and steps >= 10")
    d, n = model.params.colors, model.params.size
    if measure_every is None:
        measure_every = max(1, d * n * n // 2)
    if threads is None:
        threads = os.cpu_count() or 1
    if n == 1:
        chain_values, chain_phases, count = _run_scalar_chains(
            model, obs_fn_scalar, n_obs, chains, steps, seed, measure_every
        )
        values, errors, phase_mean = _combine_chains(chain_values, chain_phases, n_obs)
    else:
        if threads > 1 and chains > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(
                        lambda c: _run_matrix_chain(
                            model, obs_fn_matrix, n_obs, steps, (seed, c), measure_every
                        ),
                        range(chains),
                    )
                )
        else:
            results = [
                _run_matrix_chain(
                    model, obs_fn_matrix, n_obs, steps, (seed, c), measure_every
                )
                for c in range(chains)
            ]
        chain_values = np.stack([r[0] for r in results])
        chain_phases = np.array([r[1] for r in results])
        count = results[0][2]
        values, errors, phase_mean = _combine_chains(chain_values, chain_phases, n_obs)
    if phase_mean < PHASE_FLOOR:
        raise SignProblemError(
            f"mean phase magnitude {phase_mean:.3f} below {PHASE_FLOOR}; "
            "estimate unreliable",
            phase_mean,
            estimate=values,
        )
    return values, errors, phase_mean, count * chains


def _trace_word_scalar(word):
    def obs(x, total):
        out = np.ones(x.shape[0], dtype=complex)
        for color, power in word:
            out = out * x[:, color] ** power
        return out[:, None]

    return obs


def _trace_word_matrix(word):
    def obs(mats, model):
        out = 1.0 + 0.0j
        for color, power in word:
            out *= complex(np.trace(np.linalg.matrix_power(mats[color], power)))
        return np.array([out])

    return obs


def correlator_mc(
    model: ShiftedModel,
    word,
    chains: int = 4,
    steps: int = 100_000,
    seed: int = 0,
    measure_every: int | None = None,
    threads: int | None = None,
) -> CorrelatorEstimate:
    """< prod Tr(Mtilde_c^p) > for a trace word ((color, power), ...)."""
    word = tuple((int(c), int(p)) for c, p in word)
    for color, power in word:
        if not 0 <= color < model.params.colors:
            raise DomainError(f"color {color} outside 0..{model.params.colors - 1}")
        if power < 0:
            raise DomainError("powers must be non-negative")
    values, errors, phase_mean, samples = mc_expectations(
        model,
        _trace_word_scalar(word),
        _trace_word_matrix(word),
        1,
        chains=chains,
        steps=steps,
        seed=seed,
        measure_every=measure_every,
        threads=threads,
    )
    return CorrelatorEstimate(
        value=complex(values[0]),
        std_error=float(errors[0]),
        method=MONTE_CARLO,
        samples_or_nodes=samples,
        phase_mean=phase_mean,
    )


# ---------------------------------------------------------------------------
# Identity residuals
# ---------------------------------------------------------------------------


def _power_obs(color, p):
    power = max(p, 0)  # p = -1 only occurs at k = 0, where the term is dropped

    def obs(coords, total):
        return coords[color] ** power if power else np.ones(1)

    return obs


def _sd_terms_quadrature(model: ShiftedModel, color: int, k: int, tolerance: float):
    alpha = model.alpha

    def resolvent_obs(coords, total):
        return coords[color] ** k / (1.0 - alpha * total)

    observables = [
        _power_obs(color, k - 1),
        _power_obs(color, k + 1),
        _power_obs(color, k),
        resolvent_obs,
    ]
    values, errors, nodes = scalar_expectations(
        model, observables, tolerance=tolerance, variables="shifted"
    )
    # N = 1: the pair-sum term collapses to k <x^(k-1)>, nu = 1.
    terms = np.array(
        [
            k * values[0] if k > 0 else 0.0,
            -values[1],
            -alpha * values[2],
            alpha * values[3],
        ]
    )
    term_errors = np.array(
        [k * errors[0] if k > 0 else 0.0, errors[1], abs(alpha) * errors[2], abs(alpha) * errors[3]]
    )
    return terms, float(term_errors.sum()), nodes, None


def _sd_obs_matrix(model: ShiftedModel, color: int, k: int):
    d, n = model.params.colors, model.params.size
    alpha, nu = model.alpha, model.nu
    nd_half = float(n) ** (d / 2.0)

    def obs(mats, mdl):
        m = mats[color]
        powers = [np.eye(n, dtype=complex)]
        for _ in range(k + 1):
            powers.append(powers[-1] @ m)
        traces = [complex(np.trace(p)) for p in powers]
        pair = sum(traces[nn] * traces[k - 1 - nn] for nn in range(k)) if k > 0 else 0.0
        big = mdl.big_matrix(mats)
        resolvent = np.linalg.inv(big)
        ptr = mdl.partial_trace_except(resolvent, color)
        t4 = (alpha / nu) * complex(np.trace(powers[k] @ ptr))
        return np.array(
            [pair, -n * traces[k + 1], -alpha * nd_half * traces[k], t4]
        )

    return obs


def _sd_obs_scalar(model: ShiftedModel, color: int, k: int):
    alpha = model.alpha

    def obs(x, total):
        xc = x[:, color].astype(complex)
        pair = k * xc ** (k - 1) if k > 0 else np.zeros_like(xc)
        return np.stack(
            [
                pair,
                -(xc ** (k + 1)),
                -alpha * xc**k,
                alpha * xc**k / (1.0 - alpha * total),
            ],
            axis=1,
        )

    return obs


def _entry_from_terms(color, k, terms, std_error, method, samples, phase_mean):
    residual = complex(np.sum(terms))
    scale = float(np.max(np.abs(terms)))
    if scale == 0.0:
        scale = 1.0
    return SDReportEntry(
        color=color,
        k=k,
        residual=residual,
        scale=scale,
        normalized=abs(residual) / scale,
        method=method,
        std_error=std_error,
        phase_mean=phase_mean,
    )


def sd_residual_exact(
    model: ShiftedModel,
    color: int,
    k: int,
    estimator: str = QUADRATURE,
    tolerance: float = 1e-8,
    chains: int = 4,
    steps: int = 100_000,
    seed: int = 0,
    measure_every: int | None = None,
    threads: int | None = None,
) -> SDReportEntry:
    """Residual of the exact identity at (color, k); vanishes in expectation."""
    if not 0 <= color < model.params.colors:
        raise DomainError(f"color {color} outside 0..{model.params.colors - 1}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if estimator == QUADRATURE:
        terms, err, nodes, phase = _sd_terms_quadrature(model, color, k, tolerance)
        return _entry_from_terms(color, k, terms, err, QUADRATURE, nodes, phase)
    if estimator == MONTE_CARLO:
        values, errors, phase_mean, samples = mc_expectations(
            model,
            _sd_obs_scalar(model, color, k),
            _sd_obs_matrix(model, color, k),
            4,
            chains=chains,
            steps=steps,
            seed=seed,
            measure_every=measure_every,
            threads=threads,
        )
        return _entry_from_terms(
            color, k, values, float(np.sum(errors)), MONTE_CARLO, samples, phase_mean
        )
    raise DomainError(f"unknown estimator {estimator!r}")


def sd_residual_leading(
    model: ShiftedModel,
    color: int,
    k: int,
    estimator: str = QUADRATURE,
    tolerance: float = 1e-8,
    chains: int = 4,
    steps: int = 100_000,
    seed: int = 0,
    measure_every: int | None = None,
    threads: int | None = None,
) -> SDReportEntry:
    """Residual of the truncated leading identity; suppressed, not zero, at finite N."""
    if not 0 <= color < model.params.colors:
        raise DomainError(f"color {color} outside 0..{model.params.colors - 1}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    n = model.params.size
    factor = n * (1.0 - model.alpha**2)

    if estimator == QUADRATURE:
        values, errors, nodes = scalar_expectations(
            model,
            [_power_obs(color, k - 1), _power_obs(color, k + 1)],
            tolerance=tolerance,
        )
        terms = np.array([k * values[0] if k > 0 else 0.0, -factor * values[1]])
        err = float((k if k else 0) * errors[0] + abs(factor) * errors[1])
        return _entry_from_terms(color, k, terms, err, QUADRATURE, nodes, None)

    if estimator == MONTE_CARLO:

        def obs_scalar(x, total):
            xc = x[:, color].astype(complex)
            pair = k * xc ** (k - 1) if k > 0 else np.zeros_like(xc)
            return np.stack([pair, -factor * xc ** (k + 1)], axis=1)

        def obs_matrix(mats, mdl):
            m = mats[color]
            powers = [np.eye(n, dtype=complex)]
            for _ in range(k + 1):
                powers.append(powers[-1] @ m)
            traces = [complex(np.trace(p)) for p in powers]
            pair = sum(traces[nn] * traces[k - 1 - nn] for nn in range(k)) if k > 0 else 0.0
            return np.array([pair, -factor * traces[k + 1]])

        values, errors, phase_mean, samples = mc_expectations(
            model,
            obs_scalar,
            obs_matrix,
            2,
            chains=chains,
            steps=steps,
            seed=seed,
            measure_every=measure_every,
            threads=threads,
        )
        return _entry_from_terms(
            color, k, values, float(np.sum(errors)), MONTE_CARLO, samples, phase_mean
        )
    raise DomainError(f"unknown estimator {estimator!r}")


def factorization_check(
    model: ShiftedModel,
    s: int,
    t: int,
    colors=(0, 0),
    chains: int = 4,
    steps: int = 100_000,
    seed: int = 0,
    measure_every: int | None = None,
    threads: int | None = None,
) -> FactorizationReport:
    """Connected part of < Tr M^s Tr M^t >, normalized; O(N^-(D-2)) expected.

    Normalization is by the product of the one-trace factors, falling back
    to the absolute scale max(|<s>|, |<t>|, 1)^2 when either factor is
    close to zero.  Tr M^0 = N is deterministic, so s = 0 or t = 0 gives a
    connected part of exactly zero.
    """
    if s < 0 or t < 0:
        raise DomainError("powers must be non-negative")
    n = model.params.size
    if s == 0 or t == 0:
        return FactorizationReport(
            s=s, t=t, connected=0j, normalized=0j, scale=float(n * n),
            std_error=0.0, phase_mean=None,
        )
    cs, ct = colors

    def obs_scalar(x, total):
        a = x[:, cs].astype(complex) ** s
        b = x[:, ct].astype(complex) ** t
        return np.stack([a * b, a, b], axis=1)

    def obs_matrix(mats, mdl):
        a = complex(np.trace(np.linalg.matrix_power(mats[cs], s)))
        b = complex(np.trace(np.linalg.matrix_power(mats[ct], t)))
        return np.array([a * b, a, b])

    values, errors, phase_mean, samples = mc_expectations(
        model, obs_scalar, obs_matrix, 3,
        chains=chains, steps=steps, seed=seed,
        measure_every=measure_every, threads=threads,
    )
    joint, first, second = values
    connected = joint - first * second
    product = first * second
    if abs(product) > 1e-8 * max(abs(joint), 1.0):
        scale = abs(product)
    else:
        scale = max(abs(first), abs(second), 1.0) ** 2
    err = float(errors[0] + abs(second) * errors[1] + abs(first) * errors[2])
    return FactorizationReport(
        s=s,
        t=t,
        connected=connected,
        normalized=connected / scale,
        scale=scale,
        std_error=err,
        phase_mean=phase_mean,
    )


# ---------------------------------------------------------------------------
# Tensor-side cross-check of the moment dictionary
# ---------------------------------------------------------------------------


def quartic_scalar_moment(p: int, quartic: float, tolerance: float = 1e-10) -> float:
    """< (|T|^2)^p > for the complex scalar with action |T|^2/2 + quartic |T|^4.

    In the radial variable rho = |T|^2 the measure is exp(-rho/2 - quartic
    rho^2) d rho on [0, inf).
    """
    if quartic < 0:
        raise DomainError("quartic coefficient must be >= 0")

    def density(rho):
        return math.exp(-0.5 * rho - quartic * rho * rho)

    z, z_err = scipy_quad(density, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=300)
    num, n_err = scipy_quad(
        lambda rho: rho**p * density(rho), 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=300
    )
    value = num / z
    if (n_err + z_err * abs(value)) / z > tolerance:
        raise QuadratureError("radial quadrature above the requested tolerance")
    return value


def tensor_side_check(
    params: ModelParams, p: int, tolerance: float = 1e-8
) -> TensorSideReport:
    """End-to-end test of the tensor <-> matrix moment dictionary at N = 1.

    The tensor side is the direct radial integral of (|T|^2)^p with action
    |T|^2/2 + (lam D / 4) |T|^4.  The Gaussian split that produces the
    D-scalar coupled model from that action yields the coupled weight at
    four times the quartic-normalized coupling, so the matrix-side Hermite
    moments are computed at 4 lam and transformed with the dictionary
    constant at 4 lam.  The two sides agree within quadrature error.
    """
    if params.size != 1:
        raise DomainError("tensor_side_check requires N = 1")
    if params.colors > 4:
        raise DomainError("tensor_side_check requires D <= 4")
    if params.coupling <= 0:
        raise DomainError("tensor_side_check requires coupling > 0")
    if p < 0:
        raise DomainError(f"p must be >= 0, got {p}")

    lam, d = params.coupling, params.colors
    tensor_value = quartic_scalar_moment(p, lam * d / 4.0)

    matrix_coupling = 4.0 * lam
    dual = ShiftedModel(ModelParams(colors=d, size=1, coupling=matrix_coupling))

    def hermite_obs(q):
        def obs(coords, total):
            return spectral_moment(coords[0], q)

        return obs

    def spectral_moment(x, q):
        # monic Hermite H_q at variance 1, vectorized
        if q == 0:
            return np.ones(1)
        prev, cur = np.ones_like(x), x
        for deg in range(1, q):
            prev, cur = cur, x * cur - deg * prev
        return cur

    values, errors, _ = scalar_expectations(
        dual,
        [hermite_obs(q) for q in range(p + 1)],
        tolerance=tolerance,
        variables="original",
    )
    matrix_value = theta_from_matrix(p, values, matrix_coupling)
    return TensorSideReport(
        p=p,
        tensor_side=tensor_value,
        matrix_side=matrix_value,
        difference=abs(tensor_value - matrix_value),
        matrix_coupling=matrix_coupling,
        tolerance=tolerance,
    )
