"""Adaptive tensor-product Gauss-Hermite quadrature over R^D.

Integrals have the form

    < f > = integral f(x) w(x) prod_c exp(-x_c^2/2) dx  /  (same with f = 1)

with a smooth complex weight factor w.  Nodes and weights come from the
probabilists' Gauss-Hermite rule, so the Gaussian factor is exact; the
rule is refined by doubling the per-axis node count until every requested
observable changes by less than the tolerance, which also serves as the
error estimate.  Memory stays bounded by iterating over the first axis.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .errors import QuadratureError, SingularDenominatorError

#: Per-dimension node schedules; the last entry is the refinement limit.
LEVELS = {
    1: (40, 80, 160, 320),
    2: (32, 64, 128, 256),
    3: (24, 48, 96, 160),
    4: (12, 24, 48, 72),
}

MIN_WEIGHT_DENOMINATOR = 1e-13


def _level_sums(dims, nodes, weights, weight_factor, observables):
    """One quadrature level: returns (Z, numerators) accumulated exactly once."""
    z_total = 0.0 + 0.0j
    numerators = np.zeros(len(observables), dtype=complex)
    if dims == 1:
        coords = (nodes,)
        w = weights * weight_factor(coords, nodes)
        z_total = w.sum()
        for i, obs in enumerate(observables):
            numerators[i] = (w * obs(coords, nodes)).sum()
        return z_total, numerators

    # Broadcast views for the trailing dims; the first axis is looped.
    tail_shape = [(1,) * (j - 1) + (-1,) + (1,) * (dims - 1 - j) for j in range(1, dims)]
    tail_coords = [nodes.reshape(shape) for shape in tail_shape]
    tail_weight = weights.reshape(tail_shape[0]).astype(float).copy()
    for j in range(1, dims - 1):
        tail_weight = tail_weight * weights.reshape(tail_shape[j])
    tail_total = sum(tail_coords)
    for i0, x0 in enumerate(nodes):
        coords = (np.asarray(x0),) + tuple(tail_coords)
        total = x0 + tail_total
        w = weights[i0] * tail_weight * weight_factor(coords, total)
        z_total += w.sum()
        for i, obs in enumerate(observables):
            numerators[i] += (w * obs(coords, total)).sum()
    return z_total, numerators


def expectations(
    dims: int,
    weight_factor,
    observables,
    tolerance: float = 1e-8,
    levels=None,
):
    """Adaptive expectations of ``observables`` under the coupled weight.

    ``weight_factor(coords, total)`` and each observable receive the tuple
    of broadcastable per-axis coordinate arrays plus their sum and must
    return broadcast-compatible arrays.  Returns (values, errors, nodes)
    where errors are the last refinement differences.  Raises
    QuadratureError when refinement stalls above the tolerance.
    """
    if dims < 1 or dims > max(LEVELS):
        raise QuadratureError(f"dimension {dims} outside the supported range")
    schedule = levels if levels is not None else LEVELS[dims]
    previous = None
    for n in schedule:
        nodes, weights = hermegauss(n)
        z_total, numerators = _level_sums(dims, nodes, weights, weight_factor, observables)
        values = numerators / z_total
        if previous is not None:
            errors = np.abs(values - previous)
            if np.all(errors <= tolerance):
                return list(values), list(errors), n**dims
        previous = values
    raise QuadratureError(
        f"refinement stalled at {schedule[-1]}^{dims} nodes above tolerance {tolerance}"
    )


def coupled_weight_original(colors: int, coupling: float):
    """Weight factor of the unshifted model: 1 / (1 + i sqrt(lam/2) X)."""
    gamma = np.sqrt(coupling / 2.0)

    def factor(coords, total):
        denom = 1.0 + 1j * gamma * total
        if np.min(np.abs(denom)) <= MIN_WEIGHT_DENOMINATOR:
            raise SingularDenominatorError("coupling denominator vanished on the grid")
        return 1.0 / denom

    return factor


def coupled_weight_shifted(alpha: complex):
    """Weight factor after the collapse-point shift: e^(-alpha X)/(1 - alpha X)."""

    def factor(coords, total):
        denom = 1.0 - alpha * total
        if np.min(np.abs(denom)) <= MIN_WEIGHT_DENOMINATOR:
            raise SingularDenominatorError("shifted denominator vanished on the grid")
        return np.exp(-alpha * total) / denom

    return factor
