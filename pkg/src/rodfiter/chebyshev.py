"""Chebyshev polynomials of the first kind on [-1, 1].

Evaluation, the product identity, analytic integration of the basis and
coefficient extraction by sampling at Chebyshev-Gauss nodes. Everything here
works on the fixed domain ``tau in [-1, 1]``; mapping physical time onto it is
the caller's job.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "ChebSeries3",
    "BasisIntegralTable",
    "basis_integral_table",
    "eval_basis",
    "eval_series",
    "basis_product",
    "integrate_basis",
    "integrate_basis_segment",
    "coeffs_by_cosine_sampling",
]


@dataclass(frozen=True)
class ChebSeries3:
    """A 3-vector valued Chebyshev expansion ``sum_i coeffs[i] * F_i(tau)``.

    ``coeffs`` has shape ``(degree + 1, 3)`` and is stored read-only.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.ndim == 1:
            c = c.reshape(-1, 3)
        if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] < 1:
            raise ValueError(f"coefficients must have shape (m+1, 3), got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, degree: int = 0) -> "ChebSeries3":
        return cls(np.zeros((degree + 1, 3)))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, tau):
        return eval_series(self, tau)

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def truncated(self, degree: int) -> "ChebSeries3":
        """Keep degrees ``0..degree``, zero-padding if the series is shorter."""
        if degree < 0:
            raise ValueError("degree must be >= 0")
        out = np.zeros((degree + 1, 3))
        keep = min(degree, self.degree) + 1
        out[:keep] = self.coeffs[:keep]
        return ChebSeries3(out)

    def padded(self, degree: int) -> np.ndarray:
        """Dense coefficient array of exactly ``degree + 1`` rows (writable copy)."""
        return self.truncated(degree).coeffs.copy()


def eval_basis(i: int, tau):
    """Evaluate ``F_i(tau)`` by the three-term recurrence.

    ``tau`` may be a scalar or an array; the result has the same shape.
    """
    if i < 0:
        raise ValueError("degree must be >= 0")
    tau = np.asarray(tau, dtype=float)
    assert np.all(np.abs(tau) <= 1.0 + 1e-12), "tau outside [-1, 1]"
    f_prev = np.ones_like(tau)
    if i == 0:
        return f_prev if f_prev.ndim else float(f_prev)
    f = tau.copy()
    for _ in range(1, i):
        f_prev, f = f, 2.0 * tau * f - f_prev
    return f if f.ndim else float(f)


def eval_series(s: ChebSeries3, tau) -> np.ndarray:
    """Evaluate a :class:`ChebSeries3` with Clenshaw's backward recurrence.

    Returns shape ``(3,)`` for scalar ``tau`` and ``(len(tau), 3)`` otherwise.
    """
    c = s.coeffs
    tau = np.asarray(tau, dtype=float)
    t = tau[..., None]
    b1 = np.zeros(tau.shape + (3,))
    b2 = np.zeros_like(b1)
    for k in range(c.shape[0] - 1, 0, -1):
        b1, b2 = c[k] + 2.0 * t * b1 - b2, b1
    return c[0] + t * b1 - b2


def basis_product(j: int, k: int) -> tuple[tuple[int, int], float]:
    """``F_j * F_k = 0.5 * (F_{j+k} + F_{|j-k|})``.

    Returns the two output degrees and their common weight.
    """
    if j < 0 or k < 0:
        raise ValueError("degrees must be >= 0")
    return (j + k, abs(j - k)), 0.5


def integrate_basis(i: int) -> dict[int, float]:
    """Chebyshev coefficients of ``G_i(tau) = int_{-1}^{tau} F_i``.

    The result is sparse: at most the degrees ``i+1``, ``i-1`` and ``0`` appear.
    """
    if i < 0:
        raise ValueError("degree must be >= 0")
    if i == 0:
        return {0: 1.0, 1: 1.0}
    if i == 1:
        return {0: -0.25, 2: 0.25}
    return {
        i + 1: 1.0 / (2 * (i + 1)),
        i - 1: -1.0 / (2 * (i - 1)),
        0: -((-1) ** i) / (i * i - 1.0),
    }


def _eval_sparse(terms: dict[int, float], tau) -> float:
    return sum(w * eval_basis(d, tau) for d, w in terms.items())


def integrate_basis_segment(i: int, tau_a, tau_b):
    """``int_{tau_a}^{tau_b} F_i(tau) dtau`` from the antiderivative at both ends."""
    g = integrate_basis(i)
    return _eval_sparse(g, tau_b) - _eval_sparse(g, tau_a)


@dataclass(frozen=True)
class BasisIntegralTable:
    """Precomputed :func:`integrate_basis` weights for degrees ``0..max_degree``.

    For degree ``d`` the antiderivative is
    ``up[d] * F_{d+1} + down[d] * F_{d-1} + const[d] * F_0`` (``down`` is zero
    for ``d < 2``; those cases fold their low term into ``const``).
    """

    max_degree: int
    up: np.ndarray
    down: np.ndarray
    const: np.ndarray

    def integrate(self, weights: np.ndarray) -> np.ndarray:
        """Map integrand coefficients ``w_d`` (shape ``(D+1, 3)``) to ``sum_d w_d G_d``.

        The result has ``D + 2`` rows.
        """
        D = weights.shape[0] - 1
        if D > self.max_degree:
            raise ValueError(f"table covers degree {self.max_degree}, need {D}")
        out = np.zeros((D + 2,) + weights.shape[1:])
        up = self.up[: D + 1]
        out[1:] += up[:, None] * weights
        if D >= 2:
            out[1:D] += self.down[2 : D + 1, None] * weights[2:]
        out[0] += self.const[: D + 1] @ weights
        return out


@lru_cache(maxsize=16)
def basis_integral_table(max_degree: int) -> BasisIntegralTable:
    """Cached table for ``G_0 .. G_max_degree``."""
    d = np.arange(max_degree + 1, dtype=float)
    up = 1.0 / (2.0 * (d + 1.0))
    down = np.zeros_like(d)
    const = np.zeros_like(d)
    up[0] = 1.0
    const[0] = 1.0
    if max_degree >= 1:
        up[1] = 0.25
        const[1] = -0.25
    if max_degree >= 2:
        dd = d[2:]
        down[2:] = -1.0 / (2.0 * (dd - 1.0))
        sign = np.where(dd % 2 == 0, 1.0, -1.0)
        const[2:] = -sign / (dd * dd - 1.0)
    for arr in (up, down, const):
        arr.flags.writeable = False
    return BasisIntegralTable(max_degree, up, down, const)


def coeffs_by_cosine_sampling(
    f: Callable[[np.ndarray], np.ndarray], M: int, P: int
) -> ChebSeries3:
    """Approximate Chebyshev coefficients ``beta_0..beta_M`` of ``f`` on [-1, 1].

    Samples ``f`` at the ``P`` Chebyshev-Gauss nodes ``cos(pi (k + 1/2) / P)``
    and applies the discrete cosine sum directly (``O(M P)``). ``f`` receives the
    node array and must return an array of shape ``(P, 3)``.
    """
    if P < M + 1:
        raise ValueError(f"need P >= M + 1 samples, got P={P}, M={M}")
    theta = np.pi * (np.arange(P) + 0.5) / P
    values = np.asarray(f(np.cos(theta)), dtype=float).reshape(P, 3)
    j = np.arange(M + 1)
    basis = np.cos(np.outer(j, theta))
    beta = (2.0 / P) * basis @ values
    beta[0] *= 0.5
    return ChebSeries3(beta)
