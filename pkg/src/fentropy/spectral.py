"""Koopman representations and Markov operators of finite nonsingular systems.

Matrices act on functions f: states -> R written in the indicator basis, so
``(M f)(x) = sum_y M[x, y] f(y)``; the Hilbert space is L^2(eta) with
``<f, h> = sum_x eta(x) f(x) h(x)``. A Koopman matrix is unitary for that
inner product, not the Euclidean one; :func:`orthonormal_form` conjugates to
the basis ``1_x / sqrt(eta(x))`` where it becomes a permutation matrix.

Every finite system carries an invariant measure (counting measure), so
``pi(mu)`` always has norm 1 on the whole space. What can be checked here
are the inequalities linking inner products, norms and entropy; a spectral
gap for all representations of a group is out of reach of finite
computation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .engine import FiniteNonsingularSystem, cyclic_shift_system, exact_entropy_finite
from .finset import INTEGER, FiniteSupportMeasure, geometric_bar

Subspace = Literal["full", "complement"]


class NormNotConverged(RuntimeError):
    pass


def koopman(system: FiniteNonsingularSystem, g) -> np.ndarray:
    """pi(g) f(x) = sqrt(d g_* eta / d eta (x)) f(g^{-1} x) as a matrix."""
    n = system.n_states
    back = system.perm(system.group.inverse(g))
    eta = system.eta
    m = np.zeros((n, n))
    m[np.arange(n), back] = np.sqrt(eta[back] / eta)
    return m


def markov_operator(system: FiniteNonsingularSystem, mu: FiniteSupportMeasure) -> np.ndarray:
    """pi(mu) = sum_g mu(g) pi(g)."""
    if system.group != mu.group:
        raise ValueError("system and measure live on different groups")
    out = np.zeros((system.n_states, system.n_states))
    for g, w in mu.atoms:
        if w:
            out += w * koopman(system, g)
    return out


def orthonormal_form(m: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """D^{1/2} M D^{-1/2} with D = diag(eta): the same operator in an orthonormal basis."""
    s = np.sqrt(np.asarray(eta))
    return s[:, None] * m / s[None, :]


def adjoint(m: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Adjoint for the eta-weighted inner product: D^{-1} M^T D."""
    eta = np.asarray(eta)
    return m.T * eta[None, :] / eta[:, None]


def inner(f: np.ndarray, h: np.ndarray, eta: np.ndarray) -> float:
    return float(np.dot(eta, f * h))


def _power_norm(a: np.ndarray, tol: float, max_iter: int) -> float:
    b = a.T @ a
    v = np.random.default_rng(0).standard_normal(b.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = b @ v
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - lam) <= tol * new:
            return math.sqrt(new)
        lam = new
    raise NormNotConverged(f"power iteration did not converge in {max_iter} steps")


def operator_norm(
    m: np.ndarray,
    eta: np.ndarray,
    subspace: Subspace = "full",
    method: Literal["svd", "power"] = "svd",
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> float:
    """Operator norm of ``m`` on L^2(eta), or of its restriction to functions orthogonal to constants.

    ``method="power"`` runs power iteration on A^T A; it slows to a crawl
    when the top singular values cluster, so dense SVD is the default.
    """
    a = orthonormal_form(m, eta)
    if subspace == "complement":
        u = np.sqrt(np.asarray(eta))
        a = a - np.outer(a @ u, u)
    elif subspace != "full":
        raise ValueError(f"unknown subspace {subspace!r}")
    if method == "svd":
        return float(np.linalg.norm(a, 2))
    if method == "power":
        return _power_norm(a, tol, max_iter)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class JensenCheck:
    lhs: float
    rhs: float
    holds: bool


def jensen_bound_check(system: FiniteNonsingularSystem, g, tol: float = 1e-10) -> JensenCheck:
    """-2 log <1, pi(g) 1> against sum_x eta(x) (-log d g^{-1}_* eta / d eta (x))."""
    eta = system.eta
    back = system.perm(system.group.inverse(g))
    overlap = math.fsum(np.sqrt(eta * eta[back]))
    lhs = -2.0 * math.log(overlap)
    rhs = -math.fsum(eta * system.log_rn_inv_vector(g))
    return JensenCheck(lhs, rhs, lhs <= rhs + tol)


@dataclass(frozen=True)
class NormEntropyReport:
    norm: float
    norm_bound: float
    overlap: float
    overlap_bound: float
    entropy: float
    tail: float
    slack: float
    holds: bool


def norm_entropy_check(
    system: FiniteNonsingularSystem, mu: FiniteSupportMeasure, trunc_n: int, tol: float = 1e-10
) -> NormEntropyReport:
    """The chain -2 log ||pi(bar)|| <= -2 log <1, pi(bar) 1> <= h_bar for the truncated average.

    The first step is Cauchy-Schwarz, the second convexity of -log combined
    with the single-element Jensen bound. ``slack`` allows ``tol`` plus the
    truncated mass.
    """
    bar = geometric_bar(mu, trunc_n)
    op = markov_operator(system, bar)
    norm = operator_norm(op, system.eta, "full")
    overlap = inner(np.ones(system.n_states), op @ np.ones(system.n_states), system.eta)
    norm_bound = -2.0 * math.log(norm)
    overlap_bound = -2.0 * math.log(overlap)
    entropy = exact_entropy_finite(system, bar)
    slack = tol + bar.tail
    holds = norm_bound <= overlap_bound + tol and overlap_bound <= entropy + slack
    return NormEntropyReport(norm, norm_bound, overlap, overlap_bound, entropy, bar.tail, slack, holds)


def fourier_norm(n: int, mu: FiniteSupportMeasure, trunc_n: int) -> float:
    """Closed-form norm of pi(bar) off the constants for Z acting on Z/n uniformly.

    Characters diagonalize the translations: on the k-th character the
    truncated average acts by sum_{j<=N} 2^{-j-1} lam_k^j / (1 - 2^{-N-1}),
    with lam_k = sum_m mu(m) exp(2 pi i m k / n).
    """
    norm_const = 1.0 - 2.0 ** (-trunc_n - 1)
    best = 0.0
    for k in range(1, n):
        lam = sum(w * cmath.exp(2j * math.pi * m * k / n) for m, w in mu.atoms)
        z = lam / 2.0
        # sum_{j=0}^{N} z^j / 2, summed directly when z == 1
        s = (trunc_n + 1) / 2.0 if z == 1 else (1 - z ** (trunc_n + 1)) / (1 - z) / 2.0
        best = max(best, abs(s) / norm_const)
    return best


@dataclass(frozen=True)
class GapRow:
    n: int
    norm: float
    gap: float
    fourier_norm: float


def cyclic_gap_curve(n_list: Sequence[int], mu: FiniteSupportMeasure, trunc_n: int) -> list[GapRow]:
    """Norm of pi(bar) off the constants, and -2 log of it, for Z acting on Z/n."""
    if mu.group != INTEGER:
        raise ValueError("need a measure on the integers")
    bar = geometric_bar(mu, trunc_n)
    rows = []
    for n in n_list:
        if n < 2:
            raise ValueError("quotients need n >= 2")
        system = cyclic_shift_system(n)
        norm = operator_norm(markov_operator(system, bar), system.eta, "complement")
        rows.append(GapRow(n, norm, -2.0 * math.log(norm), fourier_norm(n, mu, trunc_n)))
    return rows
