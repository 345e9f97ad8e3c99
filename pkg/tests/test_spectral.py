import math

import numpy as np
import pytest

from fentropy.bernoulli import phi
from fentropy.engine import (
    FiniteNonsingularSystem,
    cyclic_shift_system,
    exact_entropy_finite,
    random_finite_system,
    random_measure,
    two_point_swap,
)
from fentropy.finset import INTEGER, CyclicGroup, delta, geometric_bar, measure
from fentropy.spectral import (
    NormNotConverged,
    adjoint,
    cyclic_gap_curve,
    fourier_norm,
    inner,
    jensen_bound_check,
    koopman,
    markov_operator,
    norm_entropy_check,
    operator_norm,
    orthonormal_form,
)

SYM = measure([(1, 0.5), (-1, 0.5)], INTEGER)


def random_systems(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        s = random_finite_system(rng)
        yield s, random_measure(s.group, rng)


def group_sample(system):
    return system.group.elements() or list(range(-3, 4))


def bar_character_oracle(n, trunc):
    """max over k != 0 of |sum_{j<=N} 2^{-j-1} cos(2 pi k/n)^j| / (1 - 2^{-N-1}) for the symmetric walk."""
    best = 0.0
    for k in range(1, n):
        c = math.cos(2 * math.pi * k / n)
        s = sum(2.0 ** (-j - 1) * c**j for j in range(trunc + 1)) / (1 - 2.0 ** (-trunc - 1))
        best = max(best, abs(s))
    return best


# ---------------------------------------------------------------- Koopman matrices


def test_koopman_examples():
    s = two_point_swap(0.75)
    assert np.array_equal(koopman(s, 0), np.eye(2))
    m = koopman(s, 1)
    assert m[0, 0] == 0 and m[1, 1] == 0
    assert m[0, 1] == pytest.approx(math.sqrt(0.25 / 0.75))
    assert m[1, 0] == pytest.approx(math.sqrt(0.75 / 0.25))
    u = FiniteNonsingularSystem(np.full(4, 0.25), INTEGER, generator=np.array([2, 0, 3, 1]))
    m = koopman(u, 1)
    # (pi(g) f)(x) = f(g^{-1} x)
    back = u.perm(-1)
    assert np.array_equal(m, np.eye(4)[back])


def test_koopman_action_on_functions():
    rng = np.random.default_rng(2)
    for s, _ in random_systems(20, 3):
        g = group_sample(s)[-1]
        f = rng.standard_normal(s.n_states)
        back = s.perm(s.group.inverse(g))
        rn = s.eta[back] / s.eta  # d g_* eta / d eta
        assert np.allclose(koopman(s, g) @ f, np.sqrt(rn) * f[back])


def test_unitarity_and_adjoint():
    for s, _ in random_systems(100, 4):
        d = np.diag(s.eta)
        for g in group_sample(s):
            m = koopman(s, g)
            assert np.allclose(m.T @ d @ m, d, atol=1e-10)
            u = orthonormal_form(m, s.eta)
            assert np.allclose(u.T @ u, np.eye(s.n_states), atol=1e-10)
            assert np.allclose(adjoint(m, s.eta), koopman(s, s.group.inverse(g)), atol=1e-10)


def test_representation_property():
    for s, _ in random_systems(100, 5):
        elems = group_sample(s)
        for g in elems[:3]:
            for h in elems[-3:]:
                lhs = koopman(s, g) @ koopman(s, h)
                assert np.allclose(lhs, koopman(s, s.group.op(g, h)), atol=1e-10)


def test_overlap_at_most_one():
    for s, _ in random_systems(100, 6):
        ones = np.ones(s.n_states)
        for g in group_sample(s):
            assert inner(ones, koopman(s, g) @ ones, s.eta) <= 1 + 1e-12


# ---------------------------------------------------------------- Markov operators and norms


def test_markov_operator_examples():
    s = two_point_swap(0.75)
    assert np.allclose(markov_operator(s, delta(0, s.group)), np.eye(2))
    m = markov_operator(s, delta(1, s.group))
    ones = np.ones(2)
    q = 0.75
    hand = q * math.sqrt((1 - q) / q) + (1 - q) * math.sqrt(q / (1 - q))
    assert inner(ones, m @ ones, s.eta) == pytest.approx(hand, abs=1e-15)
    assert inner(ones, m @ ones, s.eta) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)


@pytest.mark.parametrize("n", [3, 4, 7, 12])
def test_circulant_spectrum(n):
    s = cyclic_shift_system(n)
    m = markov_operator(s, SYM)
    eig = np.sort(np.linalg.eigvalsh(orthonormal_form(m, s.eta)))
    oracle = np.sort([math.cos(2 * math.pi * k / n) for k in range(n)])
    assert np.allclose(eig, oracle, atol=1e-12)


def test_markov_norm_at_most_one():
    for s, mu in random_systems(50, 8):
        assert operator_norm(markov_operator(s, mu), s.eta) <= 1 + 1e-10


def test_operator_norm_identity():
    eta = np.array([0.2, 0.3, 0.5])
    assert operator_norm(np.eye(3), eta) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("n", [3, 5, 8, 9, 16])
def test_operator_norm_off_constants(n):
    s = cyclic_shift_system(n)
    m = markov_operator(s, SYM)
    oracle = max(abs(math.cos(2 * math.pi * k / n)) for k in range(1, n))
    assert operator_norm(m, s.eta, "complement") == pytest.approx(oracle, abs=1e-12)
    assert operator_norm(m, s.eta, "complement", method="power") == pytest.approx(oracle, abs=1e-8)


def test_operator_norm_two_by_two():
    q = 0.75
    s = two_point_swap(q)
    m = markov_operator(s, measure([(0, 0.4), (1, 0.6)], s.group))
    # orthonormal form is [[0.4, 0.6], [0.6, 0.4]]; singular values 1 and 0.2
    assert operator_norm(m, s.eta) == pytest.approx(1.0, abs=1e-14)
    # constants sit at sqrt(eta) there, which is not a singular direction when q != 1/2
    a, b = math.sqrt(q), math.sqrt(1 - q)
    v = (-b, a)
    image = (0.4 * v[0] + 0.6 * v[1], 0.6 * v[0] + 0.4 * v[1])
    assert operator_norm(m, s.eta, "complement") == pytest.approx(math.hypot(*image), abs=1e-14)
    half = two_point_swap(0.5)
    m_half = markov_operator(half, measure([(0, 0.4), (1, 0.6)], half.group))
    assert operator_norm(m_half, half.eta, "complement") == pytest.approx(0.2, abs=1e-14)
    assert operator_norm(m, s.eta, method="power") == pytest.approx(1.0, abs=1e-9)


def test_power_iteration_cap():
    s = cyclic_shift_system(64)
    m = markov_operator(s, SYM)
    with pytest.raises(NormNotConverged):
        operator_norm(m, s.eta, "complement", method="power", max_iter=3)


def test_operator_norm_bad_arguments():
    with pytest.raises(ValueError):
        operator_norm(np.eye(2), np.full(2, 0.5), "half")
    with pytest.raises(ValueError):
        operator_norm(np.eye(2), np.full(2, 0.5), method="qr")


# ---------------------------------------------------------------- Jensen bound


def test_jensen_examples():
    s = two_point_swap(0.75)
    r = jensen_bound_check(s, 0)
    assert (r.lhs, r.rhs, r.holds) == (0.0, 0.0, True)
    r = jensen_bound_check(s, 1)
    assert r.lhs == pytest.approx(math.log(4 / 3), abs=1e-14)
    assert r.rhs == pytest.approx(phi(0.75), abs=1e-14)
    assert r.holds
    r = jensen_bound_check(two_point_swap(0.5), 1)
    assert r.lhs == pytest.approx(0.0, abs=1e-15) and r.rhs == pytest.approx(0.0, abs=1e-15) and r.holds


def test_jensen_rhs_is_single_element_entropy():
    for s, _ in random_systems(30, 9):
        for g in group_sample(s):
            r = jensen_bound_check(s, g)
            assert r.rhs == pytest.approx(exact_entropy_finite(s, delta(g, s.group)), abs=1e-13)
            assert r.lhs >= -1e-12 and r.holds


# ---------------------------------------------------------------- norm and entropy chain


def test_norm_entropy_uniform():
    s = cyclic_shift_system(5)
    r = norm_entropy_check(s, SYM, 20)
    assert r.norm == pytest.approx(1.0, abs=1e-12)
    assert r.entropy == 0.0
    assert r.holds


def test_norm_entropy_swap():
    q = 0.75
    s = two_point_swap(q)
    r = norm_entropy_check(s, delta(1, s.group), 20)
    odd = math.fsum(2.0 ** (-n - 1) for n in range(1, 21, 2))
    assert r.entropy == pytest.approx(odd * phi(q) / (1 - 2.0**-21), abs=1e-12)
    assert r.norm_bound <= r.overlap_bound + 1e-10 <= r.entropy + 1e-10
    assert r.holds


def test_norm_entropy_random_systems():
    for s, mu in random_systems(50, 10):
        for n in (10, 20):
            r = norm_entropy_check(s, mu, n)
            assert r.holds
            # the chain holds without the truncation slack as well
            assert r.overlap_bound <= r.entropy + 1e-10


# ---------------------------------------------------------------- quotient curve


def test_gap_curve_examples():
    rows = cyclic_gap_curve([2], SYM, 40)
    # character value -1: sum 2^{-k-1} (-1)^k = 1/3
    assert rows[0].norm == pytest.approx(1 / 3, abs=1e-10)
    assert rows[0].gap == pytest.approx(-2 * math.log(1 / 3), abs=1e-9)
    for r in cyclic_gap_curve([2, 5, 16], delta(0, INTEGER), 10):
        assert r.norm == pytest.approx(1.0, abs=1e-12) and abs(r.gap) < 1e-11


def test_gap_curve_against_fourier():
    ns = list(range(2, 257, 2))
    rows = cyclic_gap_curve(ns, SYM, 40)
    for r in rows:
        assert abs(r.norm - bar_character_oracle(r.n, 40)) <= 1e-8
        assert abs(r.norm - r.fourier_norm) <= 1e-8
        assert r.norm == pytest.approx(1 / (2 - math.cos(2 * math.pi / r.n)), abs=1e-10)
    gaps = [r.gap for r in rows]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_fourier_norm_asymmetric_measure():
    mu = measure([(1, 0.7), (3, 0.3)], INTEGER)
    for n in (3, 6, 10):
        s = cyclic_shift_system(n)
        m = markov_operator(s, geometric_bar(mu, 15))
        assert operator_norm(m, s.eta, "complement") == pytest.approx(fourier_norm(n, mu, 15), abs=1e-10)


def test_gap_curve_errors():
    with pytest.raises(ValueError):
        cyclic_gap_curve([1], SYM, 5)
    with pytest.raises(ValueError):
        cyclic_gap_curve([4], delta(1, CyclicGroup(4)), 5)
