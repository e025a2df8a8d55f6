"""Spectral maximal-correlation tests, checked against a char-poly oracle."""

import math

import numpy as np
import pytest

from artifact.discrete_prob import FiniteAlphabet, JointTable, TableError
from artifact.maxcorr_spectral import (ConvergenceError, correlation_profile,
                                       in_Bprime, maximal_correlation,
                                       normalized_matrix, singular_values,
                                       top_singular_vectors)

from oracles import TABLE2_RHO, TABLE6_RHO, charpoly_sigma2


def joint2(mass, names=("A", "B")):
    mass = np.asarray(mass, dtype=float)
    axes = tuple(FiniteAlphabet(n, range(k)) for n, k in zip(names, mass.shape))
    return JointTable(axes, mass)


def random_joint2(rng, shape):
    return joint2(rng.dirichlet(np.ones(shape[0] * shape[1])).reshape(shape))


def test_top_singular_structure():
    rng = np.random.default_rng(42)
    for shape in ((2, 2), (3, 2), (4, 4)):
        t = random_joint2(rng, shape)
        sv = singular_values(normalized_matrix(t))
        assert sv.top == pytest.approx(1.0, abs=1e-10)
        u, v = top_singular_vectors(normalized_matrix(t))
        assert np.allclose(u, np.sqrt(t.mass.sum(axis=1)), atol=1e-8)
        assert np.allclose(v, np.sqrt(t.mass.sum(axis=0)), atol=1e-8)


def test_sigma2_matches_charpoly_oracle():
    rng = np.random.default_rng(7)
    for shape in ((2, 2), (2, 3), (3, 3), (4, 3)):
        for _ in range(40):
            t = random_joint2(rng, shape)
            assert maximal_correlation(t) == pytest.approx(
                charpoly_sigma2(t.mass), abs=1e-9)


def test_independent_pair_has_zero_correlation():
    rng = np.random.default_rng(3)
    for _ in range(40):
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(4))
        t = joint2(np.outer(p, q))
        assert maximal_correlation(t) <= 1e-10


def test_deterministic_coupling_has_unit_correlation():
    t = joint2(np.diag([0.2, 0.3, 0.5]))
    assert maximal_correlation(t) == pytest.approx(1.0, abs=1e-12)


def test_named_table_correlations():
    from artifact.marc_models import sources_named
    assert maximal_correlation(sources_named("table2")) == pytest.approx(
        TABLE2_RHO, abs=1e-12)
    assert maximal_correlation(sources_named("table6")) == pytest.approx(
        TABLE6_RHO, abs=1e-12)
    # 2x2 closed form |det| / sqrt(r0 r1 c0 c1) as a second route
    m = sources_named("table6").mass
    r, c = m.sum(axis=1), m.sum(axis=0)
    closed = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) / math.sqrt(
        r[0] * r[1] * c[0] * c[1])
    assert maximal_correlation(sources_named("table6")) == pytest.approx(
        closed, abs=1e-12)


def test_zero_marginal_rows_are_ignored():
    # third row carries no mass; result must match the 2x3 subtable
    full = np.array([[0.2, 0.1, 0.1], [0.1, 0.3, 0.2], [0.0, 0.0, 0.0]])
    sub = full[:2] / full[:2].sum()
    got = maximal_correlation(joint2(full))
    want = maximal_correlation(joint2(sub))
    # not equal in general (marginals shift), but both must agree with the
    # oracle on their own mass
    assert got == pytest.approx(charpoly_sigma2(full), abs=1e-9)
    assert want == pytest.approx(charpoly_sigma2(sub), abs=1e-9)


def test_normalized_matrix_requires_two_axes():
    t = JointTable((FiniteAlphabet("A", range(2)),), np.array([0.5, 0.5]))
    with pytest.raises(TableError):
        normalized_matrix(t)
    three = JointTable(tuple(FiniteAlphabet(n, range(2)) for n in "ABC"),
                       np.ones((2, 2, 2)) / 8)
    with pytest.raises(TableError):
        maximal_correlation(three)


def test_one_symbol_axis_has_zero_correlation():
    t = joint2(np.array([[0.4, 0.6]]), names=("A", "B"))
    assert maximal_correlation(t) == 0.0


# --- conditional profiles and the correlation budget ------------------------

def _profile_table(rho_inputs):
    """p(S1,S2,X1,X2): coupled input pair drawn independently of the sources.

    The inputs form a symmetric binary pair with maximal correlation
    rho_inputs; since they ignore the sources, every conditional entry of
    the profile equals rho_inputs too.
    """
    s = np.array([[0.4, 0.1], [0.1, 0.4]])
    eps = (1.0 - rho_inputs) / 2.0
    pair = 0.5 * np.array([[1 - eps, eps], [eps, 1 - eps]])
    mass = np.einsum("ab,xy->abxy", s, pair)
    axes = tuple(FiniteAlphabet(n, range(2)) for n in ("S1", "S2", "X1", "X2"))
    return JointTable(axes, mass / mass.sum())


def test_profile_entries_and_budget():
    t = _profile_table(0.0)
    prof = correlation_profile(t)
    labels = [lab for lab, _ in prof.entries()]
    assert labels[0] == "uncond"
    assert any(lab.startswith("s1=") for lab in labels)
    assert any(lab.startswith("s1s2=") for lab in labels)
    rho_src = maximal_correlation(
        JointTable(t.axes[:2], t.mass.sum(axis=(2, 3))))
    assert in_Bprime(prof, rho_src)


def test_budget_rejects_overcorrelated_inputs():
    t = _profile_table(1.0)  # X1 == X2 exactly, rho = 1 > rho_sources
    prof = correlation_profile(t)
    rho_src = maximal_correlation(
        JointTable(t.axes[:2], t.mass.sum(axis=(2, 3))))
    assert rho_src < 0.99
    assert not in_Bprime(prof, rho_src)
    offending = [lab for lab, r in prof.entries() if r > rho_src + 1e-9]
    assert offending  # at least one labeled witness


def test_profile_skips_zero_mass_conditions():
    # S2 symbol 1 never occurs; no s2=1 entry may appear
    s = np.array([[0.6, 0.0], [0.4, 0.0]])
    mass = np.einsum("ab,ax,by->abxy", s, np.eye(2), np.eye(2))
    axes = tuple(FiniteAlphabet(n, range(2)) for n in ("S1", "S2", "X1", "X2"))
    prof = correlation_profile(JointTable(axes, mass / mass.sum()))
    assert all(lab != "s2=1" for lab, _ in prof.entries())


def test_profile_marginalizes_extra_axes():
    t = _profile_table(0.0)
    extra = JointTable(t.axes + (FiniteAlphabet("Q", range(2)),),
                       np.stack([t.mass, t.mass], axis=-1) / 2.0)
    a = dict(correlation_profile(t).entries())
    b = dict(correlation_profile(extra).entries())
    assert a.keys() == b.keys()
    for k in a:
        assert a[k] == pytest.approx(b[k], abs=1e-12)


def test_in_bprime_tolerance_validation():
    prof = correlation_profile(_profile_table(0.0))
    with pytest.raises(ValueError):
        in_Bprime(prof, 0.5, tol=-1.0)


def test_convergence_error_importable():
    assert issubclass(ConvergenceError, Exception)
