"""Exact block-scheme simulator: preimages, layout, and zero-error runs."""

import math

import numpy as np
import pytest

from artifact.discrete_prob import (ConditionalKernel, FiniteAlphabet,
                                    JointTable, TableError, entropy)
from artifact.marc_models import (MarcScenario, Psomarc, identity_encoders,
                                  psomarc_table1, psomarc_table7,
                                  psomarc_tables45, sources_named)
from artifact.psomarc_simulator import (SchemeLayout, SimReport, run_scheme,
                                        run_table1_scheme, run_table7_scheme,
                                        sample_induced, theta)

from oracles import LOG2_6, ref_entropy


def test_theta_binary_example():
    ch = psomarc_table1()
    assert theta(ch, 0) == ((0, 0), (0, 1))
    assert theta(ch, 1) == ((1, 0), (1, 1))


def test_theta_ternary_example():
    ch = psomarc_table7()
    assert theta(ch, 2) == ((1, 1), (2, 0))
    # the middle symbol collects every pair the special map does not list
    assert len(theta(ch, 1)) == 5
    assert (1, 2) in theta(ch, 1)


def test_theta_requires_deterministic_map():
    with pytest.raises(TableError):
        theta(psomarc_tables45(0.2), 0)


def test_theta_is_sorted():
    ch = psomarc_table7()
    for y in range(3):
        pairs = theta(ch, y)
        assert list(pairs) == sorted(pairs)


# --- layout -------------------------------------------------------------------

def test_layout_binary():
    lay = SchemeLayout(psomarc_table1(), sources_named("table2"))
    assert len(lay.probs) == 3  # three support cells
    assert lay.bits_per_symbol == 1
    assert lay.ambiguity(0) == ((0, 0), (0, 1))
    assert lay.ambiguity(1) == ((1, 0), (1, 1))


def test_layout_ternary_restricts_to_support():
    lay = SchemeLayout(psomarc_table7(), sources_named("table8"))
    assert len(lay.probs) == 6
    assert lay.bits_per_symbol == 1
    for y in range(3):
        amb = lay.ambiguity(y)
        assert 1 <= len(amb) <= 2  # full preimages are bigger; support trims
        assert list(amb) == sorted(amb)


def test_layout_rejects_noninjective_relay_map():
    # both inputs collapse to one relay symbol: inversion impossible
    x1, x2 = FiniteAlphabet("X1", range(2)), FiniteAlphabet("X2", range(2))
    y3 = ConditionalKernel.deterministic(
        (x1, x2), (FiniteAlphabet("Y3", range(2)),), lambda p: 0)
    ys = ConditionalKernel.deterministic(
        (x1, x2), (FiniteAlphabet("YS", range(2)),), lambda p: p[0])
    ch = Psomarc(y3, ys, 1.0)
    with pytest.raises(TableError):
        SchemeLayout(ch, sources_named("table2"))


def test_layout_rejects_small_bit_budget():
    ch0 = psomarc_table1()
    starved = Psomarc(ch0.y3_map, ch0.ys_map, 0.5)  # budget below one bit
    with pytest.raises(TableError):
        SchemeLayout(starved, sources_named("table2"))


def test_layout_rejects_oversized_sources():
    wide = JointTable((FiniteAlphabet("S1", range(3)),
                       FiniteAlphabet("S2", range(2))), np.ones((3, 2)) / 6)
    with pytest.raises(TableError):
        SchemeLayout(psomarc_table1(), wide)


# --- runs ----------------------------------------------------------------------

def test_report_arithmetic():
    rep = SimReport(blocks_run=200, relay_errors=0, destination_errors=3)
    assert rep.empirical_pe == pytest.approx(3 / 200)
    text = "\n".join(rep.lines())
    assert "200" in text and "0.015" in text


def test_zero_error_on_binary_scheme():
    rep = run_table1_scheme(60, 400, seed=42)
    assert rep.blocks_run == 400
    assert rep.relay_errors == 0
    assert rep.destination_errors == 0
    assert rep.empirical_pe == 0.0


def test_zero_error_on_ternary_scheme():
    rep = run_table7_scheme(80, 300, seed=7)
    assert (rep.relay_errors, rep.destination_errors) == (0, 0)


def test_single_block_single_symbol():
    rep = run_scheme(psomarc_table1(), sources_named("table2"), 1, 1, seed=0)
    assert rep.blocks_run == 1
    assert rep.empirical_pe == 0.0


def test_thread_count_does_not_change_counts():
    base = run_table1_scheme(40, 500, seed=11, threads=1)
    for k in (2, 7):
        again = run_table1_scheme(40, 500, seed=11, threads=k)
        assert (again.blocks_run, again.relay_errors,
                again.destination_errors) == (base.blocks_run,
                                              base.relay_errors,
                                              base.destination_errors)


def test_run_argument_validation():
    with pytest.raises(ValueError):
        run_scheme(psomarc_table1(), sources_named("table2"), 0, 5, seed=1)
    with pytest.raises(ValueError):
        run_scheme(psomarc_table1(), sources_named("table2"), 5, 0, seed=1)


def test_degenerate_source_runs_clean():
    src = JointTable((FiniteAlphabet("S1", range(2)),
                      FiniteAlphabet("S2", range(2))),
                     np.array([[0.0, 1.0], [0.0, 0.0]]))
    rep = run_scheme(psomarc_table1(), src, 30, 50, seed=3)
    assert rep.empirical_pe == 0.0


# --- sampling ------------------------------------------------------------------

def test_sample_induced_matches_source_statistics():
    sc = MarcScenario(sources_named("table2"), psomarc_table1())
    names, rows = sample_induced(sc, identity_encoders(sc), 60000, seed=99)
    iy3 = names.index("Y3")
    counts = np.zeros(3)
    for r in rows:
        counts[r[iy3]] += 1
    freq = counts / counts.sum()
    assert np.allclose(freq, 1 / 3, atol=0.01)  # uniform relay observations
    # empirical source entropy close to the true joint entropy
    i1, i2 = names.index("S1"), names.index("S2")
    pair_counts = {}
    for r in rows:
        pair_counts[(r[i1], r[i2])] = pair_counts.get((r[i1], r[i2]), 0) + 1
    emp = -sum((c / len(rows)) * math.log2(c / len(rows))
               for c in pair_counts.values())
    assert emp == pytest.approx(math.log2(3.0), abs=0.01)


def test_sample_induced_respects_identity_encoding():
    sc = MarcScenario(sources_named("table8"), psomarc_table7())
    names, rows = sample_induced(sc, identity_encoders(sc), 500, seed=5)
    i1, ix = names.index("S1"), names.index("X1")
    assert all(r[i1] == r[ix] for r in rows)


def test_sampled_support_entropy_upper_bound():
    # the six-cell source saturates its support size
    assert entropy(sources_named("table8"), {"S1", "S2"}) == LOG2_6
    lay = SchemeLayout(psomarc_table7(), sources_named("table8"))
    assert len(lay.probs) == 6
