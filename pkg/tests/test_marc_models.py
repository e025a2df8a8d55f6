"""Channel builders, scenario canonicalization, and encoder glue."""

import numpy as np
import pytest

from artifact.discrete_prob import (ConditionalKernel, FiniteAlphabet,
                                    JointTable, TableError, entropy,
                                    marginalize)
from artifact.marc_models import (MarcChannel, MarcScenario, Psomarc,
                                  channel_parts, identity_encoders,
                                  induced_joint, point_mass, psomarc_table1,
                                  psomarc_table7, psomarc_tables45,
                                  somarc_factorization_gap, somarc_law,
                                  sources_named)

from oracles import LOG2_3, LOG2_6, TABLE6_H


def alpha(name, n):
    return FiniteAlphabet(name, range(n))


def test_builtin_channels_shapes():
    ch = psomarc_table1()
    assert ch.c3 == 1.0
    assert [len(a) for a in ch.input_axes] == [2, 2]
    assert len(ch.y3_map.out_axes[0]) == 3
    assert len(ch.ys_map.out_axes[0]) == 2

    ch7 = psomarc_table7()
    assert [len(a) for a in ch7.input_axes] == [3, 3]
    assert len(ch7.y3_map.out_axes[0]) == 6
    assert len(ch7.ys_map.out_axes[0]) == 3

    noisy = psomarc_tables45(0.37)
    assert noisy.c3 == 0.37
    assert not np.array_equal(noisy.y3_map.rows, noisy.y3_map.rows.round())


def test_table1_mapping_values():
    ch = psomarc_table1()
    # relay sees the input sum, destination sees x1
    want_y3 = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}
    want_ys = {(0, 0): 0, (0, 1): 0, (1, 0): 1, (1, 1): 1}
    for i, pair in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        assert ch.y3_map.rows[i].argmax() == want_y3[pair]
        assert ch.ys_map.rows[i].argmax() == want_ys[pair]


def test_pair_kernel_is_conditionally_independent():
    ch = psomarc_tables45(0.2)
    pk = ch.pair_kernel()
    assert pk.out_names == ("Y3", "YS")
    rows = pk.rows.reshape(4, 2, 2)
    for g in range(4):
        outer = np.outer(ch.y3_map.rows[g], ch.ys_map.rows[g])
        assert np.allclose(rows[g], outer, atol=1e-15)


def test_psomarc_validation():
    ch = psomarc_table1()
    with pytest.raises(TableError):
        Psomarc(ch.y3_map, ch.ys_map, -0.5)
    swapped = ConditionalKernel(ch.ys_map.given_axes, (alpha("Z", 2),),
                                ch.ys_map.rows)
    with pytest.raises(TableError):
        Psomarc(ch.y3_map, swapped, 1.0)
    bad_given = ConditionalKernel((alpha("X1", 2), alpha("X9", 2)),
                                  (alpha("YS", 2),), ch.ys_map.rows)
    with pytest.raises(TableError):
        Psomarc(ch.y3_map, bad_given, 1.0)
    wider = ConditionalKernel((alpha("X1", 3), alpha("X2", 2)),
                              (alpha("YS", 2),),
                              np.tile([0.5, 0.5], (6, 1)))
    with pytest.raises(TableError):
        Psomarc(ch.y3_map, wider, 1.0)


def test_marc_channel_validation():
    law = ConditionalKernel((alpha("X1", 2), alpha("X2", 2), alpha("X3", 2)),
                            (alpha("Y3", 2), alpha("Y", 2)),
                            np.tile([0.25] * 4, (8, 1)))
    ch = MarcChannel(law)
    assert [a.name for a in ch.input_axes] == ["X1", "X2", "X3"]
    bad = ConditionalKernel((alpha("X1", 2), alpha("X2", 2)),
                            (alpha("Y3", 2), alpha("Y", 2)),
                            np.tile([0.25] * 4, (4, 1)))
    with pytest.raises(TableError):
        MarcChannel(bad)


def test_scenario_pads_missing_side_information():
    sc = MarcScenario(sources_named("table2"), psomarc_table1())
    assert sc.sources.axis_names == ("S1", "S2", "W", "W3")
    assert len(sc.sources.axis("W")) == 1
    assert len(sc.sources.axis("W3")) == 1
    assert sc.is_psomarc
    # mass preserved under padding
    flat = marginalize(sc.sources, {"S1", "S2"})
    assert np.allclose(flat.mass, sources_named("table2").mass, atol=0)


def test_scenario_reorders_axes():
    base = sources_named("table2")
    w = alpha("W", 2)
    shuffled = JointTable((w,) + base.axes,
                          np.stack([base.mass, base.mass]) / 2.0)
    sc = MarcScenario(shuffled, psomarc_table1())
    assert sc.sources.axis_names == ("S1", "S2", "W", "W3")
    assert len(sc.sources.axis("W")) == 2


def test_scenario_axis_validation():
    bad = JointTable((alpha("S1", 2), alpha("Z", 2)), np.ones((2, 2)) / 4)
    with pytest.raises(TableError):
        MarcScenario(bad, psomarc_table1())
    missing = JointTable((alpha("S1", 2),), np.array([0.5, 0.5]))
    with pytest.raises(TableError):
        MarcScenario(missing, psomarc_table1())


def test_named_sources():
    assert entropy(sources_named("table2"), {"S1", "S2"}) == LOG2_3
    assert entropy(sources_named("table8"), {"S1", "S2"}) == LOG2_6
    assert entropy(sources_named("table6"), {"S1", "S2"}) == pytest.approx(
        TABLE6_H, abs=1e-15)
    with pytest.raises(TableError):
        sources_named("table9")


def test_somarc_law_factorizes():
    inner = psomarc_table1().pair_kernel()
    relay = ConditionalKernel((alpha("X3", 2),), (alpha("YR", 2),),
                              [[0.9, 0.1], [0.2, 0.8]])
    law = somarc_law(inner, relay)
    assert law.given_names == ("X1", "X2", "X3")
    assert law.out_names == ("Y3", "YS", "YR")
    assert somarc_factorization_gap(law, relay_out="YR") <= 1e-12


def test_factorization_gap_detects_coupling():
    # YR copies X1: the relay branch is no longer a function of X3 alone
    g = (alpha("X1", 2), alpha("X2", 2), alpha("X3", 2))
    o = (alpha("Y3", 2), alpha("YS", 2), alpha("YR", 2))
    rows = np.zeros((8, 8))
    for gi in range(8):
        x1 = gi >> 2
        rows[gi, x1] = 1.0  # out index ((y3*2)+ys)*2+yr with y3=ys=0, yr=x1
    law = ConditionalKernel(g, o, rows)
    assert somarc_factorization_gap(law, relay_out="YR") > 0.4


def test_channel_parts_dispatch():
    ps = psomarc_table1()
    assert channel_parts(ps).out_names == ("Y3", "YS")
    law = ConditionalKernel((alpha("X1", 2), alpha("X2", 2), alpha("X3", 2)),
                            (alpha("Y3", 2), alpha("Y", 2)),
                            np.tile([0.25] * 4, (8, 1)))
    full = MarcChannel(law)
    assert channel_parts(full) is law


def test_point_mass():
    a = FiniteAlphabet("V", ["p", "q", "r"])
    t = point_mass(a)
    assert t.mass[0] == 1.0
    t2 = point_mass(a, "r")
    assert t2.mass[2] == 1.0 and t2.mass.sum() == 1.0


def test_identity_encoders_simultaneous():
    sc = MarcScenario(sources_named("table2"), psomarc_table1())
    parts = identity_encoders(sc)
    j = induced_joint(sc, parts)
    names = set(j.axis_names)
    assert {"S1", "S2", "W", "W3", "V1", "V2", "X1", "X2", "Y3", "YS"} <= names
    # x_i literally copies s_i
    m = marginalize(j, {"S1", "X1"})
    assert np.allclose(m.mass, np.diag(m.mass.sum(axis=1)), atol=1e-15)
    assert entropy(j, {"X1", "X2"}) == pytest.approx(LOG2_3, abs=1e-12)


def test_identity_encoders_own_source_chain():
    sc = MarcScenario(sources_named("table2"), psomarc_table1())
    parts = identity_encoders(sc, scheme="thm2")
    assert len(parts) == 2  # no auxiliaries, no X3 for the two-kernel channel
    j = induced_joint(sc, parts)
    assert "V1" not in j.axis_names
    assert entropy(j, {"YS"}, {"X1"}) == pytest.approx(0.0, abs=1e-12)


def test_identity_encoders_need_room():
    wide = JointTable((alpha("S1", 3), alpha("S2", 2)), np.ones((3, 2)) / 6)
    sc = MarcScenario(wide, psomarc_table1())
    with pytest.raises(TableError):
        identity_encoders(sc)


def test_identity_encoders_pin_x3_on_full_marc():
    law = ConditionalKernel((alpha("X1", 2), alpha("X2", 2), alpha("X3", 2)),
                            (alpha("Y3", 2), alpha("Y", 2)),
                            np.tile([0.25] * 4, (8, 1)))
    sc = MarcScenario(sources_named("table2"), MarcChannel(law))
    j = induced_joint(sc, identity_encoders(sc))
    x3 = marginalize(j, {"X3"})
    assert x3.mass[0] == 1.0
