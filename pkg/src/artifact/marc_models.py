"""Channel and scenario constructors for the relay-network evaluators.

Provides the general discrete memoryless multiple-access relay channel
(one law p(y3,y|x1,x2,x3)), the primitive semi-orthogonal variant whose
relay-destination hop is a noiseless bit pipe of capacity c3, the named
example sources/channels used throughout the test corpus, and the glue
that turns (scenario, encoder chain) into one induced joint table.

Axis naming convention: S1 S2 (sources), W W3 (destination/relay side
information), V1 V2 Q V (auxiliaries), X1 X2 X3 (channel inputs), Y3
(relay output), Y (destination output), YS (source-bank destination
output of the primitive variant).
"""

import numpy as np

from .discrete_prob import (ConditionalKernel, FiniteAlphabet, JointTable,
                            TableError, compose, marginalize)


def _alpha(name, size):
    return FiniteAlphabet(name, range(size))


class Psomarc:
    """Primitive semi-orthogonal MARC: two kernels plus a bit-pipe capacity.

    y3_map and ys_map give p(y3|x1,x2) and p(ys|x1,x2);  the relay sees
    Y3, the destination sees YS plus up to c3 error-free bits per use
    forwarded by the relay.  Given the inputs, Y3 and YS are drawn
    independently.
    """

    def __init__(self, y3_map, ys_map, c3):
        if y3_map.given_names != ("X1", "X2") or ys_map.given_names != ("X1", "X2"):
            raise TableError("psomarc kernels must be conditioned on (X1, X2)")
        if y3_map.given_axes != ys_map.given_axes:
            raise TableError("psomarc kernels disagree on the input alphabets")
        if y3_map.out_names != ("Y3",) or ys_map.out_names != ("YS",):
            raise TableError("psomarc kernels must output Y3 and YS")
        if c3 < 0:
            raise TableError("link capacity c3 must be nonnegative")
        self.y3_map = y3_map
        self.ys_map = ys_map
        self.c3 = float(c3)

    @property
    def input_axes(self):
        return self.y3_map.given_axes

    def pair_kernel(self):
        """p(y3,ys|x1,x2) with Y3 and YS conditionally independent."""
        rows = np.einsum("ga,gb->gab", self.y3_map.rows, self.ys_map.rows)
        return ConditionalKernel(self.input_axes,
                                 self.y3_map.out_axes + self.ys_map.out_axes,
                                 rows.reshape(rows.shape[0], -1))


class MarcChannel:
    """General DM MARC law p(y3, y | x1, x2, x3)."""

    def __init__(self, law):
        if law.given_names != ("X1", "X2", "X3"):
            raise TableError("MARC law must be conditioned on (X1, X2, X3)")
        if law.out_names != ("Y3", "Y"):
            raise TableError("MARC law must output (Y3, Y)")
        self.law = law

    @property
    def input_axes(self):
        return self.law.given_axes


class MarcScenario:
    """Source joint, channel and optional auxiliary alphabets, bundled.

    sources may span (S1, S2) alone or include W and/or W3; missing
    side-information axes are attached as singletons, matching the
    numerical examples where both are trivial.
    """

    def __init__(self, sources, channel, aux=None):
        names = set(sources.axis_names)
        if not {"S1", "S2"} <= names:
            raise TableError("sources must cover axes S1 and S2, got %r"
                             % (sources.axis_names,))
        extra = names - {"S1", "S2", "W", "W3"}
        if extra:
            raise TableError("unexpected source axes %r" % sorted(extra))
        axes = list(sources.axes)
        mass = sources.mass
        for missing in ("W", "W3"):
            if missing not in names:
                axes.append(_alpha(missing, 1))
                mass = mass[..., None]
        t = JointTable(axes, mass)
        order = [t.axis_position(n) for n in ("S1", "S2", "W", "W3")]
        self.sources = JointTable([t.axes[i] for i in order],
                                  np.transpose(t.mass, order))
        self.channel = channel
        self.aux = dict(aux or {})

    @property
    def is_psomarc(self):
        return isinstance(self.channel, Psomarc)


def psomarc_table1():
    """Deterministic binary-input example: Y3 counts, YS reports x1; c3=1."""
    x1, x2 = _alpha("X1", 2), _alpha("X2", 2)
    y3 = ConditionalKernel.deterministic(
        (x1, x2), (_alpha("Y3", 3),),
        {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2})
    ys = ConditionalKernel.deterministic(
        (x1, x2), (_alpha("YS", 2),),
        {(0, 0): 0, (0, 1): 0, (1, 0): 1, (1, 1): 1})
    return Psomarc(y3, ys, 1.0)


def psomarc_tables45(c3):
    """Noisy binary-input example pair with a configurable pipe capacity."""
    x1, x2 = _alpha("X1", 2), _alpha("X2", 2)
    y3 = ConditionalKernel((x1, x2), (_alpha("Y3", 2),),
                           [[0.87, 0.13],
                            [0.25, 0.75],
                            [0.51, 0.49],
                            [0.24, 0.76]])
    ys = ConditionalKernel((x1, x2), (_alpha("YS", 2),),
                           [[0.23, 0.77],
                            [0.19, 0.81],
                            [0.65, 0.35],
                            [0.91, 0.09]])
    return Psomarc(y3, ys, c3)


def psomarc_table7():
    """Deterministic ternary-input example; five special pairs, rest to (1,1)."""
    x1, x2 = _alpha("X1", 3), _alpha("X2", 3)
    special = {(0, 0): (0, 0), (1, 1): (2, 2), (1, 2): (3, 1),
               (2, 0): (4, 2), (2, 2): (5, 0)}

    def both(pair):
        return special.get(pair, (1, 1))

    y3 = ConditionalKernel.deterministic((x1, x2), (_alpha("Y3", 6),),
                                         lambda p: both(p)[0])
    ys = ConditionalKernel.deterministic((x1, x2), (_alpha("YS", 3),),
                                         lambda p: both(p)[1])
    return Psomarc(y3, ys, 1.0)


_SOURCE_CELLS = {
    "table2": np.array([[1.0, 1.0], [0.0, 1.0]]) / 3.0,
    "table6": np.array([[0.0, 0.04], [0.045, 0.915]]),
    "table8": np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]]) / 6.0,
}


def sources_named(name):
    """Named example source joints over (S1, S2)."""
    try:
        cells = _SOURCE_CELLS[name]
    except KeyError:
        raise TableError("unknown source table %r; know %s"
                         % (name, sorted(_SOURCE_CELLS)))
    k = cells.shape[0]
    return JointTable((_alpha("S1", k), _alpha("S2", cells.shape[1])), cells)


def somarc_law(inner, relay_link):
    """Semi-orthogonal full-MARC law from p(y3,ys|x1,x2) and p(yr|x3)."""
    rows = np.einsum("ga,hb->ghab",
                     inner.rows, relay_link.rows)
    given = inner.given_axes + relay_link.given_axes
    out = inner.out_axes + relay_link.out_axes
    n_given = rows.shape[0] * rows.shape[1]
    return ConditionalKernel(given, out, rows.reshape(n_given, -1))


def somarc_factorization_gap(law, x3_axis="X3", relay_out="YR"):
    """Largest cellwise violation of p(outs|x) = p(yr|x3) p(rest|x1,x2).

    Zero (within float noise) certifies the semi-orthogonal structure.
    """
    gshape = [len(a) for a in law.given_axes]
    oshape = [len(a) for a in law.out_axes]
    arr = law.rows.reshape(gshape + oshape)
    g_pos = {a.name: i for i, a in enumerate(law.given_axes)}
    o_pos = {a.name: len(gshape) + i for i, a in enumerate(law.out_axes)}
    yr_ax = o_pos[relay_out]
    rest_out = [o_pos[a.name] for a in law.out_axes if a.name != relay_out]
    p_yr = arr.sum(axis=tuple(rest_out))
    flat_rest = arr.sum(axis=yr_ax).reshape(tuple(gshape) + (-1,))
    recon = np.einsum("...a,...b->...ab", p_yr, flat_rest)
    order = [yr_ax] + rest_out
    target = np.moveaxis(arr, order, range(len(gshape), len(gshape) + len(order)))
    target = target.reshape(tuple(gshape) + (p_yr.shape[-1], -1))
    gap = float(np.abs(recon - target).max())
    # cross-input independence of the two pieces
    x3 = g_pos[x3_axis]
    others = [g_pos[a.name] for a in law.given_axes if a.name != x3_axis]
    for other in others:
        gap = max(gap, float(np.abs(np.diff(p_yr, axis=other)).max(initial=0.0)))
    gap = max(gap, float(np.abs(np.diff(flat_rest, axis=x3)).max(initial=0.0)))
    return gap


def channel_parts(channel):
    """The compose() part representing the channel."""
    return channel.pair_kernel() if isinstance(channel, Psomarc) else channel.law


def induced_joint(scenario, encoders):
    """Full joint over every scenario variable for one encoder chain.

    encoders is an ordered list of JointTable/ConditionalKernel parts
    (auxiliary priors first, then the input encoders).  The bit-pipe of
    a primitive channel never appears as an axis; its capacity enters
    the bound formulas as the scalar c3.
    """
    return compose([scenario.sources, *encoders, channel_parts(scenario.channel)])


def point_mass(alphabet, symbol=None):
    """Degenerate one-axis table; defaults to the first symbol."""
    mass = np.zeros(len(alphabet))
    mass[0 if symbol is None else alphabet.index(symbol)] = 1.0
    return JointTable((alphabet,), mass)


def identity_encoders(scenario, scheme="thm3"):
    """Encoder chain sending x_i = s_i with degenerate auxiliaries.

    For the simultaneous-decoding chains (thm1/thm3/prop1) the list is
    p(v1) p(v2) p(x1|s1,v1) p(x2|s2,v2) [p(x3|v1,v2)]; for thm2 it is
    p(x1|s1) p(x2|s2) [p(x3|s1,s2)].  The X alphabets are taken from the
    channel; x3, when present, is pinned to its first symbol.
    """
    s1 = scenario.sources.axis("S1")
    s2 = scenario.sources.axis("S2")
    ins = {a.name: a for a in scenario.channel.input_axes}
    x1, x2 = ins["X1"], ins["X2"]
    if len(x1) < len(s1) or len(x2) < len(s2):
        raise TableError("identity encoders need input alphabets at least as "
                         "large as the sources")

    def ident(src, dst):
        return lambda sym: dst.symbols[src.index(sym if not isinstance(sym, tuple)
                                                  else sym[0])]

    if scheme == "thm2":
        parts = [ConditionalKernel.deterministic((s1,), (x1,), ident(s1, x1)),
                 ConditionalKernel.deterministic((s2,), (x2,), ident(s2, x2))]
        if "X3" in ins:
            parts.append(ConditionalKernel.deterministic(
                (s1, s2), (ins["X3"],), lambda pair: ins["X3"].symbols[0]))
        return parts
    v1 = scenario.aux.get("V1", _alpha("V1", 1))
    v2 = scenario.aux.get("V2", _alpha("V2", 1))
    parts = [point_mass(v1), point_mass(v2),
             ConditionalKernel.deterministic((s1, v1), (x1,), ident(s1, x1)),
             ConditionalKernel.deterministic((s2, v2), (x2,), ident(s2, x2))]
    if "X3" in ins:
        parts.append(ConditionalKernel.deterministic(
            (v1, v2), (ins["X3"],), lambda pair: ins["X3"].symbols[0]))
    return parts
