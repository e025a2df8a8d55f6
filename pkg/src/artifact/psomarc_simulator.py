"""Exact block simulation of the zero-error relay scheme.

Each source symbol is put on the channel unchanged (x_i = s_i).  The
relay inverts the noiseless map (x1, x2) -> y3, which is one-to-one on
the source support, and spends its bit budget resolving the destination's
ambiguity: for every destination output ys the candidates theta(ys) are
canonically ordered and the relay forwards the index of the true pair.
When the full preimage sets are too large for the bit pipe they are
restricted to the pairs actually reachable from the source support.

Sampling uses numpy's PCG64 generator; block b of a run seeded with s
draws from the b-th child of SeedSequence(s), so results are identical
for any thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from .discrete_prob import TableError
from .marc_models import induced_joint, psomarc_table1, psomarc_table7, sources_named

MASS_TOL = 1e-12


@dataclass
class SimReport:
    blocks_run: int
    relay_errors: int
    destination_errors: int

    @property
    def empirical_pe(self):
        return self.destination_errors / self.blocks_run

    def lines(self):
        return ["blocks_run=%d" % self.blocks_run,
                "relay_errors=%d" % self.relay_errors,
                "destination_errors=%d" % self.destination_errors,
                "empirical_pe=%.12g" % self.empirical_pe]


def _deterministic_column(kernel, what):
    rows = kernel.rows
    cols = np.argmax(rows, axis=1)
    if not np.all(np.abs(rows[np.arange(rows.shape[0]), cols] - 1.0) <= MASS_TOL):
        raise TableError("%s is not deterministic" % what)
    return cols


def theta(ch, y_s):
    """Canonically ordered preimage of a destination output symbol."""
    ys_of = _deterministic_column(ch.ys_map, "ys map")
    a1, a2 = ch.input_axes
    out = ch.ys_map.out_axes[0]
    target = out.index(y_s)
    pairs = []
    for i, s1 in enumerate(a1.symbols):
        for j, s2 in enumerate(a2.symbols):
            if ys_of[i * len(a2) + j] == target:
                pairs.append((s1, s2))
    return tuple(sorted(pairs))


class SchemeLayout:
    """Precomputed tables driving the per-symbol zero-error scheme."""

    def __init__(self, ch, sources):
        self.ch = ch
        a1, a2 = ch.input_axes
        s1_al, s2_al = sources.axes
        if len(s1_al) > len(a1) or len(s2_al) > len(a2):
            raise TableError("identity encoding needs |S_i| <= |X_i|")
        y3_of = _deterministic_column(ch.y3_map, "y3 map")
        ys_of = _deterministic_column(ch.ys_map, "ys map")
        mass = sources.mass
        sup = np.argwhere(mass > 0)
        self.support = sup
        self.probs = mass[sup[:, 0], sup[:, 1]]
        flat = sup[:, 0] * len(a2) + sup[:, 1]
        self.y3_idx = y3_of[flat]
        self.ys_idx = ys_of[flat]
        if len(set(self.y3_idx.tolist())) != len(flat):
            raise TableError("relay map is not one-to-one on the source support")
        # relay inversion: y3 index -> support row
        self.inv_y3 = {int(y): k for k, y in enumerate(self.y3_idx)}
        budget = 1 << int(math.floor(ch.c3))
        n_ys = ch.ys_map.rows.shape[1]
        full = [[] for _ in range(n_ys)]
        for i in range(len(a1)):
            for j in range(len(a2)):
                full[ys_of[i * len(a2) + j]].append((i, j))
        if max(len(g) for g in full) <= budget:
            groups = full
        else:
            reachable = {(int(i), int(j)) for i, j in sup}
            groups = [[p for p in g if p in reachable] for g in full]
            if max(len(g) for g in groups) > budget:
                raise TableError("ambiguity sets exceed the relay bit budget")
        self.groups = [sorted(g) for g in groups]
        self.bits_per_symbol = max(
            1, math.ceil(math.log2(max(max(len(g) for g in self.groups), 1))))
        if self.bits_per_symbol > ch.c3:
            raise TableError("bin stream rate exceeds c3")
        # per-support-cell bin index, and decode tables (ys, bin) -> pair
        self.bin_of = np.array(
            [self.groups[y].index((int(i), int(j)))
             for (i, j), y in zip(sup, self.ys_idx)])
        width = max(len(g) for g in self.groups)
        self.decode = -np.ones((n_ys, width, 2), dtype=int)
        for y, g in enumerate(self.groups):
            for b, p in enumerate(g):
                self.decode[y, b] = p

    def ambiguity(self, y_s):
        out = self.ch.ys_map.out_axes[0]
        a1, a2 = self.ch.input_axes
        g = self.groups[out.index(y_s)]
        return tuple((a1.symbols[i], a2.symbols[j]) for i, j in g)


def _run_block(layout, n, rng):
    draw = rng.choice(len(layout.probs), size=n, p=layout.probs)
    s = layout.support[draw]
    y3 = layout.y3_idx[draw]
    ys = layout.ys_idx[draw]
    # relay: invert the noiseless map, then emit ambiguity-bin indices
    rhat = np.array([layout.inv_y3[int(y)] for y in y3])
    relay_err = int(not np.array_equal(layout.support[rhat], s))
    bins = layout.bin_of[rhat]
    dhat = layout.decode[ys, bins]
    dest_err = int(not np.array_equal(dhat, s))
    return relay_err, dest_err


def run_scheme(ch, sources, n, B, seed, threads=1):
    """Run B independent blocks of length n; counts are block-level."""
    if n < 1 or B < 1:
        raise ValueError("need n >= 1 and B >= 1")
    layout = SchemeLayout(ch, sources)
    children = np.random.SeedSequence(seed).spawn(B)

    def work(span):
        lo, hi = span
        r = d = 0
        for b in range(lo, hi):
            rng = np.random.Generator(np.random.PCG64(children[b]))
            re, de = _run_block(layout, n, rng)
            r += re
            d += de
        return r, d

    if threads <= 1:
        parts = [work((0, B))]
    else:
        bounds = np.linspace(0, B, threads + 1).astype(int)
        spans = [(int(bounds[i]), int(bounds[i + 1])) for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, spans))
    relay = sum(p[0] for p in parts)
    dest = sum(p[1] for p in parts)
    return SimReport(blocks_run=B, relay_errors=relay, destination_errors=dest)


def run_table1_scheme(n, B, seed, threads=1):
    """Ternary-output channel with the two-thirds correlated source pair."""
    return run_scheme(psomarc_table1(), sources_named("table2"), n, B, seed,
                      threads=threads)


def run_table7_scheme(n, B, seed, threads=1):
    """Six-output channel with the uniform-support six-cell source pair."""
    return run_scheme(psomarc_table7(), sources_named("table8"), n, B, seed,
                      threads=threads)


def sample_induced(scenario, encoders, n, seed):
    """n i.i.d. draws from the induced joint, as symbol tuples.

    Tuple order follows the induced joint's axis order; the names are
    returned alongside the rows.
    """
    joint = induced_joint(scenario, encoders)
    flat = joint.mass.ravel()
    rng = np.random.default_rng(seed)
    idx = rng.choice(flat.size, size=n, p=flat)
    coords = np.unravel_index(idx, joint.mass.shape)
    rows = [tuple(ax.symbols[c[k]] for ax, c in zip(joint.axes, coords))
            for k in range(n)]
    return joint.axis_names, rows
