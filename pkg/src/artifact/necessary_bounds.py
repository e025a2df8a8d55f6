"""Necessary conditions and sum-rate outer frontiers.

Three converse-side condition sets are evaluated on caller-supplied
joints carrying an explicit time-sharing axis (Q) or relay-knowledge
axis (V): a destination bound with the relay input folded into the
information side (thm4), a broadcast-style bound where Y3 joins the
destination output (prop2bc), and its Markov-chain variant with X3
moved into the conditioning (thm5).  thm4 and thm5 additionally filter
the per-q input kernels through the maximal-correlation set B'.

The two frontier searches specialize the sum-rate records to a
primitive semi-orthogonal channel: the classical cut-set value
max I(X1,X2;YS) + min{c3, I(X1,X2;Y3|YS)} over all pairings p(x1,x2),
and the same objective restricted to rho*_{X1X2} <= rho*_{S1S2}.
"""

from dataclasses import dataclass, field

import numpy as np

from .discrete_prob import JointTable, TableError, marginalize
from .maxcorr_spectral import correlation_profile, maximal_correlation
from .simplex_search import SearchSpec, maximize
from .sufficient_bounds import ChainError, InequalityRecord, _measures

CHAIN_TOL = 1e-9


class BprimeError(ValueError):
    """A per-q input kernel falls outside the maximal-correlation set."""


@dataclass
class NecessaryReport:
    bound: str
    records: list
    satisfiable_at: JointTable
    notes: list = field(default_factory=list)

    @property
    def satisfied(self):
        return all(r.status == "pass" for r in self.records)

    def classify(self):
        return "satisfied" if self.satisfied else "violated"

    def lines(self):
        return [r.line() for r in self.records]


def _keepdims_marginal(arr, names, keep):
    axes = tuple(i for i, n in enumerate(names) if n not in keep)
    return arr.sum(axis=axes, keepdims=True) if axes else arr


def factorization_gap(joint, chain):
    """Max abs deviation between the joint and the product of chain factors.

    chain is a list of (out_names, given_names) pairs that together
    produce every axis exactly once.
    """
    names = joint.axis_names
    produced = [n for outs, _ in chain for n in outs]
    if sorted(produced) != sorted(names):
        raise ChainError("chain factors produce %s but the joint has axes %s"
                         % (sorted(produced), sorted(names)))
    arr = joint.mass
    rebuilt = np.ones_like(arr)
    for outs, given in chain:
        num = _keepdims_marginal(arr, names, set(outs) | set(given))
        den = _keepdims_marginal(arr, names, set(given))
        rebuilt = rebuilt * np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return float(np.max(np.abs(rebuilt - arr)))


def _require_axes(joint, chain, bound):
    need = sorted(n for outs, _ in chain for n in outs)
    have = sorted(joint.axis_names)
    if have != need:
        raise ChainError("%s expects a joint over %s; got %s"
                         % (bound, need, have))
    gap = factorization_gap(joint, chain)
    if gap > CHAIN_TOL:
        raise ChainError("%s chain factorization fails by %.3g (tolerance %g)"
                         % (bound, gap, CHAIN_TOL))


def _check_bprime(joint, q_axis, bound):
    """Per-q B' membership of p(x1,x2|s1,s2,q) against rho*_{S1,S2}."""
    q_al = joint.axis(q_axis)
    if len(q_al) > 4:
        raise ChainError("%s requires |%s| <= 4; got %d"
                         % (bound, q_axis, len(q_al)))
    rho_src = maximal_correlation(marginalize(joint, {"S1", "S2"}))
    q_pos = joint.axis_position(q_axis)
    q_mass = _keepdims_marginal(joint.mass, joint.axis_names, {q_axis}).ravel()
    for qi, sym in enumerate(q_al.symbols):
        if q_mass[qi] == 0.0:
            continue
        sl = [slice(None)] * joint.mass.ndim
        sl[q_pos] = qi
        axes = tuple(a for a in joint.axes if a.name != q_axis)
        cond = JointTable(axes, joint.mass[tuple(sl)] / q_mass[qi])
        prof = correlation_profile(cond)
        for label, value in prof.entries():
            if value > rho_src + CHAIN_TOL:
                raise BprimeError(
                    "q=%r: %s = %.12g exceeds rho*_{S1,S2} = %.12g"
                    % (sym, label, value, rho_src))


_THM4_CHAIN = [(("Q",), ()), (("S1", "S2", "W"), ()),
               (("X1", "X2"), ("S1", "S2", "Q")),
               (("X3",), ("X1", "X2", "S1", "S2", "Q")),
               (("Y",), ("X1", "X2", "X3"))]
_PROP2_CHAIN = [(("V", "S1", "S2", "W", "W3"), ()),
                (("X1", "X2"), ("S1", "S2", "V")),
                (("X3",), ("V",)),
                (("Y", "Y3"), ("X1", "X2", "X3"))]
_THM5_CHAIN = [(("Q",), ()), (("S1", "S2", "W", "W3"), ()),
               (("X1", "X2"), ("S1", "S2", "Q")),
               (("X3",), ("X1", "X2", "W3", "Q")),
               (("Y", "Y3"), ("X1", "X2", "X3"))]


def eval_thm4(scenario, joint_with_q):
    """Destination-side necessary records conditioned on a shared Q."""
    _require_axes(joint_with_q, _THM4_CHAIN, "thm4")
    _check_bprime(joint_with_q, "Q", "thm4")
    H, I = _measures(joint_with_q)
    recs = [
        InequalityRecord("thm4.S1", H("S1", ("S2", "W")),
                         I(("X1", "X3"), "Y", ("S2", "X2", "W", "Q")), strict=False),
        InequalityRecord("thm4.S2", H("S2", ("S1", "W")),
                         I(("X2", "X3"), "Y", ("S1", "X1", "W", "Q")), strict=False),
        InequalityRecord("thm4.S1S2", H(("S1", "S2"), ("W",)),
                         I(("X1", "X2", "X3"), "Y", ("W", "Q")), strict=False),
    ]
    return NecessaryReport("thm4", recs, joint_with_q)


def eval_prop2_broadcast(scenario, joint_with_v):
    """Broadcast-style necessary records; X3 is a function of V alone."""
    _require_axes(joint_with_v, _PROP2_CHAIN, "prop2bc")
    v_al = joint_with_v.axis("V")
    if len(v_al) > 4:
        raise ChainError("prop2bc requires |V| <= 4; got %d" % len(v_al))
    H, I = _measures(joint_with_v)
    recs = [
        InequalityRecord("prop2bc.S1", H("S1", ("S2", "W", "W3")),
                         I("X1", ("Y", "Y3"), ("S2", "X2", "W", "V")), strict=False),
        InequalityRecord("prop2bc.S2", H("S2", ("S1", "W", "W3")),
                         I("X2", ("Y", "Y3"), ("S1", "X1", "W", "V")), strict=False),
        InequalityRecord("prop2bc.S1S2", H(("S1", "S2"), ("W", "W3")),
                         I(("X1", "X2"), ("Y", "Y3"), ("W", "V")), strict=False),
    ]
    return NecessaryReport("prop2bc", recs, joint_with_v)


def eval_thm5(scenario, joint_with_q):
    """Markov-chain variant with X3 in the conditioning and Y3 observed."""
    _require_axes(joint_with_q, _THM5_CHAIN, "thm5")
    _check_bprime(joint_with_q, "Q", "thm5")
    H, I = _measures(joint_with_q)
    recs = [
        InequalityRecord("thm5.S1", H("S1", ("S2", "W", "W3")),
                         I("X1", ("Y", "Y3"), ("S2", "X2", "X3", "W", "Q")),
                         strict=False),
        InequalityRecord("thm5.S2", H("S2", ("S1", "W", "W3")),
                         I("X2", ("Y", "Y3"), ("S1", "X1", "X3", "W", "Q")),
                         strict=False),
        InequalityRecord("thm5.S1S2", H(("S1", "S2"), ("W", "W3")),
                         I(("X1", "X2"), ("Y", "Y3"), ("X3", "W", "Q")),
                         strict=False),
    ]
    return NecessaryReport("thm5", recs, joint_with_q)


def _masked_entropy_rows(P):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(P > 0, P * np.log2(np.where(P > 0, P, 1.0)), 0.0)
    return -t.sum(axis=-1)


def pairing_objective(ch, quantity="cutset"):
    """Vectorized objective over the full input pairing simplex p(x1,x2).

    Cells run over (x1, x2) pairs in row-major order.  quantity selects
    I(X1,X2;YS) + min{c3, I(X1,X2;Y3|YS)} ('cutset'), the side term
    I(X1,X2;YS) ('dst_mi'), the conditional H(Y3|YS) ('relay_cond_entropy'),
    or I(X1,X2;YS) + c3 ('dst_mi_plus_c3').
    """
    P3, PS = ch.y3_map.rows, ch.ys_map.rows
    h3 = _masked_entropy_rows(P3)
    hs = _masked_entropy_rows(PS)
    c3 = ch.c3

    def batch(pts):
        Q = np.asarray(pts, dtype=float)
        i_s = _masked_entropy_rows(Q @ PS) - Q @ hs
        if quantity == "dst_mi":
            return i_s
        if quantity == "dst_mi_plus_c3":
            return i_s + c3
        # joint (y3, ys) law per point; relay and destination outputs are
        # conditionally independent given the input pair
        J = np.einsum("ni,ij,ik->njk", Q, P3, PS)
        h_pair = _masked_entropy_rows(J.reshape(Q.shape[0], -1))
        h_ys = _masked_entropy_rows(Q @ PS)
        if quantity == "relay_cond_entropy":
            return h_pair - h_ys
        i3_given = h_pair - h_ys - Q @ h3
        if quantity == "cutset":
            return i_s + np.minimum(c3, i3_given)
        raise ValueError("unknown quantity %r" % quantity)

    def objective(cells):
        return float(batch(np.asarray(cells, dtype=float)[None, :])[0])

    objective.batch = batch
    objective.dims = [len(ch.input_axes[0]) * len(ch.input_axes[1])]
    return objective


def maxcorr_constraint(ch, sources):
    """Grid filter rho*_{X1,X2} <= rho*_{S1,S2} over pairing cells."""
    rho_src = maximal_correlation(sources)
    m1 = len(ch.input_axes[0])
    m2 = len(ch.input_axes[1])

    if m1 == 2 and m2 == 2:
        def batch(pts):
            Q = np.asarray(pts, dtype=float).reshape(-1, 2, 2)
            r = Q.sum(axis=2)
            c = Q.sum(axis=1)
            det = Q[:, 0, 0] * Q[:, 1, 1] - Q[:, 0, 1] * Q[:, 1, 0]
            prod = r[:, 0] * r[:, 1] * c[:, 0] * c[:, 1]
            rho = np.where(prod > 0, np.abs(det) / np.sqrt(np.where(prod > 0, prod, 1.0)), 0.0)
            return rho <= rho_src
    else:
        a1, a2 = ch.input_axes

        def batch(pts):
            pts = np.asarray(pts, dtype=float)
            out = np.empty(pts.shape[0], dtype=bool)
            for i, row in enumerate(pts):
                t = JointTable((a1, a2), row.reshape(m1, m2))
                out[i] = maximal_correlation(t) <= rho_src
            return out

    def constraint(cells):
        return bool(batch(np.asarray(cells, dtype=float)[None, :])[0])

    constraint.batch = batch
    constraint.rho_source = rho_src
    return constraint


def cutset_psomarc(ch, grid=None):
    """Unconstrained cut-set sum-rate frontier over pairings p(x1,x2)."""
    obj = pairing_objective(ch, "cutset")
    return maximize(obj, obj.dims, grid or SearchSpec())


def i_new_psomarc(ch, sources, grid=None, w3_equals_sources=False):
    """Correlation-constrained sum-rate frontier over pairings p(x1,x2).

    With w3_equals_sources the relay-side record is vacuous and the
    objective becomes I(X1,X2;YS) + c3 under the same constraint.
    """
    quantity = "dst_mi_plus_c3" if w3_equals_sources else "cutset"
    obj = pairing_objective(ch, quantity)
    spec = grid or SearchSpec()
    if spec.constraint is not None:
        raise TableError("i_new_psomarc installs its own grid constraint")
    spec = SearchSpec(step=spec.step, stages=spec.stages,
                      coarse_step=spec.coarse_step,
                      refine_radius=spec.refine_radius,
                      coarse_band=spec.coarse_band,
                      constraint=maxcorr_constraint(ch, sources),
                      n_threads=spec.n_threads)
    return maximize(obj, obj.dims, spec)


def pairing_table(ch, cells):
    """Wrap flat pairing cells as a JointTable over (X1, X2)."""
    a1, a2 = ch.input_axes
    arr = np.asarray(cells, dtype=float)
    if arr.size != len(a1) * len(a2):
        raise TableError("pairing needs %d cells, got %d"
                         % (len(a1) * len(a2), arr.size))
    return JointTable((a1, a2), arr.reshape(len(a1), len(a2)))
