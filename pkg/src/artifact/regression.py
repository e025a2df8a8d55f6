"""Built-in acceptance battery.

Each criterion function returns (ok, detail) and is importable on its
own; run_battery executes the list in order and emits one PASS/FAIL
line per criterion.  quick=True shrinks grids and loop counts for a
sub-minute smoke run without touching any tolerance.
"""

import math
import time

import numpy as np

from .discrete_prob import (ConditionalKernel, FiniteAlphabet, JointTable,
                            compose, entropy, mutual_information)
from .marc_models import (MarcChannel, MarcScenario, identity_encoders,
                          psomarc_table1, psomarc_table7, psomarc_tables45,
                          sources_named)
from .maxcorr_spectral import (correlation_profile, in_Bprime,
                               maximal_correlation, normalized_matrix,
                               singular_values, top_singular_vectors)
from .necessary_bounds import (cutset_psomarc, i_new_psomarc,
                               maxcorr_constraint, pairing_objective)
from .psomarc_simulator import run_table1_scheme
from .simplex_search import SearchSpec, maximize
from .sufficient_bounds import (eval_prop1, eval_thm1, eval_thm3,
                                i_suff_psomarc, kernel_grid_objective)

LOG2_3 = math.log2(3.0)
LOG2_6 = math.log2(6.0)


def _axis(name, size):
    return FiniteAlphabet(name, tuple(range(size)))


def crit_cutset_frontier(quick=False, threads=1):
    spec = SearchSpec(step=0.01, n_threads=threads)
    vals = {}
    for c3, want in ((0.1, 0.516), (0.2, 0.600)):
        r = cutset_psomarc(psomarc_tables45(c3), spec)
        vals[c3] = r.best_value
        if abs(r.best_value - want) > 0.01:
            return False, "c3=%g gave %.6f, wanted %.3f +/- 0.01" % (
                c3, r.best_value, want)
    return True, "c3=0.1 -> %.6f, c3=0.2 -> %.6f" % (vals[0.1], vals[0.2])


def crit_constrained_frontier(quick=False, threads=1):
    spec = SearchSpec(step=0.01, n_threads=threads)
    src = sources_named("table6")
    cases = ((0.1, False, 0.485), (0.2, False, 0.514),
             (0.5, False, 0.514), (0.5, True, 0.919))
    got = []
    for c3, w3flag, want in cases:
        r = i_new_psomarc(psomarc_tables45(c3), src, spec,
                          w3_equals_sources=w3flag)
        got.append("%.6f" % r.best_value)
        if abs(r.best_value - want) > 0.01:
            return False, "c3=%g w3=%s gave %.6f, wanted %.3f +/- 0.01" % (
                c3, w3flag, r.best_value, want)
    return True, "values " + " ".join(got)


def _quick_kernel_spec(threads):
    # coarser but still inside the +/- 0.01 acceptance window
    return SearchSpec(step=0.02, coarse_step=0.1, n_threads=threads)


def crit_sufficient_frontier(quick=False, threads=1):
    ch = psomarc_tables45(0.1)
    src = sources_named("table6")
    two = i_suff_psomarc(ch, src,
                         _quick_kernel_spec(threads) if quick
                         else SearchSpec(n_threads=threads))
    if abs(two.best_value - 0.274) > 0.01:
        return False, "two-stage gave %.6f, wanted 0.274 +/- 0.01" % two.best_value
    if quick:
        return True, "two-stage -> %.6f (single-stage skipped in quick mode)" \
            % two.best_value
    one = i_suff_psomarc(ch, src,
                         SearchSpec(step=0.01, stages="single", n_threads=threads))
    if abs(two.best_value - one.best_value) > 1e-6:
        return False, "stage mismatch: two %.12f vs single %.12f" % (
            two.best_value, one.best_value)
    return True, "two-stage %.9f == single-stage %.9f within 1e-6" % (
        two.best_value, one.best_value)


def crit_spot_values(quick=False, threads=1):
    h2 = entropy(sources_named("table2"), {"S1", "S2"})
    if h2 != LOG2_3:
        return False, "three-cell source entropy %.17g != log2(3)" % h2
    h6 = entropy(sources_named("table6"), {"S1", "S2"})
    if abs(h6 - 0.504) > 0.001:
        return False, "skewed source entropy %.6f outside 0.504 +/- 0.001" % h6
    rng = np.random.default_rng(424242)
    worst = 0.0
    for _ in range(40 if quick else 200):
        na, nb = rng.integers(2, 5, size=2)
        pa = rng.dirichlet(np.ones(na))
        pb = rng.dirichlet(np.ones(nb))
        t = JointTable((_axis("S1", na), _axis("S2", nb)), np.outer(pa, pb))
        worst = max(worst, maximal_correlation(t))
    if worst > 1e-10:
        return False, "product-source rho* reached %.3g > 1e-10" % worst
    return True, "H=log2(3) exact, H=%.4f, product rho* <= %.2g" % (h6, worst)


def _point_kernels(cells):
    """Four binary kernel rows (flat, 8 cells) -> two encoder kernels."""
    s1, s2 = _axis("S1", 2), _axis("S2", 2)
    x1, x2 = _axis("X1", 2), _axis("X2", 2)
    rows = np.asarray(cells, dtype=float).reshape(4, 2)
    return (ConditionalKernel((s1,), (x1,), rows[:2]),
            ConditionalKernel((s2,), (x2,), rows[2:]))


def crit_relay_saturation(quick=False, threads=1):
    ch = psomarc_table1()
    src = sources_named("table2")
    stage = "coarse_then_refine" if quick else "single"
    obj = kernel_grid_objective(ch, src, "relay_mi")
    r = maximize(obj, obj.dims,
                 SearchSpec(step=0.01, stages=stage, n_threads=threads))
    if abs(r.best_value - LOG2_3) > 1e-9:
        return False, "max relay information %.12f != log2(3)" % r.best_value
    if r.ties != 2:
        return False, "expected exactly 2 maximizers, found %d" % r.ties
    found = {tuple(int(round(c)) for c in t) for t in r.tie_examples}
    want = {(0, 1, 1, 0, 0, 1, 1, 0), (1, 0, 0, 1, 1, 0, 0, 1)}
    if found != want:
        return False, "maximizer set %r is not the two deterministic pairs" % found
    for t in r.tie_examples:
        k1, k2 = _point_kernels(t)
        joint = compose([src, k1, k2, ch.pair_kernel()])
        side = mutual_information(joint, {"X1", "X2"}, {"YS"}, {"S1", "S2"}) + ch.c3
        if abs(side - 1.0) > 1e-9 or not side < LOG2_3:
            return False, "destination side term %.12f at a maximizer" % side
    cobj = kernel_grid_objective(ch, src, "relay_mi_given_sources")
    rc = maximize(cobj, cobj.dims,
                  SearchSpec(step=0.01, stages=stage, n_threads=threads))
    if abs(rc.best_value - 1.5) > 0.01:
        return False, "max conditional relay information %.6f != 1.5" % rc.best_value
    return True, "max=log2(3) at 2 kernels, side term 1 < log2(3), cond max %.4f" \
        % rc.best_value


def crit_zero_error_scheme(quick=False, threads=1):
    B = 500 if quick else 10000
    for seed in (101, 202, 303):
        rep = run_table1_scheme(100, B, seed, threads=threads)
        if rep.relay_errors or rep.destination_errors or rep.empirical_pe != 0.0:
            return False, "seed %d gave pe=%g" % (seed, rep.empirical_pe)
    scenario = MarcScenario(sources_named("table2"), psomarc_table1())
    rep3 = eval_thm3(scenario, identity_encoders(scenario))
    for rec in rep3.records:
        if abs(rec.margin) > 1e-9 or rec.status != "boundary":
            return False, "%s margin %.3g status %s" % (
                rec.label, rec.margin, rec.status)
    return True, "pe=0 on 3 seeds (B=%d), all 6 margins 0 +/- 1e-9 boundary" % B


def crit_six_cell_tightness(quick=False, threads=1):
    ch = psomarc_table7()
    src = sources_named("table8")
    h = entropy(src, {"S1", "S2"})
    if h != LOG2_6:
        return False, "source entropy %.17g != log2(6)" % h
    cells = src.mass.ravel()
    obj = pairing_objective(ch, "cutset")
    v = obj(cells)
    if abs(v - LOG2_6) > 1e-9:
        return False, "matched-pairing objective %.12f != log2(6)" % v
    if not maxcorr_constraint(ch, src)(cells):
        return False, "matched pairing rejected by the correlation constraint"
    # full-grid maxima bound every grid point at once
    step = 0.1 if quick else 0.05
    spec = SearchSpec(step=step, stages="single", n_threads=threads)
    m_side = maximize(pairing_objective(ch, "dst_mi"), [9], spec).best_value
    m_cond = maximize(pairing_objective(ch, "relay_cond_entropy"), [9], spec).best_value
    if m_side > LOG2_3 + 1e-9:
        return False, "some pairing has destination information %.12f > log2(3)" % m_side
    if m_cond > 1.0 + 1e-9:
        return False, "some pairing has relay ambiguity %.12f > 1 bit" % m_cond
    return True, "objective log2(6), grid maxima %.6f <= log2(3), %.6f <= 1 (step %g)" \
        % (m_side, m_cond, step)


def _random_full_scenario(rng):
    ns1, ns2 = rng.integers(2, 4), rng.integers(2, 4)
    nw = int(rng.integers(1, 3))
    nw3 = int(rng.integers(1, 3))
    axes = [_axis("S1", ns1), _axis("S2", ns2)]
    if nw > 1:
        axes.append(_axis("W", nw))
    if nw3 > 1:
        axes.append(_axis("W3", nw3))
    shape = tuple(len(a) for a in axes)
    sources = JointTable(axes, rng.dirichlet(np.ones(int(np.prod(shape))))
                         .reshape(shape))
    nx1, nx2, nx3 = (int(rng.integers(2, 4)) for _ in range(3))
    ny3, ny = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    x1, x2, x3 = _axis("X1", nx1), _axis("X2", nx2), _axis("X3", nx3)
    law = ConditionalKernel(
        (x1, x2, x3), (_axis("Y3", ny3), _axis("Y", ny)),
        rng.dirichlet(np.ones(ny3 * ny), size=nx1 * nx2 * nx3))
    v1 = _axis("V1", int(rng.integers(1, 3)))
    v2 = _axis("V2", int(rng.integers(1, 3)))
    scenario = MarcScenario(sources, MarcChannel(law), aux={"V1": v1, "V2": v2})
    s1, s2 = scenario.sources.axes[0], scenario.sources.axes[1]
    chain = [
        JointTable((v1,), rng.dirichlet(np.ones(len(v1)))),
        JointTable((v2,), rng.dirichlet(np.ones(len(v2)))),
        ConditionalKernel((s1, v1), (x1,),
                          rng.dirichlet(np.ones(nx1), size=ns1 * len(v1))),
        ConditionalKernel((s2, v2), (x2,),
                          rng.dirichlet(np.ones(nx2), size=ns2 * len(v2))),
        ConditionalKernel((v1, v2), (x3,),
                          rng.dirichlet(np.ones(nx3), size=len(v1) * len(v2))),
    ]
    return scenario, chain


def _random_psomarc(rng):
    from .marc_models import Psomarc
    x1, x2 = _axis("X1", 2), _axis("X2", 2)
    ny3, nys = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    y3k = ConditionalKernel((x1, x2), (_axis("Y3", ny3),),
                            rng.dirichlet(np.ones(ny3), size=4))
    ysk = ConditionalKernel((x1, x2), (_axis("YS", nys),),
                            rng.dirichlet(np.ones(nys), size=4))
    c3 = float(rng.uniform(0.05, 1.0))
    src = JointTable((_axis("S1", 2), _axis("S2", 2)),
                     rng.dirichlet(np.ones(4)).reshape(2, 2))
    return Psomarc(y3k, ysk, c3), src


def crit_ordering_properties(quick=False, threads=1):
    rng = np.random.default_rng(8675309)
    n_scen = 30 if quick else 200
    worst_pair = 0.0
    worst_rly = 0.0
    for _ in range(n_scen):
        scenario, chain = _random_full_scenario(rng)
        r1 = eval_thm1(scenario, chain)
        r3 = eval_thm3(scenario, chain)
        rp = eval_prop1(scenario, chain)
        by1 = {r.label.split(".", 1)[1]: r for r in r1.records}
        by3 = {r.label.split(".", 1)[1]: r for r in r3.records}
        byp = {r.label.split(".", 1)[1]: r for r in rp.records}
        for k in ("rly.S1", "rly.S2", "rly.S1S2"):
            spread = max(by1[k].rhs_bits, by3[k].rhs_bits, byp[k].rhs_bits) - \
                min(by1[k].rhs_bits, by3[k].rhs_bits, byp[k].rhs_bits)
            worst_rly = max(worst_rly, spread)
            if spread > 1e-9:
                return False, "relay records differ by %.3g across schemes" % spread
        for k in ("dst.S1", "dst.S2", "dst.S1S2"):
            for other in (by1, byp):
                gap = other[k].margin - by3[k].margin
                worst_pair = max(worst_pair, gap)
                if gap > 1e-9:
                    return False, "%s margin beats the joint scheme by %.3g" % (k, gap)
    n_ch = 8 if quick else 50
    spec = SearchSpec(step=0.05, n_threads=threads)
    for _ in range(n_ch):
        ch, src = _random_psomarc(rng)
        lo = i_new_psomarc(ch, src, spec).best_value
        hi = cutset_psomarc(ch, spec).best_value
        if lo > hi + 1e-9:
            return False, "constrained frontier %.12f above cut-set %.12f" % (lo, hi)
    return True, "%d chains ordered (worst gap %.2g), relay spread %.2g, " \
        "%d frontier pairs ordered" % (n_scen, worst_pair, worst_rly, n_ch)


def _charpoly_sigma2(m):
    """Second singular value via the Gram characteristic polynomial."""
    E = m.entries
    G = E @ E.T if E.shape[0] <= E.shape[1] else E.T @ E
    n = G.shape[0]
    if n == 1:
        return 0.0
    if n == 2:
        coeffs = [1.0, -np.trace(G), np.linalg.det(G)]
    else:
        minors = sum(G[i, i] * G[j, j] - G[i, j] * G[j, i]
                     for i in range(3) for j in range(i + 1, 3))
        coeffs = [1.0, -np.trace(G), minors, -np.linalg.det(G)]
    eig = sorted(np.roots(coeffs).real, reverse=True)
    return math.sqrt(max(eig[1], 0.0))


def crit_spectral_suite(quick=False, threads=1):
    rng = np.random.default_rng(13579)
    n = 100 if quick else 500
    shapes = [(2, 2), (2, 3), (3, 3)]
    worst_top = worst_vec = worst_s2 = 0.0
    for i in range(n):
        r, c = shapes[i % len(shapes)]
        t = JointTable((_axis("A", r), _axis("B", c)),
                       rng.dirichlet(np.ones(r * c)).reshape(r, c))
        m = normalized_matrix(t)
        vals = singular_values(m).values
        worst_top = max(worst_top, abs(vals[0] - 1.0))
        u, v = top_singular_vectors(m)
        worst_vec = max(worst_vec,
                        np.max(np.abs(u - np.sqrt(m.row_marginal))),
                        np.max(np.abs(v - np.sqrt(m.col_marginal))))
        worst_s2 = max(worst_s2, abs(float(vals[1]) - _charpoly_sigma2(m)))
    if worst_top > 1e-8:
        return False, "top singular value off by %.3g" % worst_top
    if worst_vec > 1e-8:
        return False, "top singular vectors off by %.3g" % worst_vec
    if worst_s2 > 1e-9:
        return False, "sigma_2 disagrees with the polynomial oracle by %.3g" % worst_s2
    # independent sources force an effectively zero correlation budget
    checked = 0
    for _ in range(20 if quick else 60):
        pa, pb = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
        src = JointTable((_axis("S1", 2), _axis("S2", 2)), np.outer(pa, pb))
        rho = maximal_correlation(src)
        k = rng.dirichlet(np.ones(4), size=4).reshape(2, 2, 2, 2)
        joint = JointTable((_axis("S1", 2), _axis("S2", 2),
                            _axis("X1", 2), _axis("X2", 2)),
                           src.mass[:, :, None, None] * k)
        prof = correlation_profile(joint)
        if max(v for _, v in prof.entries()) > 1e-6:
            checked += 1
            if in_Bprime(prof, rho):
                return False, "correlated inputs passed a zero-budget filter"
    return True, "%d joints: sv gaps %.1e/%.1e/%.1e; %d zero-budget rejections" % (
        n, worst_top, worst_vec, worst_s2, checked)


def crit_determinism(quick=False, threads=1):
    ch = psomarc_tables45(0.1)
    src = sources_named("table6")
    runs = []
    for t in (1, 4, 8):
        r = cutset_psomarc(ch, SearchSpec(step=0.02, n_threads=t))
        runs.append((r.best_value, r.argmax_index, r.ties, r.evaluated, r.feasible))
    if len(set(runs)) != 1:
        return False, "cut-set search varies with thread count: %r" % runs
    runs = []
    for t in (1, 4, 8):
        r = i_new_psomarc(ch, src, SearchSpec(step=0.02, n_threads=t))
        runs.append((r.best_value, r.argmax_index, r.ties, r.evaluated, r.feasible))
    if len(set(runs)) != 1:
        return False, "constrained search varies with thread count: %r" % runs
    runs = []
    for t in (1, 4, 8):
        base = _quick_kernel_spec(t) if quick else SearchSpec(n_threads=t)
        r = i_suff_psomarc(ch, src, base)
        runs.append((r.best_value, r.argmax_index, r.ties, r.evaluated, r.feasible))
    if len(set(runs)) != 1:
        return False, "kernel search varies with thread count: %r" % runs
    sims = []
    for t in (1, 4, 8):
        rep = run_table1_scheme(50, 600, 5, threads=t)
        sims.append((rep.blocks_run, rep.relay_errors, rep.destination_errors))
    if len(set(sims)) != 1:
        return False, "simulation varies with thread count: %r" % sims
    return True, "searches and simulation identical across threads 1/4/8"


CRITERIA = [
    ("01 cut-set frontier values", crit_cutset_frontier),
    ("02 constrained frontier values", crit_constrained_frontier),
    ("03 sufficient frontier and stage agreement", crit_sufficient_frontier),
    ("04 entropy and correlation spot values", crit_spot_values),
    ("05 relay-information saturation grid", crit_relay_saturation),
    ("06 zero-error scheme and boundary margins", crit_zero_error_scheme),
    ("07 six-cell matched-pairing tightness", crit_six_cell_tightness),
    ("08 ordering and dominance properties", crit_ordering_properties),
    ("09 spectral suite", crit_spectral_suite),
    ("10 thread-count determinism", crit_determinism),
]


def run_battery(quick=False, threads=1, emit=print):
    all_ok = True
    for name, fn in CRITERIA:
        t0 = time.time()
        try:
            ok, detail = fn(quick=quick, threads=threads)
        except Exception as exc:
            ok, detail = False, "raised %s: %s" % (type(exc).__name__, exc)
        all_ok = all_ok and ok
        emit("%s criterion %s [%.1fs] %s" % (
            "PASS" if ok else "FAIL", name, time.time() - t0, detail))
    return all_ok
