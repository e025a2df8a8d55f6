"""Independent reference implementations and frozen regression values.

The reference routines below deliberately avoid numpy reductions and the
library's own einsum paths: they walk python dicts and accumulate with
math.fsum, so a vectorization bug in the package cannot hide in its own
oracle.
"""

import math


def table_dict(t):
    """JointTable -> {symbol index tuple: probability}, zeros dropped."""
    out = {}
    it = t.mass.flat
    shape = t.mass.shape
    for flat, p in enumerate(it):
        if p <= 0.0:
            continue
        idx = []
        rem = flat
        for n in reversed(shape):
            idx.append(rem % n)
            rem //= n
        out[tuple(reversed(idx))] = float(p)
    return out


def ref_entropy(t, of, given=()):
    """H(of | given) in bits by direct summation over a dict."""
    of = sorted({of} if isinstance(of, str) else set(of))
    given = sorted({given} if isinstance(given, str) else set(given))
    pos = {n: i for i, n in enumerate(t.axis_names)}
    d = table_dict(t)

    def collapse(names):
        keep = [pos[n] for n in names]
        agg = {}
        for sym, p in d.items():
            key = tuple(sym[i] for i in keep)
            agg[key] = agg.get(key, 0.0) + p
        return agg

    joint = collapse(of + given)
    h = -math.fsum(p * math.log2(p) for p in joint.values())
    if given:
        cond = collapse(given)
        h += math.fsum(p * math.log2(p) for p in cond.values())
    return h


def ref_mutual_information(t, a, b, given=()):
    a = {a} if isinstance(a, str) else set(a)
    b = {b} if isinstance(b, str) else set(b)
    given = {given} if isinstance(given, str) else set(given)
    return ref_entropy(t, a, given) - ref_entropy(t, a, b | given)


def charpoly_sigma2(mass):
    """Second singular value of the normalized 2-axis table, via np.roots.

    Builds the Gram matrix of M_ij = p_ij / sqrt(r_i c_j) and extracts
    eigenvalues from the characteristic polynomial.  Shares no code with
    the package's Jacobi sweep.
    """
    import numpy as np
    r = mass.sum(axis=1)
    c = mass.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = mass / np.sqrt(np.outer(r, c))
    m[~np.isfinite(m)] = 0.0
    g = m @ m.T
    eig = np.roots(np.poly(g))
    eig = np.sort(np.abs(eig.real))[::-1]
    if len(eig) < 2:
        return 0.0
    return float(math.sqrt(max(eig[1], 0.0)))


# Grid-search frontier values, pinned after hand-verification against the
# published operating points (each sits inside the +/-0.01 acceptance
# window) and against single-stage re-enumeration.
CUTSET_C3 = {0.1: 0.5151911903529747, 0.2: 0.6005768856364504}
INEW = {
    (0.1, False): 0.4845316476589794,
    (0.2, False): 0.5138788385637358,
    (0.5, False): 0.5138788385637358,
    (0.5, True): 0.9243293344928647,
}
INEW_01_FEASIBLE = 13955
ISUFF_DEFAULT = 0.27393825389396786

LOG2_3 = math.log2(3.0)
LOG2_6 = math.log2(6.0)
TABLE6_H = 0.5043442126799218
TABLE6_H_S1_GIVEN_S2 = 0.23957917874424128
TABLE2_RHO = 0.5
TABLE6_RHO = 0.044309714345054325
