"""Spectral maximal-correlation machinery.

The maximal correlation of a pair of finite random variables equals the
second singular value of the normalized joint matrix
P_X^{-1/2} P_XY P_Y^{-1/2}, computed over supported symbols only.  The
matrices here never exceed 6x6, so the SVD runs through a self-contained
cyclic Jacobi eigendecomposition of the Gram matrix rather than general
LAPACK machinery; that keeps results bit-stable across platforms.
"""

from dataclasses import dataclass, field

import numpy as np

from .discrete_prob import JointTable, TableError, marginalize

SV_TOL = 1e-8        # Theorem-A style invariant band for sigma_1 and vectors
OFFDIAG_TOL = 1e-12  # Jacobi convergence threshold on off-diagonal mass
MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """Jacobi sweep limit exceeded (not expected for <= 6x6 inputs)."""


@dataclass(frozen=True)
class NormalizedJointMatrix:
    """p(x,y)/sqrt(p(x)p(y)) restricted to supported rows and columns."""
    row_symbols: tuple
    col_symbols: tuple
    entries: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray  # descending

    @property
    def top(self):
        return float(self.values[0])

    @property
    def second(self):
        return float(self.values[1]) if len(self.values) > 1 else 0.0


@dataclass
class CorrelationProfile:
    """Unconditional and conditional maximal correlations of an input pair."""
    rho_uncond: float
    rho_given_s1: dict = field(default_factory=dict)
    rho_given_s2: dict = field(default_factory=dict)
    rho_given_both: dict = field(default_factory=dict)

    def entries(self):
        out = [("uncond", self.rho_uncond)]
        out += [("s1=%r" % k, v) for k, v in self.rho_given_s1.items()]
        out += [("s2=%r" % k, v) for k, v in self.rho_given_s2.items()]
        out += [("s1s2=%r" % (k,), v) for k, v in self.rho_given_both.items()]
        return out


def normalized_matrix(p_xy):
    """Normalized joint matrix of a two-axis table."""
    if len(p_xy.axes) != 2:
        raise TableError("normalized_matrix needs a two-axis joint, got %r"
                         % (p_xy.axis_names,))
    P = p_xy.mass
    px = P.sum(axis=1)
    py = P.sum(axis=0)
    rs = px > 0.0
    cs = py > 0.0
    P = P[np.ix_(rs, cs)]
    px = px[rs]
    py = py[cs]
    entries = P / np.sqrt(np.outer(px, py))
    return NormalizedJointMatrix(
        row_symbols=tuple(s for s, k in zip(p_xy.axes[0].symbols, rs) if k),
        col_symbols=tuple(s for s, k in zip(p_xy.axes[1].symbols, cs) if k),
        entries=entries, row_marginal=px, col_marginal=py)


def _jacobi_eigh(G):
    """Cyclic Jacobi diagonalization of a small symmetric matrix.

    Returns (eigenvalues, eigenvectors-as-columns), unsorted.
    """
    A = np.array(G, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return np.array([A[0, 0]]), V
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= OFFDIAG_TOL:
            return np.diag(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0.0 \
                    else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                A[:, [p, q]] = A[:, [p, q]] @ rot
                A[[p, q], :] = rot.T @ A[[p, q], :]
                V[:, [p, q]] = V[:, [p, q]] @ rot
    raise ConvergenceError("Jacobi eigendecomposition did not converge in %d sweeps"
                           % MAX_SWEEPS)


def _gram_spectrum(M):
    """Eigen-decomposition of the smaller Gram matrix of M."""
    if M.shape[0] <= M.shape[1]:
        G = M @ M.T
        side = "left"
    else:
        G = M.T @ M
        side = "right"
    vals, vecs = _jacobi_eigh(G)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order], side


def singular_values(m):
    """Full descending singular spectrum of a NormalizedJointMatrix."""
    vals, _, _ = _gram_spectrum(m.entries)
    sv = np.sqrt(np.clip(vals, 0.0, None))
    sv = np.clip(sv, 0.0, 1.0 + SV_TOL)
    return SingularSpectrum(values=sv)


def top_singular_vectors(m):
    """Left and right singular vectors for sigma_1, sign-normalized.

    The first nonzero entry of each vector is made positive so tests can
    compare against sqrt-marginals without chasing the sign ambiguity.
    """
    M = m.entries
    vals, vecs, side = _gram_spectrum(M)
    w = vecs[:, 0]
    sigma = np.sqrt(max(vals[0], 0.0))
    if side == "left":
        u = w
        v = M.T @ u / sigma if sigma > 0 else np.zeros(M.shape[1])
    else:
        v = w
        u = M @ v / sigma if sigma > 0 else np.zeros(M.shape[0])
    for vec in (u, v):
        nz = np.flatnonzero(np.abs(vec) > 1e-12)
        if len(nz) and vec[nz[0]] < 0:
            vec *= -1.0
    return u, v


def maximal_correlation(p_xy):
    """sigma_2 of the normalized joint; 0 when either support is a point.

    Computed as the top singular value of the matrix after deflating the
    exact leading pair (sqrt row marginal, sqrt column marginal, sigma=1).
    Going through the deflated matrix instead of the second Gram
    eigenvalue keeps near-zero correlations at the 1e-15 scale instead of
    the sqrt-of-roundoff 1e-8 scale.
    """
    m = normalized_matrix(p_xy)
    if len(m.row_symbols) == 1 or len(m.col_symbols) == 1:
        return 0.0
    resid = m.entries - np.outer(np.sqrt(m.row_marginal), np.sqrt(m.col_marginal))
    vals, _, _ = _gram_spectrum(resid)
    return float(np.clip(np.sqrt(max(vals[0], 0.0)), 0.0, 1.0 + SV_TOL))


def _sub_pair_table(axes, mass):
    total = mass.sum()
    return JointTable(axes, mass / total)


def correlation_profile(p, sources=("S1", "S2"), inputs=("X1", "X2")):
    """Maximal correlations of the input pair, plain and conditioned.

    p is a joint over the two source axes and the two input axes (other
    axes are summed out first).  Conditional entries exist only for
    conditioning symbols with positive probability.
    """
    s1, s2 = sources
    x1, x2 = inputs
    t = marginalize(p, {s1, s2, x1, x2})
    order = [t.axis_position(n) for n in (s1, s2, x1, x2)]
    m = np.transpose(t.mass, order)
    a_s1 = t.axis(s1)
    a_s2 = t.axis(s2)
    pair_axes = (t.axis(x1), t.axis(x2))

    prof = CorrelationProfile(
        rho_uncond=maximal_correlation(_sub_pair_table(pair_axes, m.sum(axis=(0, 1)))))
    p_s1 = m.sum(axis=(1, 2, 3))
    p_s2 = m.sum(axis=(0, 2, 3))
    p_both = m.sum(axis=(2, 3))
    for i, sym in enumerate(a_s1.symbols):
        if p_s1[i] > 0.0:
            prof.rho_given_s1[sym] = maximal_correlation(
                _sub_pair_table(pair_axes, m[i].sum(axis=0)))
    for j, sym in enumerate(a_s2.symbols):
        if p_s2[j] > 0.0:
            prof.rho_given_s2[sym] = maximal_correlation(
                _sub_pair_table(pair_axes, m[:, j].sum(axis=0)))
    for i, sy1 in enumerate(a_s1.symbols):
        for j, sy2 in enumerate(a_s2.symbols):
            if p_both[i, j] > 0.0:
                prof.rho_given_both[(sy1, sy2)] = maximal_correlation(
                    _sub_pair_table(pair_axes, m[i, j]))
    return prof


def in_Bprime(profile, rho_sources, tol=1e-9):
    """True iff every profile entry is <= rho_sources + tol."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    return all(v <= rho_sources + tol for _, v in profile.entries())
