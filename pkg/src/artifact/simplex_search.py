"""Exhaustive and two-stage grid search over products of probability simplices.

Grid points are integer compositions of 1/step scaled back to floats, so
every candidate lies on the simplex exactly.  Results are deterministic:
chunks have a fixed size independent of the thread count, chunk partials
are merged in index order, and exact ties resolve to the smallest
lexicographic grid index.

Objectives and constraints receive a flat cell vector (all factors
concatenated).  A callable may carry a vectorized form in its ``batch``
attribute taking an (n, cells) matrix; the engine uses it when present
and falls back to a per-point loop otherwise.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

CHUNK = 65536          # fixed evaluation chunk size (determinism anchor)
TIE_TOL = 1e-9         # ties = feasible points within this band of the best
DEDUP_CAP = 1 << 27    # refine stage keeps a visited mask up to this grid size
_CAND_CAP = 1 << 21    # sanity cap on near-best candidate storage


class SearchError(ValueError):
    """Raised for malformed search spaces or empty feasible sets."""


@dataclass
class SearchSpec:
    """Grid-search configuration.

    stages=None picks single-stage for at most 3 free parameters and
    coarse_then_refine otherwise.  coarse_band is the slack below the
    best coarse value within which coarse points are kept as refinement
    seeds; min-of-information objectives are multimodal enough that
    near-optimal coarse cells, not just exact coarse ties, must be
    refined for the two stages to agree with a single fine pass.
    """
    step: float = 0.01
    stages: str = None          # None | 'single' | 'coarse_then_refine'
    coarse_step: float = 0.05
    refine_radius: float = None  # default 2 * coarse_step
    coarse_band: float = 1e-2
    constraint: object = None
    n_threads: int = 1


@dataclass
class SearchResult:
    best_value: float
    argmax: np.ndarray          # flat cell vector
    evaluated: int
    feasible: int
    ties: int                   # feasible grid points within TIE_TOL of best
    step: float
    stages: str
    dims: tuple
    argmax_index: int           # lexicographic grid index (tie-break provenance)
    tie_examples: list = field(default_factory=list)

    def argmax_factors(self):
        """Split the flat argmax cells back into per-factor vectors."""
        out, k = [], 0
        for d in self.dims:
            out.append(self.argmax[k:k + d])
            k += d
        return out


def _steps_per_unit(step):
    if not 0.0 < step <= 1.0:
        raise SearchError("step must lie in (0, 1], got %r" % step)
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-12:
        raise SearchError("step %r does not divide 1" % step)
    return n


def _compositions_int(N, dim):
    """All compositions of N into dim nonnegative parts, ascending lex order."""
    dt = np.int16 if N < 2 ** 15 else np.int32
    memo = {}

    def rec(n, d):
        if d == 1:
            return np.array([[n]], dtype=dt)
        key = (n, d)
        if key not in memo:
            blocks = []
            for v in range(n + 1):
                tail = rec(n - v, d - 1)
                head = np.full((len(tail), 1), v, dtype=dt)
                blocks.append(np.hstack([head, tail]))
            memo[key] = np.vstack(blocks)
        return memo[key]

    return rec(N, dim)


def _comp_count(n, d):
    return math.comb(n + d - 1, d - 1)


def _comp_rank(c, N):
    """Index of composition c in the ascending-lex enumeration.

    Counting compositions with a smaller leading cell telescopes to a
    difference of two binomials per position (hockey-stick identity).
    """
    r, n, d = 0, N, len(c)
    for j in range(d - 1):
        v = int(c[j])
        k = d - j - 1
        if v:
            r += math.comb(n + k, k) - math.comb(n - v + k, k)
        n -= v
    return r


def _bounded_compositions(N, lo, hi):
    """Compositions of N with per-cell bounds lo <= c <= hi, ascending lex."""
    d = len(lo)
    lo_suf = [0] * (d + 1)
    hi_suf = [0] * (d + 1)
    for j in range(d - 1, -1, -1):
        lo_suf[j] = lo_suf[j + 1] + lo[j]
        hi_suf[j] = hi_suf[j + 1] + hi[j]
    out = []
    cur = [0] * d

    def rec(j, rem):
        if j == d - 1:
            if lo[j] <= rem <= hi[j]:
                cur[j] = rem
                out.append(tuple(cur))
            return
        vmin = max(lo[j], rem - hi_suf[j + 1])
        vmax = min(hi[j], rem - lo_suf[j + 1])
        for v in range(vmin, vmax + 1):
            cur[j] = v
            rec(j + 1, rem - v)

    rec(0, N)
    return out


def enumerate_simplex(dim, step):
    """Yield every probability vector on the dim-cell simplex grid."""
    if dim < 1:
        raise SearchError("dim must be >= 1")
    n = _steps_per_unit(step)
    for row in _compositions_int(n, dim):
        yield tuple(float(v) / n for v in row)


class _ProductGrid:
    """Lazy product of simplex grids with lexicographic global indexing."""

    def __init__(self, dims, step):
        if not dims:
            raise SearchError("search space needs at least one simplex factor")
        self.dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in self.dims):
            raise SearchError("every simplex factor needs >= 1 cell")
        self.n = _steps_per_unit(step)
        self.step = step
        self.factors = [_compositions_int(self.n, d) for d in self.dims]
        self.counts = [len(f) for f in self.factors]
        self.mult = [1] * len(self.dims)
        for i in range(len(self.dims) - 2, -1, -1):
            self.mult[i] = self.mult[i + 1] * self.counts[i + 1]
        self.total = self.mult[0] * self.counts[0]
        self.total_cells = sum(self.dims)

    def decode(self, idx):
        """Float cell matrix for an array of global indices."""
        idx = np.asarray(idx, dtype=np.int64)
        cols = []
        for i in range(len(self.dims)):
            digit = (idx // self.mult[i]) % self.counts[i]
            cols.append(self.factors[i][digit].astype(float))
        return np.hstack(cols) / self.n

    def int_cells(self, idx):
        """Integer composition cells for one global index."""
        digits = []
        rest = int(idx)
        for i in range(len(self.dims)):
            d, rest = divmod(rest, self.mult[i])
            digits.append(d)
        return np.hstack([self.factors[i][d].astype(np.int64)
                          for i, d in enumerate(digits)])


def _call_batch(fn, pts):
    b = getattr(fn, "batch", None)
    if b is not None:
        return np.asarray(b(pts))
    return np.array([fn(p) for p in pts])


@dataclass
class _ScanState:
    best: float = -np.inf
    best_idx: int = -1
    cand_idx: list = field(default_factory=list)
    cand_val: list = field(default_factory=list)
    evaluated: int = 0
    feasible: int = 0

    def push(self, idx, vals, band):
        """Merge one chunk's feasible (index, value) arrays; idx ascending."""
        if len(vals):
            j = int(np.argmax(vals))
            if vals[j] > self.best or (vals[j] == self.best and idx[j] < self.best_idx):
                self.best = float(vals[j])
                self.best_idx = int(idx[j])
            keep = vals >= self.best - band
            self.cand_idx.extend(int(v) for v in idx[keep])
            self.cand_val.extend(float(v) for v in vals[keep])
            if len(self.cand_idx) > _CAND_CAP:
                self.prune(band)
                if len(self.cand_idx) > _CAND_CAP:
                    raise SearchError("near-best candidate set exceeded %d points; "
                                      "objective too flat for tie tracking" % _CAND_CAP)

    def prune(self, band):
        keep = [(i, v) for i, v in zip(self.cand_idx, self.cand_val)
                if v >= self.best - band]
        self.cand_idx = [i for i, _ in keep]
        self.cand_val = [v for _, v in keep]

    def finish(self, band):
        self.prune(band)
        order = np.argsort(self.cand_idx, kind="stable")
        self.cand_idx = [self.cand_idx[i] for i in order]
        self.cand_val = [self.cand_val[i] for i in order]


def _scan_grid(grid, objective, constraint, band, n_threads):
    """Evaluate every grid point; track the best and the near-best band."""
    nchunks = (grid.total + CHUNK - 1) // CHUNK

    def work(ci):
        lo = ci * CHUNK
        idx = np.arange(lo, min(lo + CHUNK, grid.total), dtype=np.int64)
        visited = len(idx)
        pts = grid.decode(idx)
        if constraint is not None:
            mask = np.asarray(_call_batch(constraint, pts), dtype=bool)
            idx, pts = idx[mask], pts[mask]
        vals = (np.asarray(_call_batch(objective, pts), dtype=float)
                if len(pts) else np.empty(0))
        return visited, vals, idx

    state = _ScanState()
    chunks = range(nchunks)
    if n_threads <= 1:
        results = map(work, chunks)
        for visited, vals, idx in results:
            state.evaluated += visited
            state.feasible += len(vals)
            state.push(idx, vals, band)
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as ex:
            for visited, vals, idx in ex.map(work, chunks):
                state.evaluated += visited
                state.feasible += len(vals)
                state.push(idx, vals, band)
    if state.feasible == 0:
        raise SearchError("no feasible grid point")
    state.finish(band)
    return state


def _refine_windows(grid, centers, radius_int, objective, constraint):
    """Scan the union of fine windows around the coarse candidate centers.

    With the whole fine grid small enough, a visited mask deduplicates
    overlapping windows; otherwise overlaps are evaluated again and only
    the tie band is deduplicated afterwards.
    """
    state = _ScanState()
    visited = np.zeros(grid.total, dtype=bool) if grid.total <= DEDUP_CAP else None
    for center in centers:
        windows = []
        ranks = []
        k = 0
        empty = False
        for i, d in enumerate(grid.dims):
            ctr = center[k:k + d]
            lo = [max(0, int(c) - radius_int) for c in ctr]
            hi = [min(grid.n, int(c) + radius_int) for c in ctr]
            comps = _bounded_compositions(grid.n, lo, hi)
            if not comps:
                empty = True
                break
            windows.append(np.array(comps, dtype=np.int64))
            ranks.append(np.array([_comp_rank(c, grid.n) for c in comps],
                                  dtype=np.int64))
            k += d
        if empty:
            continue
        sizes = [len(w) for w in windows]
        mult = [1] * len(sizes)
        for i in range(len(sizes) - 2, -1, -1):
            mult[i] = mult[i + 1] * sizes[i + 1]
        wtotal = mult[0] * sizes[0]
        for lo in range(0, wtotal, CHUNK):
            loc = np.arange(lo, min(lo + CHUNK, wtotal), dtype=np.int64)
            cols = []
            gidx = np.zeros(len(loc), dtype=np.int64)
            for i in range(len(sizes)):
                digit = (loc // mult[i]) % sizes[i]
                cols.append(windows[i][digit])
                gidx += ranks[i][digit] * grid.mult[i]
            if visited is not None:
                fresh = ~visited[gidx]
                visited[gidx[fresh]] = True
                gidx = gidx[fresh]
                cols = [c[fresh] for c in cols]
            state.evaluated += len(gidx)
            if not len(gidx):
                continue
            pts = np.hstack(cols).astype(float) / grid.n
            if constraint is not None:
                mask = np.asarray(_call_batch(constraint, pts), dtype=bool)
                gidx, pts = gidx[mask], pts[mask]
            state.feasible += len(gidx)
            if len(gidx):
                vals = np.asarray(_call_batch(objective, pts), dtype=float)
                state.push(gidx, vals, TIE_TOL)
    if state.feasible == 0:
        raise SearchError("no feasible grid point in the refinement windows")
    state.finish(TIE_TOL)
    if visited is None:
        uniq = {}
        for i, v in zip(state.cand_idx, state.cand_val):
            uniq.setdefault(i, v)
        state.cand_idx = sorted(uniq)
        state.cand_val = [uniq[i] for i in state.cand_idx]
        if state.best_idx not in uniq:
            state.best_idx = min(i for i, v in uniq.items() if v == state.best)
    return state


def _result_from_state(state, grid, stages):
    in_band = [(i, v) for i, v in zip(state.cand_idx, state.cand_val)
               if v >= state.best - TIE_TOL]
    return SearchResult(
        best_value=state.best,
        argmax=grid.decode(np.array([state.best_idx]))[0],
        evaluated=state.evaluated,
        feasible=state.feasible,
        ties=len(in_band),
        step=grid.step,
        stages=stages,
        dims=grid.dims,
        argmax_index=state.best_idx,
        tie_examples=[grid.decode(np.array([i]))[0] for i, _ in in_band[:16]])


def maximize(objective, space, spec=None):
    """Exhaustively maximize over a product of simplex grids.

    space is a sequence of simplex cell counts, e.g. [4] for one
    distribution over four cells, [2, 2, 2, 2] for four binary
    conditional rows.  Returns a SearchResult; raises SearchError when
    no grid point satisfies the constraint.
    """
    spec = spec or SearchSpec()
    dims = tuple(int(d) for d in space)
    free = sum(d - 1 for d in dims)
    stages = spec.stages or ("single" if free <= 3 else "coarse_then_refine")
    if stages == "single":
        grid = _ProductGrid(dims, spec.step)
        state = _scan_grid(grid, objective, spec.constraint, TIE_TOL, spec.n_threads)
        return _result_from_state(state, grid, "single")
    if stages != "coarse_then_refine":
        raise SearchError("unknown stages mode %r" % spec.stages)

    if spec.coarse_step < spec.step:
        raise SearchError("coarse_step must be >= step")
    n_fine = _steps_per_unit(spec.step)
    n_coarse = _steps_per_unit(spec.coarse_step)
    if n_fine % n_coarse != 0:
        raise SearchError("coarse step %r is not a multiple of step %r"
                          % (spec.coarse_step, spec.step))
    scale = n_fine // n_coarse
    radius = (spec.refine_radius if spec.refine_radius is not None
              else 2 * spec.coarse_step)
    radius_int = int(round(radius * n_fine))

    coarse = _ProductGrid(dims, spec.coarse_step)
    cstate = _scan_grid(coarse, objective, spec.constraint, spec.coarse_band,
                        spec.n_threads)
    centers = [coarse.int_cells(i) * scale for i in cstate.cand_idx]

    fine = _ProductGrid(dims, spec.step)
    rstate = _refine_windows(fine, centers, radius_int, objective, spec.constraint)
    rstate.evaluated += cstate.evaluated
    rstate.feasible += cstate.feasible
    return _result_from_state(rstate, fine, "coarse_then_refine")
