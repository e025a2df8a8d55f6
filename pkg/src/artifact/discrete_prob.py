"""Dense probability tables over named finite alphabets.

Everything downstream (feasibility records, spectral tests, searches,
simulation) runs on three carriers defined here: FiniteAlphabet,
JointTable and ConditionalKernel.  Tables are immutable after
construction and all operations are pure, so they can be shared freely
across worker threads.

All information measures are in bits, with the 0*log(0) = 0 convention.
"""

import numpy as np

MASS_TOL = 1e-12


class TableError(ValueError):
    """Raised for malformed tables, kernels, or axis bookkeeping."""


class FiniteAlphabet:
    """Named, ordered finite symbol set. Symbol order fixes all indexing."""

    def __init__(self, name, symbols):
        symbols = tuple(symbols)
        if not name:
            raise TableError("alphabet needs a nonempty name")
        if len(symbols) < 1:
            raise TableError("alphabet %r needs at least one symbol" % name)
        if len(set(symbols)) != len(symbols):
            raise TableError("alphabet %r has duplicate symbols" % name)
        self.name = name
        self.symbols = symbols
        self._index = {s: i for i, s in enumerate(symbols)}

    def __len__(self):
        return len(self.symbols)

    def index(self, symbol):
        try:
            return self._index[symbol]
        except KeyError:
            raise TableError("symbol %r not in alphabet %r" % (symbol, self.name))

    def __eq__(self, other):
        return (isinstance(other, FiniteAlphabet)
                and self.name == other.name and self.symbols == other.symbols)

    def __hash__(self):
        return hash((self.name, self.symbols))

    def __repr__(self):
        return "FiniteAlphabet(%r, %r)" % (self.name, self.symbols)


class JointTable:
    """Dense joint distribution over an ordered tuple of alphabets."""

    def __init__(self, axes, mass):
        axes = tuple(axes)
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise TableError("duplicate axis names: %r" % (names,))
        mass = np.array(mass, dtype=float)
        want = tuple(len(a) for a in axes)
        if mass.shape != want:
            raise TableError("mass shape %r does not match axes %r"
                             % (mass.shape, want))
        if mass.min(initial=0.0) < 0.0:
            raise TableError("negative probability mass")
        total = float(mass.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise TableError("mass sums to %.17g, not 1 within %g"
                             % (total, MASS_TOL))
        mass.flags.writeable = False
        self.axes = axes
        self.mass = mass

    @property
    def axis_names(self):
        return tuple(a.name for a in self.axes)

    def axis(self, name):
        for a in self.axes:
            if a.name == name:
                return a
        raise TableError("no axis named %r (have %r)" % (name, self.axis_names))

    def axis_position(self, name):
        for i, a in enumerate(self.axes):
            if a.name == name:
                return i
        raise TableError("no axis named %r (have %r)" % (name, self.axis_names))

    def __repr__(self):
        return "JointTable(axes=%r)" % (self.axis_names,)


class ConditionalKernel:
    """Row-stochastic map from a given-variable tuple to an output tuple.

    rows[g] is the distribution of the outputs for given-tuple index g
    (row-major over given_axes).  Rows may be flagged undefined when the
    kernel was extracted from a joint with zero mass on that given-tuple;
    undefined rows are stored as zeros.
    """

    def __init__(self, given_axes, out_axes, rows, defined=None):
        given_axes = tuple(given_axes)
        out_axes = tuple(out_axes)
        names = [a.name for a in given_axes + out_axes]
        if len(set(names)) != len(names):
            raise TableError("duplicate axis names in kernel: %r" % (names,))
        n_given = int(np.prod([len(a) for a in given_axes], dtype=int)) if given_axes else 1
        n_out = int(np.prod([len(a) for a in out_axes], dtype=int))
        rows = np.array(rows, dtype=float)
        if rows.size != n_given * n_out:
            raise TableError("kernel has %d entries, want %d rows of %d"
                             % (rows.size, n_given, n_out))
        rows = rows.reshape(n_given, n_out)
        if defined is None:
            defined = np.ones(n_given, dtype=bool)
        else:
            defined = np.array(defined, dtype=bool).reshape(n_given)
        if rows.min(initial=0.0) < 0.0:
            raise TableError("negative kernel entry")
        sums = rows.sum(axis=1)
        bad = defined & (np.abs(sums - 1.0) > MASS_TOL)
        if bad.any():
            g = int(np.argmax(bad))
            raise TableError("kernel row %d sums to %.17g, not 1" % (g, sums[g]))
        if (~defined).any() and np.abs(rows[~defined]).max(initial=0.0) > 0.0:
            raise TableError("undefined kernel rows must hold zero mass")
        rows.flags.writeable = False
        defined.flags.writeable = False
        self.given_axes = given_axes
        self.out_axes = out_axes
        self.rows = rows
        self.defined = defined

    @property
    def given_names(self):
        return tuple(a.name for a in self.given_axes)

    @property
    def out_names(self):
        return tuple(a.name for a in self.out_axes)

    def as_array(self):
        """Kernel as an ndarray shaped given_axes + out_axes."""
        shape = tuple(len(a) for a in self.given_axes + self.out_axes)
        return self.rows.reshape(shape)

    @classmethod
    def deterministic(cls, given_axes, out_axes, mapping):
        """Build a 0/1 kernel from a map given-tuple -> out-tuple.

        mapping is a callable or a dict; tuples use symbol values, with
        bare symbols accepted when a side has a single axis.
        """
        given_axes = tuple(given_axes)
        out_axes = tuple(out_axes)
        get = mapping.__getitem__ if isinstance(mapping, dict) else mapping
        gshapes = [len(a) for a in given_axes]
        n_out = int(np.prod([len(a) for a in out_axes], dtype=int))
        rows = np.zeros((int(np.prod(gshapes, dtype=int)), n_out))
        for g in range(rows.shape[0]):
            gidx = np.unravel_index(g, gshapes)
            gsym = tuple(a.symbols[i] for a, i in zip(given_axes, gidx))
            out = get(gsym if len(gsym) > 1 else gsym[0])
            if not isinstance(out, tuple):
                out = (out,)
            oidx = tuple(a.index(s) for a, s in zip(out_axes, out))
            rows[g, np.ravel_multi_index(oidx, [len(a) for a in out_axes])] = 1.0
        return cls(given_axes, out_axes, rows)

    def __repr__(self):
        return "ConditionalKernel(%r -> %r)" % (self.given_names, self.out_names)


def _resolve(t, names):
    names = set(names)
    unknown = names - set(t.axis_names)
    if unknown:
        raise TableError("unknown axis name(s) %r; table has %r"
                         % (sorted(unknown), t.axis_names))
    return names


def marginalize(t, keep):
    """Sum out every axis not in keep; kept axes stay in table order."""
    keep = _resolve(t, keep)
    if not keep:
        raise TableError("marginalize needs a nonempty keep set")
    drop = tuple(i for i, a in enumerate(t.axes) if a.name not in keep)
    mass = t.mass.sum(axis=drop) if drop else t.mass
    axes = tuple(a for a in t.axes if a.name in keep)
    return JointTable(axes, mass)


def condition(t, on):
    """Split t into p(rest | on). Zero-mass given-tuples come back undefined."""
    on = _resolve(t, on)
    if on == set(t.axis_names):
        raise TableError("conditioning set must be a proper subset of axes")
    given_axes = tuple(a for a in t.axes if a.name in on)
    out_axes = tuple(a for a in t.axes if a.name not in on)
    order = [t.axis_position(a.name) for a in given_axes + out_axes]
    n_given = int(np.prod([len(a) for a in given_axes], dtype=int)) if given_axes else 1
    m = np.transpose(t.mass, order).reshape(n_given, -1)
    sums = m.sum(axis=1)
    defined = sums > 0.0
    if not defined.any():
        raise TableError("all conditioning rows carry zero mass")
    rows = np.zeros_like(m)
    rows[defined] = m[defined] / sums[defined, None]
    return ConditionalKernel(given_axes, out_axes, rows, defined)


def compose(parts):
    """Multiply tables and kernels into one joint, in dependency order.

    Each kernel's given axes must already be produced by an earlier part;
    no axis may be produced twice.  Kernels must be defined wherever the
    partial joint puts mass.
    """
    if not parts:
        raise TableError("compose needs at least one part")
    letters = {}

    def letter(name):
        if name not in letters:
            if len(letters) >= 52:
                raise TableError("too many axes to compose")
            pool = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
            letters[name] = pool[len(letters)]
        return letters[name]

    axes = ()
    mass = np.array(1.0)
    for part in parts:
        if isinstance(part, JointTable):
            new_axes, given, arr = part.axes, (), part.mass
        elif isinstance(part, ConditionalKernel):
            new_axes, given, arr = part.out_axes, part.given_axes, part.as_array()
        else:
            raise TableError("compose parts must be JointTable or ConditionalKernel, got %r"
                             % type(part).__name__)
        given_names = tuple(a.name for a in given)
        have = {a.name: a for a in axes}
        missing = [n for n in given_names if n not in have]
        if missing:
            raise TableError("part %r depends on axis(es) %r not produced yet"
                             % (part, missing))
        for a in given:
            if have[a.name] != a:
                raise TableError("axis %r of part %r does not match the produced "
                                 "alphabet" % (a.name, part))
        clash = [a.name for a in new_axes if a.name in have]
        if clash:
            raise TableError("axis(es) %r produced twice" % (clash,))
        if isinstance(part, ConditionalKernel) and (~part.defined).any():
            held = marginalize(JointTable(axes, mass), given_names) if given_names else None
            if held is not None:
                order = [held.axis_position(n) for n in given_names]
                flat = np.transpose(held.mass, order).reshape(-1)
                lost = float(flat[~part.defined].sum())
                if lost > MASS_TOL:
                    raise TableError("kernel %r undefined on given-tuples holding "
                                     "mass %.3g" % (part, lost))
        sub_cur = "".join(letter(a.name) for a in axes)
        sub_new = "".join(letter(n) for n in given_names)
        sub_new += "".join(letter(a.name) for a in new_axes)
        sub_out = sub_cur + "".join(letter(a.name) for a in new_axes)
        mass = np.einsum("%s,%s->%s" % (sub_cur, sub_new, sub_out), mass, arr)
        axes = axes + tuple(new_axes)
    return JointTable(axes, mass)


def _plain_entropy(mass):
    p = np.asarray(mass).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def entropy(t, of, given=()):
    """Conditional Shannon entropy H(of | given) in bits."""
    of = _resolve(t, of)
    given = _resolve(t, given) if given else set()
    if not of:
        raise TableError("entropy needs a nonempty target set")
    if of & given:
        raise TableError("entropy target and conditioning sets overlap: %r"
                         % sorted(of & given))
    h = _plain_entropy(marginalize(t, of | given).mass)
    if given:
        h -= _plain_entropy(marginalize(t, given).mass)
    return h


def mutual_information(t, a, b, given=()):
    """Conditional mutual information I(a ; b | given) in bits."""
    a = _resolve(t, a)
    b = _resolve(t, b)
    given = _resolve(t, given) if given else set()
    if (a & b) or (a & given) or (b & given):
        raise TableError("mutual information needs pairwise disjoint sets")
    if not a or not b:
        raise TableError("mutual information needs nonempty variable sets")
    return entropy(t, a, given) - entropy(t, a, b | given)
