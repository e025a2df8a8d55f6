"""Command-line front end.

Subcommands: info, bounds, search, simulate, regress.  Reports are
line-oriented key=value / record-per-line text; exit codes are 0 for
feasible/satisfied results, 1 for violated, 2 for boundary, 3 for usage
or file errors.

Scenario files are plain text.  Lines are whitespace-tokenized; '#'
starts a comment.  Declarations:

    alphabet NAME sym [sym ...]
    sources                      # |S1| rows of |S2| probabilities follow
    c3 VALUE
    builtin NAME                 # table1 / tables45 / table7 channel
    kernel OUT [OUT ...] given IN [IN ...]   # stochastic rows follow
    table NAME [NAME ...]        # one row of joint probabilities follows

Probabilities accept fractions ('1/3') and are parsed exactly before
conversion to float.  A PSOMARC needs kernels Y3|X1,X2 and YS|X1,X2
plus c3; a full MARC needs one kernel Y3,Y|X1,X2,X3.  Kernels whose
outputs are W or W3 extend the source joint with side information.
"""

import argparse
import sys
from fractions import Fraction

import numpy as np

from .discrete_prob import (ConditionalKernel, FiniteAlphabet, JointTable,
                            TableError, compose, condition, entropy,
                            marginalize)
from .marc_models import (MarcChannel, MarcScenario, Psomarc,
                          identity_encoders, psomarc_table1, psomarc_table7,
                          psomarc_tables45, sources_named)
from .maxcorr_spectral import maximal_correlation
from .necessary_bounds import (BprimeError, cutset_psomarc,
                               eval_prop2_broadcast, eval_thm4, eval_thm5,
                               i_new_psomarc)
from .simplex_search import SearchSpec
from .sufficient_bounds import (ChainError, eval_prop1, eval_thm1, eval_thm2,
                                eval_thm3, i_suff_psomarc)

EXIT_FEASIBLE = 0
EXIT_VIOLATED = 1
EXIT_BOUNDARY = 2
EXIT_USAGE = 3


class ScenarioParseError(ValueError):
    pass


def _num(tok, lineno):
    try:
        return float(Fraction(tok))
    except (ValueError, ZeroDivisionError):
        raise ScenarioParseError("line %d: bad probability %r" % (lineno, tok))


def _symbol(tok):
    try:
        return int(tok)
    except ValueError:
        return tok


class _Doc:
    """Tokenized scenario/encoder text with one-shot row consumption."""

    def __init__(self, text):
        self.lines = []
        for i, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0].strip()
            if body:
                self.lines.append((i, body.split()))
        self.pos = 0

    def next_row(self, want, lineno):
        if self.pos >= len(self.lines):
            raise ScenarioParseError(
                "line %d: expected %d more probability row(s)" % (lineno, want))
        i, toks = self.lines[self.pos]
        self.pos += 1
        return i, toks


def _parse_blocks(text):
    """Scan declarations into (alphabets, events) without wiring them."""
    doc = _Doc(text)
    alphabets = {}
    events = []

    def alph(name, lineno):
        if name not in alphabets:
            raise ScenarioParseError("line %d: alphabet %s not declared yet"
                                     % (lineno, name))
        return alphabets[name]

    def read_matrix(n_rows, n_cols, lineno):
        rows = []
        for _ in range(n_rows):
            i, toks = doc.next_row(n_rows - len(rows), lineno)
            if len(toks) != n_cols:
                raise ScenarioParseError("line %d: expected %d values, got %d"
                                         % (i, n_cols, len(toks)))
            rows.append([_num(t, i) for t in toks])
        return np.array(rows)

    while doc.pos < len(doc.lines):
        lineno, toks = doc.lines[doc.pos]
        doc.pos += 1
        head = toks[0]
        if head == "alphabet":
            if len(toks) < 3:
                raise ScenarioParseError("line %d: alphabet needs a name and "
                                         "symbols" % lineno)
            name = toks[1]
            if name in alphabets:
                raise ScenarioParseError("line %d: alphabet %s declared twice"
                                         % (lineno, name))
            alphabets[name] = FiniteAlphabet(
                name, tuple(_symbol(t) for t in toks[2:]))
        elif head == "sources":
            s1, s2 = alph("S1", lineno), alph("S2", lineno)
            events.append(("sources", lineno,
                           read_matrix(len(s1), len(s2), lineno)))
        elif head == "c3":
            if len(toks) != 2:
                raise ScenarioParseError("line %d: c3 takes one value" % lineno)
            events.append(("c3", lineno, _num(toks[1], lineno)))
        elif head == "builtin":
            if len(toks) != 2:
                raise ScenarioParseError("line %d: builtin takes one name" % lineno)
            events.append(("builtin", lineno, toks[1]))
        elif head == "kernel":
            if "given" not in toks:
                raise ScenarioParseError("line %d: kernel needs 'given'" % lineno)
            cut = toks.index("given")
            outs = [alph(n, lineno) for n in toks[1:cut]]
            givens = [alph(n, lineno) for n in toks[cut + 1:]]
            if not outs or not givens:
                raise ScenarioParseError("line %d: kernel needs outputs and "
                                         "conditions" % lineno)
            n_rows = int(np.prod([len(a) for a in givens]))
            n_cols = int(np.prod([len(a) for a in outs]))
            rows = read_matrix(n_rows, n_cols, lineno)
            events.append(("kernel", lineno,
                           ConditionalKernel(tuple(givens), tuple(outs), rows)))
        elif head == "table":
            axes = [alph(n, lineno) for n in toks[1:]]
            if not axes:
                raise ScenarioParseError("line %d: table needs axis names" % lineno)
            shape = tuple(len(a) for a in axes)
            row = read_matrix(1, int(np.prod(shape)), lineno)[0]
            events.append(("table", lineno,
                           JointTable(tuple(axes), row.reshape(shape))))
        else:
            raise ScenarioParseError("line %d: unknown declaration %r"
                                     % (lineno, head))
    return alphabets, events


def _builtin_channel(name, c3=None):
    if name == "table1":
        ch = psomarc_table1()
    elif name == "tables45":
        ch = psomarc_tables45(0.1 if c3 is None else c3)
        return ch
    elif name == "table7":
        ch = psomarc_table7()
    else:
        raise ScenarioParseError("unknown builtin channel %r" % name)
    if c3 is not None:
        ch = Psomarc(ch.y3_map, ch.ys_map, c3)
    return ch


def parse_scenario(text):
    """Build a MarcScenario from scenario-file text."""
    alphabets, events = _parse_blocks(text)
    sources = None
    c3 = None
    builtin = None
    out_kernels = {}
    side_parts = []
    aux = {n: a for n, a in alphabets.items() if n in ("V1", "V2")}
    for kind, lineno, payload in events:
        if kind == "sources":
            sources = JointTable((alphabets["S1"], alphabets["S2"]), payload)
        elif kind == "c3":
            c3 = payload
        elif kind == "builtin":
            builtin = (lineno, payload)
        elif kind == "kernel":
            outs = payload.out_names
            if set(outs) & {"W", "W3"}:
                side_parts.append(payload)
            else:
                out_kernels[outs] = (lineno, payload)
        elif kind == "table":
            raise ScenarioParseError("line %d: bare tables belong in encoder "
                                     "files, not scenarios" % lineno)
    if sources is None:
        raise ScenarioParseError("scenario has no sources block")
    if side_parts:
        sources = compose([sources, *side_parts])
    if builtin is not None:
        channel = _builtin_channel(builtin[1], c3)
    elif ("Y3", "Y") in out_kernels:
        channel = MarcChannel(out_kernels[("Y3", "Y")][1])
    elif ("Y3",) in out_kernels and ("YS",) in out_kernels:
        if c3 is None:
            raise ScenarioParseError("a PSOMARC scenario needs a c3 line")
        channel = Psomarc(out_kernels[("Y3",)][1], out_kernels[("YS",)][1], c3)
    else:
        raise ScenarioParseError("scenario declares no channel (builtin, "
                                 "Y3,Y kernel, or Y3 + YS kernels)")
    try:
        return MarcScenario(sources, channel, aux=aux)
    except TableError as exc:
        raise ScenarioParseError(str(exc))


def parse_encoders(text, scenario):
    """Build an encoder part list, resolving S/X axes from the scenario."""
    env = {a.name: a for a in scenario.sources.axes}
    env.update({a.name: a for a in scenario.channel.input_axes})
    env.update(scenario.aux)
    prelude = "".join("alphabet %s %s\n" % (n, " ".join(str(s) for s in a.symbols))
                      for n, a in env.items())
    alphabets, events = _parse_blocks(prelude + text)
    parts = []
    for kind, lineno, payload in events:
        if kind in ("kernel", "table"):
            parts.append(payload)
        elif kind in ("sources", "c3", "builtin"):
            raise ScenarioParseError("line %d: %s does not belong in an "
                                     "encoder file" % (lineno, kind))
    if not parts:
        raise ScenarioParseError("encoder file declares no parts")
    return parts


def _fmt(x):
    return "%.17g" % x


def serialize_scenario(scenario):
    """Scenario-file text that reloads to identical tables."""
    lines = []
    src = scenario.sources
    keep = [a for a in src.axes
            if a.name in ("S1", "S2") or len(a) > 1]
    for a in keep:
        lines.append("alphabet %s %s" % (a.name, " ".join(str(s) for s in a.symbols)))
    pair = marginalize(src, {"S1", "S2"})
    lines.append("sources")
    for row in pair.mass:
        lines.append(" ".join(_fmt(v) for v in row))
    names = [a.name for a in keep]
    if "W" in names:
        lines += _kernel_lines(_conditional_rows(src, ("W",), ("S1", "S2")))
    if "W3" in names:
        given = ("S1", "S2", "W") if "W" in names else ("S1", "S2")
        lines += _kernel_lines(_conditional_rows(src, ("W3",), given))
    ch = scenario.channel
    if isinstance(ch, Psomarc):
        for a in ch.input_axes + (ch.y3_map.out_axes[0], ch.ys_map.out_axes[0]):
            lines.append("alphabet %s %s"
                         % (a.name, " ".join(str(s) for s in a.symbols)))
        lines.append("c3 %s" % _fmt(ch.c3))
        lines += _kernel_lines(ch.y3_map)
        lines += _kernel_lines(ch.ys_map)
    else:
        for a in ch.law.given_axes + ch.law.out_axes:
            lines.append("alphabet %s %s"
                         % (a.name, " ".join(str(s) for s in a.symbols)))
        lines += _kernel_lines(ch.law)
    return "\n".join(lines) + "\n"


def _conditional_rows(joint, outs, given):
    t = marginalize(joint, set(outs) | set(given))
    k = condition(t, set(given))
    rows = np.array(k.rows)
    if k.defined is not None:
        rows = rows.copy()
        rows[~k.defined] = 1.0 / rows.shape[1]  # unreachable rows, any law works
    return ConditionalKernel(k.given_axes, k.out_axes, rows)


def _kernel_lines(kernel):
    head = "kernel %s given %s" % (" ".join(kernel.out_names),
                                   " ".join(kernel.given_names))
    return [head] + [" ".join(_fmt(v) for v in row) for row in kernel.rows]


def _load_scenario(args):
    if args.scenario:
        with open(args.scenario) as fh:
            return parse_scenario(fh.read())
    pairs = {"table1": "table2", "tables45": "table6", "table7": "table8"}
    if args.builtin not in pairs:
        raise ScenarioParseError("unknown builtin pair %r" % args.builtin)
    ch = _builtin_channel(args.builtin, args.c3)
    return MarcScenario(sources_named(pairs[args.builtin]), ch)


def cmd_info(scenario):
    src = marginalize(scenario.sources, {"S1", "S2"})
    out = []
    for a in scenario.sources.axes:
        if a.name in ("S1", "S2") or len(a) > 1:
            out.append("alphabet_%s=%d" % (a.name, len(a)))
    for a in scenario.channel.input_axes:
        out.append("alphabet_%s=%d" % (a.name, len(a)))
    out.append("h_joint=%.12g" % entropy(src, {"S1", "S2"}))
    out.append("h_s1_given_s2=%.12g" % entropy(src, {"S1"}, {"S2"}))
    out.append("h_s2_given_s1=%.12g" % entropy(src, {"S2"}, {"S1"}))
    out.append("rho_star=%.12g" % maximal_correlation(src))
    if scenario.is_psomarc:
        out.append("c3=%.12g" % scenario.channel.c3)
    return "\n".join(out)


_SUFFICIENT = {"thm1": eval_thm1, "thm2": eval_thm2, "thm3": eval_thm3,
               "prop1": eval_prop1}
_NECESSARY = {"thm4": eval_thm4, "prop2bc": eval_prop2_broadcast,
              "thm5": eval_thm5}
_NEC_AXES = {"thm4": {"Q", "S1", "S2", "W", "X1", "X2", "X3", "Y"},
             "prop2bc": {"V", "S1", "S2", "W", "W3", "X1", "X2", "X3", "Y", "Y3"},
             "thm5": {"Q", "S1", "S2", "W", "W3", "X1", "X2", "X3", "Y", "Y3"}}


def cmd_bounds(scenario, scheme, encoders=None):
    """Returns (report text, exit code)."""
    if scheme == "cutset":
        if not scenario.is_psomarc:
            raise ChainError("the cut-set frontier is defined for PSOMARC "
                             "scenarios only")
        r = cutset_psomarc(scenario.channel, SearchSpec(step=0.01))
        return "\n".join(_search_lines("cutset", r)), EXIT_FEASIBLE
    if scheme in _SUFFICIENT:
        chain = encoders or identity_encoders(scenario, scheme)
        rep = _SUFFICIENT[scheme](scenario, chain)
        lines = ["scheme=%s" % scheme] + rep.lines()
        lines += ["note %s" % n for n in rep.notes]
        verdict = rep.classify()
        lines.append("classification=%s" % verdict)
        code = {"feasible": EXIT_FEASIBLE, "violated": EXIT_VIOLATED,
                "boundary": EXIT_BOUNDARY}[verdict]
        return "\n".join(lines), code
    if scheme in _NECESSARY:
        if encoders is None:
            raise ChainError("%s needs an encoder file defining the augmented "
                             "chain (Q or V parts)" % scheme)
        if scenario.is_psomarc:
            raise ChainError("%s evaluators run on full MARC scenarios" % scheme)
        joint = compose([scenario.sources, *encoders, scenario.channel.law])
        joint = marginalize(joint, _NEC_AXES[scheme] & set(joint.axis_names))
        rep = _NECESSARY[scheme](scenario, joint)
        lines = ["scheme=%s" % scheme] + rep.lines()
        verdict = rep.classify()
        lines.append("classification=%s" % verdict)
        code = EXIT_FEASIBLE if verdict == "satisfied" else EXIT_VIOLATED
        return "\n".join(lines), code
    raise ScenarioParseError("unknown scheme %r" % scheme)


def _search_lines(target, r):
    lines = ["target=%s" % target,
             "best_value=%.12g" % r.best_value,
             "step=%g" % r.step,
             "stages=%s" % r.stages,
             "evaluated=%d" % r.evaluated,
             "feasible=%d" % r.feasible,
             "ties=%d" % r.ties]
    for part in r.argmax_factors():
        lines.append("argmax= " + " ".join("%.6f" % v for v in part))
    return lines


def cmd_search(scenario, target, spec, w3_equals_sources=False):
    if not scenario.is_psomarc:
        raise ChainError("frontier searches are defined for PSOMARC scenarios")
    ch = scenario.channel
    src = marginalize(scenario.sources, {"S1", "S2"})
    if target == "cutset":
        r = cutset_psomarc(ch, spec)
    elif target == "inew":
        r = i_new_psomarc(ch, src, spec, w3_equals_sources=w3_equals_sources)
    elif target == "isuff":
        r = i_suff_psomarc(ch, src, spec)
    else:
        raise ScenarioParseError("unknown search target %r" % target)
    return "\n".join(_search_lines(target, r))


def cmd_paper_regress(quick=False, threads=1, emit=print):
    from .regression import run_battery
    return EXIT_FEASIBLE if run_battery(quick=quick, threads=threads, emit=emit) \
        else EXIT_VIOLATED


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _add_scenario_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scenario", help="scenario file path")
    g.add_argument("--builtin", help="builtin channel+sources pair: "
                                     "table1, tables45, or table7")
    p.add_argument("--c3", type=float, default=None,
                   help="override the bit-pipe capacity")


def build_parser():
    top = _Parser(prog="marcfeas",
                  description="feasibility bounds, frontier searches and "
                              "simulation for relay-aided transmission of "
                              "correlated sources")
    top.add_argument("--threads", type=int, default=1)
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=_Parser)

    p = sub.add_parser("info", help="source statistics of a scenario")
    _add_scenario_args(p)

    p = sub.add_parser("bounds", help="evaluate one condition set")
    _add_scenario_args(p)
    p.add_argument("--scheme", required=True,
                   choices=sorted(_SUFFICIENT) + sorted(_NECESSARY) + ["cutset"])
    p.add_argument("--encoders", help="encoder chain file (default: identity)")

    p = sub.add_parser("search", help="grid-maximize a sum-rate frontier")
    _add_scenario_args(p)
    p.add_argument("--target", required=True, choices=["isuff", "inew", "cutset"])
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--coarse-step", type=float, default=0.05)
    stage = p.add_mutually_exclusive_group()
    stage.add_argument("--two-stage", action="store_const", dest="stages",
                       const="coarse_then_refine")
    stage.add_argument("--single-stage", action="store_const", dest="stages",
                       const="single")
    p.add_argument("--w3-sources", action="store_true",
                   help="relay side information equals the sources (inew only)")

    p = sub.add_parser("simulate", help="run the zero-error block scheme")
    p.add_argument("--channel", required=True, choices=["table1", "table7"])
    p.add_argument("--sources", choices=["table2", "table8"], default=None)
    p.add_argument("-n", type=int, required=True, help="blocklength")
    p.add_argument("-B", type=int, required=True, help="block count")
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("regress", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true")
    return top


def main(argv=None):
    top = build_parser()
    args = top.parse_args(argv)
    try:
        if args.command == "info":
            print(cmd_info(_load_scenario(args)))
            return EXIT_FEASIBLE
        if args.command == "bounds":
            scenario = _load_scenario(args)
            encoders = None
            if args.encoders:
                with open(args.encoders) as fh:
                    encoders = parse_encoders(fh.read(), scenario)
            text, code = cmd_bounds(scenario, args.scheme, encoders)
            print(text)
            return code
        if args.command == "search":
            scenario = _load_scenario(args)
            spec = SearchSpec(step=args.step, stages=args.stages,
                              coarse_step=args.coarse_step,
                              n_threads=args.threads)
            print(cmd_search(scenario, args.target, spec,
                             w3_equals_sources=args.w3_sources))
            return EXIT_FEASIBLE
        if args.command == "simulate":
            from .psomarc_simulator import run_scheme
            from .marc_models import sources_named as named
            defaults = {"table1": "table2", "table7": "table8"}
            src = named(args.sources or defaults[args.channel])
            ch = _builtin_channel(args.channel, None)
            rep = run_scheme(ch, src, args.n, args.B, args.seed,
                             threads=args.threads)
            print("channel=%s" % args.channel)
            print("n=%d" % args.n)
            print("B=%d" % args.B)
            print("seed=%d" % args.seed)
            print("\n".join(rep.lines()))
            return EXIT_FEASIBLE
        if args.command == "regress":
            return cmd_paper_regress(quick=args.quick, threads=args.threads)
    except (ScenarioParseError, TableError, ChainError, BprimeError,
            OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError("unreachable command %r" % args.command)


if __name__ == "__main__":
    sys.exit(main())
