"""Command-line entry point ``fobn``.

Exit status: 0 accept or success, 1 reject, 2 undefined, 64 usage error,
65 parse or format error, 69 resource cap exceeded.

Options that take an event, evidence or structure accept either a file
path or the text itself (``"friends(0,1) = true;"``).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .codec import decode_pair, decode_structure, encode_pair, encode_structure
from .errors import DecodeError, FobnError, ParseError, ResourceLimitError, SpecError
from .grounder import GroundAtom, ground, stats, to_dot
from .inference import (InconsistentEventError, Outcome, conditional_probability,
                        decide_acceptance, event_probability)
from .parsing import format_ground_lines, parse_eso, parse_evidence, parse_structure
from .spec import parse_spec, validate_spec
from .structures import eso_check

EXIT_OK, EXIT_REJECT, EXIT_UNDEFINED = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 64, 65, 69
_OUTCOME_EXIT = {Outcome.ACCEPT: EXIT_OK, Outcome.REJECT: EXIT_REJECT,
                 Outcome.UNDEFINED: EXIT_UNDEFINED}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _text(arg: str) -> str:
    p = Path(arg)
    try:
        if p.is_file():
            return p.read_text()
    except OSError:
        pass
    return arg


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_spec(path: str, check: bool = True):
    spec = parse_spec(_read(path))
    if check:
        report = validate_spec(spec)
        if not report.ok:
            raise SpecError("; ".join(map(str, report.errors)))
    return spec


def _rational(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator} ({float(p):.6f})"


# -- subcommands ----------------------------------------------------------------------------

def cmd_validate(args, out) -> int:
    spec = parse_spec(_read(args.spec))
    report = validate_spec(spec)
    for d in report.diagnostics:
        print(d, file=out)
    if report.ok:
        print("ok", file=out)
        return EXIT_OK
    return EXIT_DATA


def cmd_ground(args, out) -> int:
    spec = _load_spec(args.spec)
    kwargs = {} if args.cap is None else {"cap": args.cap}
    net = ground(spec, args.domain_size, check=False, **kwargs)
    nodes, edges, roots = stats(net)
    dot = to_dot(net)
    if args.dot == "-":
        out.write(dot)
    else:
        if args.dot:
            Path(args.dot).write_text(dot)
        print(f"nodes {nodes}", file=out)
        print(f"edges {edges}", file=out)
        print(f"roots {roots}", file=out)
    return EXIT_OK


def _event(text: str, spec, n: int) -> dict[GroundAtom, bool]:
    _, ev = parse_evidence(_text(text), spec.vocabulary, n)
    return {GroundAtom(p, t): v for (p, t), v in ev.values.items()}


def cmd_prob(args, out) -> int:
    spec = _load_spec(args.spec)
    n = args.domain_size
    target = _event(args.target, spec, n)
    given = _event(args.given, spec, n) if args.given else {}
    net = ground(spec, n, check=False)
    try:
        p = conditional_probability(net, target, given, jobs=args.jobs, cap=args.cap)
    except InconsistentEventError:
        # target contradicts given: zero, unless given itself is impossible
        z = event_probability(net, given, jobs=args.jobs, cap=args.cap)
        p = Fraction(0) if z else None
    if p is None:
        print("undefined", file=out)
        return EXIT_UNDEFINED
    print(_rational(p), file=out)
    return EXIT_OK


def cmd_accept(args, out) -> int:
    spec = _load_spec(args.spec)
    if spec.query is None:
        raise SpecError("the specification declares no query")
    if args.pair is not None:
        n, ev = decode_pair(args.pair.strip(), spec.input_vocabulary)
        if args.domain_size is not None and args.domain_size != n:
            raise UsageError("--domain-size disagrees with the pair header")
    else:
        if args.domain_size is None and args.evidence is None:
            raise UsageError("give --pair, or --domain-size with optional --evidence")
        n, ev = parse_evidence(_text(args.evidence or ""), spec.input_vocabulary,
                               args.domain_size)
        if n is None:
            raise UsageError("no domain size: pass --domain-size or a 'domain N;' line")
    d = decide_acceptance(spec, spec.query, n, ev, jobs=args.jobs, cap=args.cap)
    if d.probability is None:
        print("undefined", file=out)
    else:
        print(f"{d.outcome.value} {_rational(d.probability)}", file=out)
    return _OUTCOME_EXIT[d.outcome]


def cmd_encode(args, out) -> int:
    vocab = parse_spec(_read(args.vocab)).input_vocabulary
    text = _text(args.input)
    if args.kind == "structure":
        print(encode_structure(parse_structure(text, vocab)), file=out)
    else:
        n, ev = parse_evidence(text, vocab, args.domain_size)
        if n is None:
            raise UsageError("pair encoding needs a domain size")
        print(encode_pair(n, ev, vocab), file=out)
    return EXIT_OK


def cmd_decode(args, out) -> int:
    vocab = parse_spec(_read(args.vocab)).input_vocabulary
    bits = args.bits.strip()
    if args.kind == "structure":
        st = decode_structure(bits, vocab)
        values = {(p, t): True for p, rel in st.relations.items() for t in rel}
        out.write(format_ground_lines(st.n, values, vocab))
    else:
        n, ev = decode_pair(bits, vocab)
        out.write(format_ground_lines(n, ev.values, vocab))
    return EXIT_OK


def cmd_eso_check(args, out) -> int:
    vocab, sentence = parse_eso(_read(args.sentence))
    structure = parse_structure(_text(args.structure), vocab)
    kwargs = {} if args.cap is None else {"cap": args.cap}
    ok = eso_check(sentence, structure, **kwargs)
    print("true" if ok else "false", file=out)
    return EXIT_OK if ok else EXIT_REJECT


def _machine(arg: str):
    from .capture import bundled_machine, bundled_machines, parse_machine
    if Path(arg).is_file():
        return parse_machine(Path(arg).read_text())
    if arg in bundled_machines():
        return bundled_machine(arg)
    raise UsageError(f"no machine file {arg!r} and no bundled machine of that name "
                     f"(bundled: {', '.join(bundled_machines())})")


def cmd_capture_count(args, out) -> int:
    from .capture import count_paths, majority_decision, normalize_machine
    bits = args.input.strip()
    n = args.domain_size
    if n is None:
        n = bits.find("1")
        if n < 1:
            raise UsageError("cannot read a domain size from the input; pass --domain-size")
    kwargs = {} if args.cap is None else {"cap": args.cap}
    count = count_paths(normalize_machine(_machine(args.machine)), n, bits, kp=args.kp,
                        mode=args.boundary, **kwargs)
    decision = majority_decision(count)
    print(f"{decision.value} {count.accepting}/{count.total} ({float(count.ratio):.6f})", file=out)
    return _OUTCOME_EXIT[decision]


def cmd_capture_compile(args, out) -> int:
    from .capture import compile_machine, normalize_machine
    from .spec import spec_to_text
    vocab = parse_spec(_read(args.vocab)).input_vocabulary
    compiled = compile_machine(normalize_machine(_machine(args.machine)), vocab,
                               sizes=range(1, args.max_n + 1), mode=args.boundary)
    text = spec_to_text(compiled.spec)
    if args.output:
        Path(args.output).write_text(text)
        print(f"kt {compiled.layout.kt}", file=out)
        print(f"kp {compiled.layout.kp}", file=out)
        for n in compiled.layout.sizes:
            print(f"roots at n={n}: {compiled.layout.root_count(n)}", file=out)
    else:
        out.write(text)
    return EXIT_OK


def cmd_capture_verify(args, out) -> int:
    from .capture import verify_capture
    vocab = parse_spec(_read(args.vocab)).input_vocabulary
    cross = tuple(args.cross_check_sizes) if args.cross_check else ()
    report = verify_capture(_machine(args.machine), vocab, args.max_n, mode=args.boundary,
                            cross_check=cross, jobs=args.jobs)
    print(report.summary(), file=out)
    return EXIT_OK if report.ok else EXIT_REJECT


# -- wiring --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fobn", description="First-order Bayesian network specifications.")
    p.add_argument("--version", action="version", version=f"fobn {__version__}")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for inference")
    p.add_argument("--cap", type=int, default=None, help="override the resource guard")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="report diagnostics for a specification")
    s.add_argument("spec")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("ground", help="ground a specification over a finite domain")
    s.add_argument("spec")
    s.add_argument("--domain-size", "-n", type=int, required=True)
    s.add_argument("--dot", help="write Graphviz output to this file ('-' for stdout)")
    s.set_defaults(func=cmd_ground)

    s = sub.add_parser("prob", help="exact P(target | given)")
    s.add_argument("spec")
    s.add_argument("--domain-size", "-n", type=int, required=True)
    s.add_argument("--target", required=True, help="event file or text")
    s.add_argument("--given", help="event file or text")
    s.set_defaults(func=cmd_prob)

    s = sub.add_parser("accept", help="decide the specification's query on a pair")
    s.add_argument("spec")
    s.add_argument("--pair", help="pair encoding as a bit string")
    s.add_argument("--evidence", help="evidence file or text")
    s.add_argument("--domain-size", "-n", type=int)
    s.set_defaults(func=cmd_accept)

    for name, func in (("encode", cmd_encode), ("decode", cmd_decode)):
        s = sub.add_parser(name, help=f"{name} structures or pairs as bit strings")
        s.add_argument("--kind", choices=("structure", "pair"), default="structure")
        s.add_argument("--vocab", required=True, help="specification whose input vocabulary to use")
        if name == "encode":
            s.add_argument("input", help="structure or evidence file or text")
            s.add_argument("--domain-size", "-n", type=int)
        else:
            s.add_argument("bits")
        s.set_defaults(func=func)

    s = sub.add_parser("eso-check", help="model-check an existential second-order sentence")
    s.add_argument("sentence")
    s.add_argument("structure")
    s.set_defaults(func=cmd_eso_check)

    cap = sub.add_parser("capture", help="nondeterministic machines and their compilation")
    csub = cap.add_subparsers(dest="capture_command", required=True, parser_class=_Parser)
    boundary = {"choices": ("reject", "clamp"), "default": "reject",
                "help": "what a move off the tape does"}

    s = csub.add_parser("count", help="count accepting computation paths")
    s.add_argument("machine", help="machine file or bundled machine name")
    s.add_argument("--input", required=True)
    s.add_argument("--domain-size", "-n", type=int)
    s.add_argument("--kp", type=int)
    s.add_argument("--boundary", **boundary)
    s.set_defaults(func=cmd_capture_count)

    s = csub.add_parser("compile", help="print the compiled specification")
    s.add_argument("machine")
    s.add_argument("--vocab", required=True)
    s.add_argument("--max-n", type=int, default=2)
    s.add_argument("--output", "-o")
    s.add_argument("--boundary", **boundary)
    s.set_defaults(func=cmd_capture_compile)

    s = csub.add_parser("verify", help="compare machine and compiled decisions on all pairs")
    s.add_argument("machine")
    s.add_argument("--vocab", required=True)
    s.add_argument("--max-n", type=int, default=2)
    s.add_argument("--cross-check", action="store_true",
                   help="also solve the grounded compiled spec with the generic engine")
    s.add_argument("--cross-check-sizes", type=int, nargs="+", default=[1, 2])
    s.add_argument("--boundary", **boundary)
    s.set_defaults(func=cmd_capture_verify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ParseError, SpecError, DecodeError, FobnError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
