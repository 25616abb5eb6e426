"""``qstatics`` command line.

Exit codes: 0 ran and passed, 1 ran and a verdict failed, 2 could not run
(usage error, malformed input, violated precondition).
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from ._exact import QStaticsError, fraction_to_json, to_fraction
from .ensemble import (
    BraceMixture,
    ClickSpec,
    EnsembleBrace,
    extract_stats,
    ingest_clicks,
    mix_braces,
    read_clicks_jsonl,
    simulate_clicks,
    write_clicks_jsonl,
)
from .experiments import convergence_study, hadamard_change, two_slit_demo
from .numeric import PairNumber, ansatz_search, ordinal_encode, render_ordinal, verify_field_axioms
from .statespace import (
    InstrumentRep,
    MixtureState,
    Session,
    StateVector,
    measure,
    measure_mixture,
    verify_lvs_axioms,
)

EXIT_OK, EXIT_VERDICT_FAIL, EXIT_USAGE = 0, 1, 2

SUBCOMMANDS = (
    "simulate",
    "ingest",
    "extract",
    "algebra-verify",
    "ansatz-search",
    "lvs-verify",
    "measure",
    "mix",
    "interfere",
    "converge",
    "ordinal",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _rationals(text: str) -> list[Fraction]:
    return [to_fraction(x) for x in text.split(",") if x.strip()]


def _pairs(text: str) -> list[PairNumber]:
    """``"1,0;0,1"`` -> [(1,0), (0,1)]; a bare ``"1"`` is (1,0)."""
    out = []
    for chunk in text.split(";"):
        parts = [p for p in chunk.split(",") if p.strip()]
        if len(parts) == 1:
            parts.append("0")
        if len(parts) != 2:
            raise QStaticsError(f"cannot read pair number from {chunk!r}", "pair-syntax")
        out.append(PairNumber(to_fraction(parts[0]), to_fraction(parts[1])))
    return out


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise QStaticsError(f"{path}: invalid JSON ({exc.msg})", "json-syntax") from None


def _session(args) -> Session | None:
    if not args.session:
        return None
    return Session.from_json(_load_json(args.session))


def _seed(args, session: Session | None) -> int:
    if args.seed is not None:
        return args.seed
    return session.default_seed if session is not None else 0


def _instrument(args, session: Session | None, arity: int | None = None) -> InstrumentRep:
    if session is not None:
        return session.instrument(args.instrument)
    if arity is None:
        raise QStaticsError("an instrument needs --session (or an inferable arity)", "known-instrument")
    return InstrumentRep.default(args.instrument, arity)


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def _scalar(v) -> str | None:
    if isinstance(v, dict) and set(v) == {"num", "den"}:
        return v["num"] if v["den"] == "1" else f"{v['num']}/{v['den']}"
    if isinstance(v, (dict, list)):
        return None
    return str(v)


def _text_table(obj, indent: int = 0) -> list[str]:
    """Indented key/value rendering of a JSON payload."""
    pad = " " * indent
    items = obj.items() if isinstance(obj, dict) else ((f"[{i}]", v) for i, v in enumerate(obj))
    lines = []
    for k, v in items:
        s = _scalar(v)
        if s is None and isinstance(v, list) and all(_scalar(x) is not None for x in v):
            s = "[" + ", ".join(_scalar(x) for x in v) + "]"
        if s is not None:
            lines.append(f"{pad}{k}: {s}")
        else:
            lines.append(f"{pad}{k}:")
            lines += _text_table(v, indent + 2)
    return lines


# --------------------------------------------------------------------------
# subcommands; each returns (payload, passed, text-or-None)


def cmd_simulate(args):
    spec = ClickSpec(tuple(_rationals(args.nu)), args.sigma, args.instrument)
    stream = simulate_clicks(spec, _seed(args, _session(args)), chunks=args.chunks)
    buf = io.StringIO()
    write_clicks_jsonl(stream, buf)
    return None, True, buf.getvalue()


def cmd_ingest(args):
    session = _session(args)
    stream = read_clicks_jsonl(sys.stdin if args.clicks == "-" else args.clicks)
    kappa = _rationals(args.kappa) if args.kappa else None
    arity = None
    if session is None:
        outcomes = [r.outcome_index for r in stream]
        arity = args.outcomes or (len(kappa) if kappa else max(2, max(outcomes, default=0) + 1))
    instrument = _instrument(args, session, arity)
    if kappa is None:
        kappa = [Fraction(1, 2)] * instrument.dimension
    brace = ingest_clicks(stream, instrument, kappa)
    return brace.to_json(), True, None


def cmd_extract(args):
    brace = EnsembleBrace.from_json(_load_json(args.brace))
    return extract_stats(brace).to_json(), True, None


def cmd_algebra_verify(args):
    report = verify_field_axioms(args.trials, _seed(args, _session(args)))
    return report.to_json(), report.passed, None


def cmd_ansatz_search(args):
    report = ansatz_search(args.trials, _seed(args, _session(args)), n_jobs=args.jobs)
    return report.to_json(), report.passed, None


def cmd_lvs_verify(args):
    session = _session(args)
    dim = args.dimension or (session.dimension if session else 2)
    report = verify_lvs_axioms(_seed(args, session), args.trials, dim)
    return report.to_json(), report.passed, None


def cmd_measure(args):
    session = _session(args)
    state = StateVector.from_json(_load_json(args.state))
    instrument = _instrument(args, session, state.dimension)
    return measure(state, instrument, session).to_json(), True, None


def cmd_mix(args):
    session = _session(args)
    doc = _load_json(args.mixture)
    comps = doc.get("components") if isinstance(doc, dict) else None
    if not comps:
        raise QStaticsError("mixture document needs a non-empty 'components' list", "mixture-schema")
    if all("brace" in c for c in comps):
        m = BraceMixture(tuple((EnsembleBrace.from_json(c["brace"]), to_fraction(c["weight"])) for c in comps))
        nu = mix_braces(m)
        payload = {
            "kind": "mixture_statistics",
            "outcome_symbols": list(m.outcome_symbols),
            "nu": [fraction_to_json(x) for x in nu],
        }
        return payload, True, None
    if all("state" in c for c in comps):
        m = MixtureState(tuple((StateVector.from_json(c["state"]), to_fraction(c["weight"])) for c in comps))
        instrument = _instrument(args, session, m.components[0][0].dimension)
        return measure_mixture(m, instrument, session).to_json(), True, None
    raise QStaticsError("components must all be braces or all be states", "mixture-schema")


def cmd_interfere(args):
    session = _session(args)
    if args.change:
        if session is None:
            raise QStaticsError("--change needs --session", "known-basis-change")
        src, _, dst = args.change.partition(":")
        u = session.change(src, dst)
        if u is None:
            raise QStaticsError(f"no registered basis change {src}->{dst}", "known-basis-change")
    else:
        u = hadamard_change()
    report = two_slit_demo(u, _pairs(args.coeffs), session)
    return report.to_json(), report.passed, report.to_text() + "\n"


def cmd_converge(args):
    schedule = [int(x) for x in args.schedule.split(",") if x.strip()]
    kappa = _rationals(args.kappa) if args.kappa else None
    report = convergence_study(_rationals(args.nu), schedule, _seed(args, _session(args)), kappa)
    return report.to_json(), report.passed, report.to_text() + "\n"


def cmd_ordinal(args):
    x = ordinal_encode(args.n)
    rendering = render_ordinal(x)
    payload = {"kind": "ordinal", "n": args.n, "cardinality": len(x), "rendering": rendering}
    return payload, True, rendering + "\n"


COMMANDS = {
    "simulate": cmd_simulate,
    "ingest": cmd_ingest,
    "extract": cmd_extract,
    "algebra-verify": cmd_algebra_verify,
    "ansatz-search": cmd_ansatz_search,
    "lvs-verify": cmd_lvs_verify,
    "measure": cmd_measure,
    "mix": cmd_mix,
    "interfere": cmd_interfere,
    "converge": cmd_converge,
    "ordinal": cmd_ordinal,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: session seed or 0)")
    common.add_argument("--session", help="session JSON: dimension, instruments, basis changes")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default=None)

    parser = _Parser(prog="qstatics", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="generate a click stream (JSON Lines)")
    p.add_argument("--nu", required=True, help="comma-separated outcome probabilities, e.g. 0.3,0.7")
    p.add_argument("--sigma", type=int, required=True, help="number of clicks")
    p.add_argument("--instrument", default="A")
    p.add_argument("--chunks", type=int, default=1, help="independent seeded substreams")

    p = sub.add_parser("ingest", parents=[common], help="build a brace from a click stream")
    p.add_argument("--clicks", required=True, help="JSON Lines file, or - for stdin")
    p.add_argument("--instrument", default="A")
    p.add_argument("--kappa", help="comma-separated per-outcome split (default 1/2 each)")
    p.add_argument("--outcomes", type=int, help="instrument arity when no session is given")

    p = sub.add_parser("extract", parents=[common], help="nu/kappa statistics of a brace")
    p.add_argument("--brace", required=True)

    p = sub.add_parser("algebra-verify", parents=[common], help="field axioms of pair numbers")
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("ansatz-search", parents=[common], help="eliminate the 16 sign candidates")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("lvs-verify", parents=[common], help="linear-vector-space axioms")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--dimension", type=int)

    p = sub.add_parser("measure", parents=[common], help="statistics of a state on an instrument")
    p.add_argument("--state", required=True)
    p.add_argument("--instrument", required=True)

    p = sub.add_parser("mix", parents=[common], help="statistics of a mixture of braces or states")
    p.add_argument("--mixture", required=True)
    p.add_argument("--instrument", default="A")

    p = sub.add_parser("interfere", parents=[common], help="two-slit interference demo")
    p.add_argument("--coeffs", default="1,0;1,0", help="slit amplitudes as 'n,m;n,m'")
    p.add_argument("--change", help="registered basis change 'from:to' (default: Hadamard rows)")

    p = sub.add_parser("converge", parents=[common], help="simulate/extract convergence study")
    p.add_argument("--nu", required=True)
    p.add_argument("--schedule", default="100,1000,10000,100000,1000000")
    p.add_argument("--kappa")

    p = sub.add_parser("ordinal", parents=[common], help="von Neumann ordinal encoding")
    p.add_argument("n", type=int)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"qstatics: error: [usage] {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        payload, passed, text = COMMANDS[args.command](args)
    except QStaticsError as exc:
        print(f"qstatics: error: [{exc.invariant}] {exc}", file=stderr)
        return EXIT_USAGE
    except (OSError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        print(f"qstatics: error: [input] {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_USAGE

    fmt = args.format or ("text" if args.command == "ordinal" else "json")
    if payload is None or fmt == "text" and text is not None:
        out = text
    elif fmt == "text":
        out = "\n".join(_text_table(payload)) + "\n"
    else:
        out = _dump(payload)

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        stdout.write(out)
    return EXIT_OK if passed else EXIT_VERDICT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
