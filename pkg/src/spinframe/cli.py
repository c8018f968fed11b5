"""Command-line front end.

Every subcommand writes one JSON document (to ``--out`` or stdout) that
embeds a run manifest. Exit codes: 0 success, 1 invariant or acceptance
failure, 2 usage or input error. ``--config FILE`` supplies flag values
from a JSON object; flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import SpinState, parse_state, reduce, state_to_dict
from .equivalence import (
    MicroMacroConfig,
    micro_state,
    micromacro_table,
    search_state_with_signature,
)
from .errors import InvalidInputError, MalformedDocumentError, SpinframeError
from .fidelity import CONVENTIONS, SQRT, bloch_vector, relative_angle
from .game import GameConfig, postulate1_check, run_game
from .reports import dumps, manifest, validate
from .signature import PairFamily, parse_signature, signature
from .symmetry import CONTROL_TOL, falsification_experiment

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _bool(text):
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("true", "1", "yes", "y"):
        return True
    if v in ("false", "0", "no", "n"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _spec(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(i) for i in text)
    try:
        return tuple(int(i) for i in str(text).split(",") if i.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated spin indices, got {text!r}") from None


def _int_list(text):
    return list(_spec(text))


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON object supplying values for this subcommand's flags")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for parallel sections")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock duration in the manifest (output is then not byte-stable)")


def _family_flags(p: argparse.ArgumentParser, default_mode="single"):
    p.add_argument("--family", choices=["single", "subsets", "tuples"], default=default_mode)
    p.add_argument("--k", type=int, default=1, help="subsystem size for subsets/tuples")
    p.add_argument("--overlap", type=_bool, default=True, help="allow overlapping subsystems (true/false)")
    p.add_argument("--cap", type=int, default=20_000, help="maximum number of enumerated pairs")
    p.add_argument("--convention", choices=list(CONVENTIONS), default=SQRT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinframe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"spinframe {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    parser.subcommands = sub.choices

    p = sub.add_parser("signature", help="fidelity signature of a state file")
    _common(p)
    p.add_argument("--state", help="state file (JSON)")
    _family_flags(p)

    p = sub.add_parser("verify-theorem1", help="collective-invariance controls and Haar falsification")
    _common(p)
    p.add_argument("--n", type=int, help="number of spins")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="report file (alias for --out)")
    p.add_argument("--threshold", type=float, default=1e-3)
    p.add_argument("--max-spins", type=int, default=None, help="raise the dense cap (at most 14)")
    _family_flags(p)

    p = sub.add_parser("micromacro", help="per-pair fidelity table for the micro/macro states")
    _common(p)
    p.add_argument("--m", type=int, default=4, help="total number of spins M")
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--beta", type=float, default=None, help="default sqrt(1 - alpha^2)")
    p.add_argument("--k", type=_int_list, default=[1, 2], help="ordered-tuple sizes, e.g. 1,2")
    p.add_argument("--overlap", type=_bool, default=True)
    p.add_argument("--convention", choices=[*CONVENTIONS, "both"], default="both")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--csv", help="also write the table as CSV")

    p = sub.add_parser("search", help="search for a state with a given signature")
    _common(p)
    p.add_argument("--target", help="target signature file")
    p.add_argument("--micro-m", type=int, help="use signature(micro_state(M, alpha)) as target")
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-iters", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stop-residual", type=float, default=None)
    p.add_argument("--state-out", help="also write the best state as a state file")
    _family_flags(p)

    p = sub.add_parser("game", help="three-phase discrimination game across labs")
    _common(p)
    p.add_argument("--state", help="global state file (or inline object via --config)")
    p.add_argument("--spec-a", type=_spec, help="subsystem A, e.g. 1")
    p.add_argument("--spec-b", type=_spec, help="subsystem B, e.g. 3")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--labs", default="identity",
                   help="comma-separated lab kinds (identity, haar_collective, haar_global) "
                        "or a list of lab objects via --config")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bloch", help="Bloch vectors and relative angles of every spin")
    _common(p)
    p.add_argument("--state", help="state file (JSON)")
    return parser


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)
    subparser = parser.subcommands[args.command]
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            subparser.error(f"cannot read --config: {exc}")
        if not isinstance(cfg, dict):
            subparser.error("--config must contain a JSON object")
        known = {a.dest for a in subparser._actions}
        unknown = sorted(k.replace("-", "_") for k in cfg if k.replace("-", "_") not in known)
        if unknown:
            subparser.error(f"unknown keys in --config: {', '.join(unknown)}")
        subparser.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    return parser, subparser, args


def _params(args) -> dict:
    skip = {"command", "config", "timing"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def _family(args) -> PairFamily:
    return PairFamily(args.family, args.k if args.family != "single" else 1, args.overlap, args.cap)


def _read_state(path) -> SpinState:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidInputError(f"cannot read state file: {exc}") from None
    return parse_state(data)


def _emit(doc: dict, path) -> None:
    text = dumps(validate(doc))
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------


def cmd_signature(args, sub) -> tuple[dict, int]:
    if not args.state:
        sub.error("--state is required")
    s = _read_state(args.state)
    sig = signature(s, _family(args), args.convention, workers=args.threads)
    bad = [v for v in sig.entries.values() if not 0.0 <= v <= 1.0 + 1e-12]
    doc = {"kind": "signature", **sig.to_dict()}
    return doc, EXIT_FAIL if bad else EXIT_OK


def cmd_verify_theorem1(args, sub) -> tuple[dict, int]:
    if args.n is None:
        sub.error("--n is required")
    if args.trials < 1:
        sub.error("--trials must be >= 1")
    args.out = args.out or args.report
    rep = falsification_experiment(
        args.n, args.trials, _family(args), args.seed, args.convention, args.threshold,
        workers=args.threads, max_spins=args.max_spins,
    )
    doc = {"kind": "theorem1", **rep.to_dict()}
    doc["summary"]["control_tolerance"] = CONTROL_TOL
    return doc, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_micromacro(args, sub) -> tuple[dict, int]:
    cfg = MicroMacroConfig(args.m, args.alpha, args.beta)
    conventions = list(CONVENTIONS) if args.convention == "both" else [args.convention]
    rows = []
    for k in args.k:
        family = PairFamily.ordered_tuples(k, args.overlap)
        for conv in conventions:
            rows.extend(micromacro_table(cfg, family, conv, args.tol))
    summary = {}
    for r in rows:
        key = f"{r['convention']}/{r['row']}"
        entry = summary.setdefault(key, {"pairs": 0, "matched": 0, "flagged": 0})
        entry["pairs"] += 1
        entry["matched" if r["match"] else "flagged"] += 1
    doc = {
        "kind": "micromacro",
        "config": {"M": cfg.M, "alpha": [cfg.alpha.real, cfg.alpha.imag], "beta": [cfg.beta.real, cfg.beta.imag]},
        "rows": rows,
        "summary": summary,
    }
    print(_summary_table(summary), file=sys.stderr)
    if args.csv:
        Path(args.csv).write_text(_rows_csv(rows))
    return doc, EXIT_OK


def _summary_table(summary) -> str:
    lines = [f"{'convention/row':<28}{'pairs':>7}{'matched':>9}{'flagged':>9}"]
    for key, e in sorted(summary.items()):
        lines.append(f"{key:<28}{e['pairs']:>7}{e['matched']:>9}{e['flagged']:>9}")
    return "\n".join(lines)


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "row", "convention", "value_phi", "value_phi_prime", "expected", "match"])
    for r in rows:
        a, b = r["pair"]
        w.writerow([" ".join(map(str, a)), " ".join(map(str, b)), r["row"], r["convention"],
                    repr(r["value_phi"]), repr(r["value_phi_prime"]), repr(r["expected"]), r["match"]])
    return buf.getvalue()


def cmd_search(args, sub) -> tuple[dict, int]:
    if args.target:
        try:
            target = parse_signature(Path(args.target).read_bytes())
        except OSError as exc:
            raise InvalidInputError(f"cannot read target: {exc}") from None
    elif args.micro_m:
        state = micro_state(MicroMacroConfig(args.micro_m, args.alpha))
        target = signature(state, _family(args), args.convention)
    else:
        sub.error("one of --target or --micro-m is required")
    res = search_state_with_signature(
        target, restarts=args.restarts, max_iters=args.max_iters, seed=args.seed,
        stop_residual=args.stop_residual, workers=args.threads,
    )
    if args.state_out:
        Path(args.state_out).write_text(json.dumps(state_to_dict(res.state)) + "\n")
    doc = {"kind": "search", "target": target.to_dict(), **res.to_dict()}
    return doc, EXIT_OK


def _game_config(args, sub) -> GameConfig:
    if args.state is None or args.spec_a is None or args.spec_b is None:
        sub.error("--state, --spec-a and --spec-b are required")
    state = args.state
    if isinstance(state, dict):
        state_doc = state
    else:
        try:
            state_doc = json.loads(_read_bytes(state))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise MalformedDocumentError(f"state file is not valid JSON: {exc}") from None
    labs = args.labs
    if isinstance(labs, str):
        labs = [{"kind": k.strip(), "name": f"{k.strip()}{i}"} for i, k in enumerate(labs.split(",")) if k.strip()]
    doc = {
        "state": state_doc, "spec_a": list(args.spec_a), "spec_b": list(args.spec_b),
        "p": args.p, "labs": labs, "trials": args.trials, "seed": args.seed,
    }
    return GameConfig.from_dict(doc)


def _read_bytes(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None


def cmd_game(args, sub) -> tuple[dict, int]:
    cfg = _game_config(args, sub)
    reports = run_game(cfg)
    check = postulate1_check(cfg)
    doc = {
        "kind": "game",
        "config": cfg.to_dict(),
        "labs": [r.to_dict() for r in reports],
        "postulate1": check,
    }
    failed = check["all_collective"] and not check["pass"]
    return doc, EXIT_FAIL if failed else EXIT_OK


def cmd_bloch(args, sub) -> tuple[dict, int]:
    if not args.state:
        sub.error("--state is required")
    s = _read_state(args.state)
    vecs = [bloch_vector(reduce(s, (i,))) for i in range(1, s.num_spins + 1)]
    spins = [{"spin": i + 1, "bloch": [float(x) for x in v], "norm": float(np.linalg.norm(v))}
             for i, v in enumerate(vecs)]
    angles = []
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            try:
                theta = relative_angle(vecs[i], vecs[j])
            except InvalidInputError:
                theta = None
            angles.append({"a": i + 1, "b": j + 1, "angle": theta})
    bad = any(e["norm"] > 1 + 1e-10 for e in spins)
    doc = {"kind": "bloch", "state": state_to_dict(s), "spins": spins, "angles": angles}
    return doc, EXIT_FAIL if bad else EXIT_OK


COMMANDS = {
    "signature": cmd_signature,
    "verify-theorem1": cmd_verify_theorem1,
    "micromacro": cmd_micromacro,
    "search": cmd_search,
    "game": cmd_game,
    "bloch": cmd_bloch,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _, sub, args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        doc, code = COMMANDS[args.command](args, sub)
    except SystemExit as exc:
        return int(exc.code or 0)
    except InvalidInputError as exc:
        print(f"spinframe {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpinframeError as exc:
        print(f"spinframe {args.command}: invariant violation: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Exception as exc:  # never abort with a traceback on user input
        print(f"spinframe {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    seed = getattr(args, "seed", None)
    duration = round(time.perf_counter() - start, 6) if args.timing else None
    doc["manifest"] = manifest(args.command, _params(args), seed, __version__, duration)
    try:
        _emit(doc, args.out)
    except OSError as exc:
        print(f"spinframe {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
