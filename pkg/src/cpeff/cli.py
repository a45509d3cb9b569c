"""Command-line entry point: ``cpeff {idealized,verify,eval}``.

Exit status: 0 success, 1 a verification check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path

from .core import format_number, load_joint, load_scores, validate_joint
from .criteria import SPhi, as_criterion, evaluate_empirical, evaluate_idealized
from .errors import CPEffError, InsufficientNeighbors, ParseError
from .idealized import (
    LABEL_CONDITIONAL,
    UNCONDITIONAL,
    IdealizedTransducer,
    cp_measure,
    mcp_measures,
    msp_measure,
    sp_measures,
)
from .knn import VARIANTS, load_usps, normalize_rows
from .oracle import COUNTEREXAMPLES, random_joint, verify_counterexample, verify_theorem
from .transducer import KnnSweep, draw_tau


class InputError(Exception):
    """Bad command-line input; maps to exit status 2."""


def _split(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _criteria(text: str | None, default: str) -> list:
    names = _split(text) or _split(default)
    out = []
    for name in names:
        try:
            out.append(as_criterion(name))
        except ValueError:
            raise InputError(f"unknown criterion {name!r}") from None
    return out


def _epsilons(text: str | None, rational: bool) -> list:
    out = []
    for tok in _split(text):
        try:
            e = Fraction(tok) if rational else float(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"bad significance level {tok!r}") from None
        if not 0 < e < 1:
            raise InputError(f"significance level {tok} outside (0, 1)")
        out.append(e)
    return out


def _writer(rows: list[list[str]], header: list[str], out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if out:
        Path(out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())


def _fmt(v) -> str:
    return "" if v is None else format_number(v)


# ----------------------------------------------------------------- idealized


def _measures(spec: str, Q, rational: bool):
    out = []
    for name in _split(spec) or ["cp"]:
        low = name.lower()
        if low == "cp":
            out.append(("cp", cp_measure(Q)))
        elif low in ("sp", "mcp"):
            tables = sp_measures(Q) if low == "sp" else mcp_measures(Q)
            if len(tables) == 1:
                out.append((low, tables[0]))
            else:
                out.extend((f"{low}#{i}", t) for i, t in enumerate(tables))
        elif low == "msp":
            out.append(("msp", msp_measure(Q)))
        else:
            out.append((name, load_scores(name, rational, shape=Q.shape)))
    return out


def cmd_idealized(args) -> int:
    Q = load_joint(args.q, rational=args.rational)
    mode = LABEL_CONDITIONAL if args.label_conditional else UNCONDITIONAL
    validate_joint(Q, label_conditional=args.label_conditional)
    criteria = _criteria(args.criterion, "S")
    epsilons = _epsilons(args.epsilon, args.rational)
    rows = []
    for name, table in _measures(args.measure, Q, args.rational):
        if table.shape != Q.shape:
            raise InputError(f"measure {name} has shape {table.shape}, Q has {Q.shape}")
        t = IdealizedTransducer(Q, table, mode, validate=False)
        for c in criteria:
            if c.needs_epsilon and not epsilons:
                raise InputError(f"criterion {c.value} needs --epsilon")
            for e in (epsilons if c.needs_epsilon else [None]):
                v = evaluate_idealized(t, c, e)
                rows.append([name, c.value, _fmt(e), _fmt(v.primary), _fmt(v.secondary), mode])
    _writer(rows, ["measure", "criterion", "epsilon", "primary", "secondary", "mode"], args.out)
    return 0


# ----------------------------------------------------------------- verify


def _parse_size(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        shape = int(a), int(b)
    except ValueError:
        raise InputError(f"--size must look like 3x2, got {text!r}") from None
    if min(shape) < 1:
        raise InputError("--size entries must be positive")
    return shape


def _theorem_line(Q, theorem, source, tight_msp=False) -> tuple[str, bool]:
    try:
        r = verify_theorem(Q, theorem, source, tight_msp=tight_msp)
    except CPEffError as exc:
        return f"T{theorem},{source},error,{exc}", False
    return r.to_line(), r.passed


def cmd_verify(args) -> int:
    lines, ok = [], True
    if args.paper_examples:
        for ex in COUNTEREXAMPLES:
            r = verify_counterexample(ex)
            lines.append(r.to_line())
            ok &= r.passed
    if args.q:
        if args.theorem is None:
            raise InputError("--q needs --theorem")
        Q = load_joint(args.q, rational=True)
        line, passed = _theorem_line(Q, args.theorem, args.q, args.tight_msp)
        lines.append(line)
        ok &= passed
    if args.random_q:
        if args.theorem is None or args.size is None:
            raise InputError("--random-q needs --size and --theorem")
        shape = _parse_size(args.size)
        for k in range(args.random_q):
            Q = random_joint(args.seed * 100_003 + k, shape, distinct_binary=(args.theorem == 6))
            line, passed = _theorem_line(Q, args.theorem, f"random{k}", args.tight_msp)
            lines.append(line)
            ok &= passed
    if not lines:
        raise InputError("nothing to verify: give --paper-examples, --q or --random-q")
    text = "\n".join(["theorem,Q-file,status,detail"] + lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


# ----------------------------------------------------------------- eval


def cmd_eval(args) -> int:
    if not (args.train and args.test):
        raise InputError("eval needs --train and --test")
    train_X, train_y = load_usps(args.train, dim=None)
    test_X, test_y = load_usps(args.test, dim=None)
    if train_X.shape[1] != test_X.shape[1]:
        raise InputError("training and test objects differ in dimension")
    if args.normalize:
        train_X, test_X = normalize_rows(train_X), normalize_rows(test_X)
    n_labels = int(max(train_y.max(), test_y.max())) + 1
    variants = _split(args.variant) or ["cp"]
    for v in variants:
        if v not in VARIANTS:
            raise InputError(f"unknown variant {v!r}")
    criteria = _criteria(args.criterion, "U,OF")
    if any(isinstance(c, SPhi) for c in criteria):
        raise InputError("S_PHI is an idealised-only criterion")
    epsilons = _epsilons(args.epsilon, rational=False)
    if any(c.needs_epsilon for c in criteria) and not epsilons:
        raise InputError("an epsilon-dependent criterion needs --epsilon")
    if args.k_min < 1 or args.k_max < args.k_min:
        raise InputError("need 1 <= --k-min <= --k-max")
    sweep = KnnSweep(train_X, train_y, test_X, n_labels, args.seed)
    tau = draw_tau(args.seed, len(test_X), n_labels)
    rows = []
    for v in variants:
        for K in range(args.k_min, args.k_max + 1):
            try:
                p = sweep.pvalues(v, K, tau, args.label_conditional)
            except (InsufficientNeighbors, ValueError) as exc:
                rows.append([v, str(K), "", "", "skipped", str(exc)])
                continue
            for c in criteria:
                for e in (epsilons if c.needs_epsilon else [None]):
                    val = evaluate_empirical(c, p, test_y, e)
                    rows.append([v, str(K), c.value, _fmt(e), _fmt(val.primary), _fmt(val.secondary)])
    _writer(rows, ["variant", "K", "criterion", "epsilon", "primary", "secondary"], args.out)
    return 0


# ----------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpeff", description="Efficiency criteria for conformal prediction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("idealized", help="exact criteria for a known finite distribution")
    p.add_argument("--q", required=True, help="distribution file (x_id,y_id,prob)")
    p.add_argument("--measure", default="cp", help="comma list of cp, sp, mcp, msp or score files")
    p.add_argument("--criterion", help="comma list of criteria (default S); S_PHI is S with identity phi")
    p.add_argument("--epsilon", help="comma list of significance levels")
    p.add_argument("--label-conditional", action="store_true")
    p.add_argument("--rational", action="store_true", help="exact rational arithmetic")
    p.add_argument("--out")
    p.set_defaults(func=cmd_idealized)

    p = sub.add_parser("verify", help="brute-force theorem and example checks")
    p.add_argument("--paper-examples", action="store_true", help="run the built-in worked counterexamples")
    p.add_argument("--q", help="distribution file for --theorem")
    p.add_argument("--theorem", type=int, choices=range(1, 7))
    p.add_argument("--random-q", type=int, default=0, metavar="N")
    p.add_argument("--size", help="AxB: objects x labels for --random-q")
    p.add_argument("--tight-msp", action="store_true", help="boundary-corrected OU/OM class for theorem 4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="KNN conformal predictors on a train/test split")
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--variant", default="cp", help=f"comma list of {', '.join(VARIANTS)}")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=20)
    p.add_argument("--criterion", help="comma list of criteria (default U,OF)")
    p.add_argument("--epsilon", help="comma list of significance levels")
    p.add_argument("--label-conditional", action="store_true")
    p.add_argument("--normalize", action="store_true", help="per-object mean 0, std 1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (InputError, ParseError, OSError, CPEffError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
