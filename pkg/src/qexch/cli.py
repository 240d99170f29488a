"""Command-line front end.

Exit codes: 0 success or pass, 1 well-formed input whose condition fails,
2 usage or data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from qexch.codes import BUILTIN_CODES, Code, CodeFormatError, builtin_code, resolve_code
from qexch.errors import apply_error, error_set_from_ops, exchange, make_error_set, pauli
from qexch.field import ExactScalar
from qexch.klcheck import (
    GramTensor,
    KLReport,
    check_kl,
    check_kl_extended,
    gram_blocks,
    gram_blocks_float,
    span_report,
)
from qexch.qstate import key_to_bits, weight_histogram
from qexch.recovery import (
    RecoveryRefused,
    build_recovery,
    logical_grid,
    random_logical_states,
    roundtrip_fidelity,
)
from qexch.search import (
    BOUND_MODELS,
    EVIDENCE_NOTE,
    bounds_min_qubits,
    parse_patterns,
    repetition_expansion,
    search_perm_invariant,
)

REPORT_SCHEMA = "qexch-report v1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def scalar_json(value) -> dict:
    if isinstance(value, ExactScalar):
        out = value.to_dict()
        out["text"] = str(value)
        z = value.to_complex()
    else:
        out = {}
        z = complex(value)
    out["float"] = [z.real, z.imag]
    return out


def scalar_text(value) -> str:
    if isinstance(value, ExactScalar):
        return str(value)
    z = complex(value)
    return f"{z.real:.12g}{z.imag:+.12g}i" if z.imag else f"{z.real:.12g}"


def emit(payload: dict, fmt: str, text_lines: list[str]) -> None:
    if fmt == "json":
        payload = {"schema": REPORT_SCHEMA, **payload}
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        print("\n".join(text_lines))


def _load(ref: str) -> Code:
    try:
        return resolve_code(ref)
    except (FileNotFoundError, CodeFormatError, KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _errors_for(code: Code, classes: str):
    try:
        return make_error_set(code.n, classes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- list / show -------------------------------------------------------------------

def cmd_list_codes(args) -> int:
    names = sorted(BUILTIN_CODES)
    payload = {"codes": [{"name": name, "n": builtin_code(name).n} for name in names]}
    emit(payload, args.format, [f"{name}  n={builtin_code(name).n}" for name in names])
    return EXIT_OK


def cmd_show(args) -> int:
    code = _load(args.code)
    words = []
    lines = [f"code {code.name}: n={code.n} radicand={code.radicand} words={len(code.words)}"]
    for label, vec in code.words:
        hist = weight_histogram(vec)
        words.append({"label": label, "terms": len(vec), "weights": {str(k): v for k, v in hist.items()}})
        hist_text = ", ".join(f"{k}:{v}" for k, v in hist.items())
        lines.append(f"  {label}: {len(vec)} terms, weight histogram {{{hist_text}}}")
    emit({"command": "show", "code": code.name, "n": code.n, "radicand": code.radicand, "words": words},
         args.format, lines)
    return EXIT_OK


# -- check / gram / dmatrix ---------------------------------------------------------------

def _witness_json(gram: GramTensor, w) -> dict:
    i, j, p, q = w.index
    return {
        "index": [i, j, p, q],
        "words": [gram.word_labels[i], gram.word_labels[j]],
        "errors": [gram.error_labels[p], gram.error_labels[q]],
        "value": scalar_json(w.value),
        "expected": scalar_json(w.expected),
        "note": w.note,
    }


def _report_lines(report: KLReport, words: list[str], errors: list[str], limit: int) -> list[str]:
    lines = [f"{report.condition} condition: {'PASS' if report.passed else 'FAIL'}"]
    lines += [f"note: {n}" for n in report.notes]
    if report.witnesses:
        lines.append(f"{len(report.witnesses)} witnesses (showing up to {limit}):")
        for w in report.witnesses[:limit]:
            i, j, p, q = w.index
            lines.append(
                f"  <{errors[p]} {words[i]}|{errors[q]} {words[j]}> = {scalar_text(w.value)}"
                f"  expected {scalar_text(w.expected)}  {w.note}".rstrip()
            )
    if report.d_matrix is not None:
        dm = report.d_matrix
        lines.append(f"D rank {dm.rank}, blocks {dm.block_sizes()}")
    return lines


def _report_json(report: KLReport, gram: GramTensor) -> dict:
    out = {
        "condition": report.condition,
        "passed": report.passed,
        "notes": report.notes,
        "witnesses": [_witness_json(gram, w) for w in report.witnesses],
    }
    if report.d_matrix is not None:
        out["d_rank"] = report.d_matrix.rank
        out["blocks"] = [[gram.error_labels[p] for p in b] for b in report.d_matrix.blocks]
    return out


def cmd_check(args) -> int:
    code = _load(args.code)
    errors = _errors_for(code, args.errors)
    if args.extended:
        if code.indices is None:
            raise UsageError("--extended needs a code file whose words carry 'index': [i, m]")
        report = check_kl_extended(code, errors, tol=args.tol if args.float else None)
        gram = GramTensor(code.labels, errors.labels, {}, exact=True)
    elif args.float:
        gram = gram_blocks_float(code, errors)
        report = check_kl(gram, "strict" if args.strict else "degenerate", tol=args.tol)
    else:
        gram = gram_blocks(code, errors)
        report = check_kl(gram, "strict" if args.strict else "degenerate")
    lines = [f"code {code.name}, errors {args.errors} ({len(errors)} operators)"]
    lines += _report_lines(report, code.labels, errors.labels, args.max_witnesses)
    payload = {"command": "check", "code": code.name, "errors": args.errors, "n_errors": len(errors),
               "report": _report_json(report, gram)}
    emit(payload, args.format, lines)
    return EXIT_OK if report.passed else EXIT_FAIL


def _gram_for(args):
    code = _load(args.code)
    errors = _errors_for(code, args.errors)
    return code, errors, gram_blocks(code, errors)


def cmd_gram(args) -> int:
    code, errors, gram = _gram_for(args)
    rows = []
    for (i, j, p, q), value in gram.entries.items():
        rows.append((i, j, p, q, gram.error_labels[p], gram.error_labels[q], value))
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "p", "q", "error_p", "error_q", "value", "re", "im"])
        for i, j, p, q, ep, eq, value in rows:
            z = value.to_complex()
            writer.writerow([i, j, p, q, ep, eq, str(value), repr(z.real), repr(z.imag)])
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    payload = {
        "command": "gram", "code": code.name, "errors": errors.labels, "words": code.labels,
        "entries": [
            {"index": [i, j, p, q], "error_p": ep, "error_q": eq, "value": scalar_json(value)}
            for i, j, p, q, ep, eq, value in rows
        ],
    }
    lines = []
    for i, wi in enumerate(code.labels):
        for j, wj in enumerate(code.labels):
            lines.append(f"block <e_p {wi}|e_q {wj}>:")
            for p, ep in enumerate(errors.labels):
                cells = " ".join(f"{str(gram[(i, j, p, q)]):>8}" for q in range(len(errors)))
                lines.append(f"  {ep:>6} | {cells}")
    emit(payload, args.format, lines)
    return EXIT_OK


def cmd_dmatrix(args) -> int:
    code, errors, gram = _gram_for(args)
    report = check_kl(gram, "degenerate")
    if not report.passed:
        emit({"command": "dmatrix", "code": code.name, "report": _report_json(report, gram)}, args.format,
             _report_lines(report, code.labels, errors.labels, 10))
        return EXIT_FAIL
    dm = report.d_matrix
    span = span_report(code, errors, gram)
    labels = errors.labels
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p", "q", "error_p", "error_q", "block", "value"])
        for b, block in enumerate(dm.blocks):
            for p in block:
                for q in block:
                    writer.writerow([p, q, labels[p], labels[q], b, str(dm.entries[p][q])])
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    lines = [f"code {code.name}, {len(errors)} errors", f"rank {dm.rank}", f"blocks {dm.block_sizes()}"]
    for b, block in enumerate(dm.blocks):
        values = sorted({str(dm.entries[p][q]) for p in block for q in block if p != q})
        diag = sorted({str(dm.entries[p][p]) for p in block})
        lines.append(
            f"  block {b} ({len(block)}): {labels[block[0]]}..{labels[block[-1]]} "
            f"diagonal {diag} off-diagonal {values}"
        )
    lines += span.notes(len(code.words))
    payload = {
        "command": "dmatrix", "code": code.name, "rank": dm.rank, "block_sizes": dm.block_sizes(),
        "blocks": [
            {
                "errors": [labels[p] for p in block],
                "entries": [[scalar_json(dm.entries[p][q]) for q in block] for p in block],
            }
            for block in dm.blocks
        ],
        "span": {
            "dimension": span.span_dimension,
            "gram_rank": span.gram_rank,
            "words_times_rank": len(code.words) * dm.rank,
            "printed_value": span.printed_value,
            "notes": span.notes(len(code.words)),
        },
    }
    emit(payload, args.format, lines)
    return EXIT_OK


# -- demo ----------------------------------------------------------------------------

def cmd_demo(args) -> int:
    code = builtin_code("shor9")
    e34 = exchange(3, 4)
    lines = ["Shor code under the exchange E_34"]
    images = []
    for label, vec in code.words:
        image = apply_error(e34, vec)
        kets = [key_to_bits(k, code.n) for k in image]
        images.append({"word": label, "kets": kets})
        lines.append(f"E_34 |{label}> =")
        for key, value in image.items():
            lines.append(f"  {'+' if value == 1 else str(value)} |{key_to_bits(key, code.n)}>")
    errors = error_set_from_ops(code.n, [pauli("Z", 7), pauli("Z", 8), pauli("Z", 9), e34])
    gram = gram_blocks(code, errors)
    report = check_kl(gram, "degenerate")
    involving = [w for w in report.witnesses if errors.labels.index("E_34") in w.index[2:]]
    lines.append(f"error set {errors.labels}")
    lines.append("witnesses pairing E_34 with another error:")
    for w in involving:
        i, j, p, q = w.index
        lines.append(
            f"  <{errors.labels[p]} {code.labels[i]}|{errors.labels[q]} {code.labels[j]}> = {w.value}"
            f" but {w.expected} for {code.labels[0]}" if i == j else
            f"  <{errors.labels[p]} {code.labels[i]}|{errors.labels[q]} {code.labels[j]}> = {w.value} (must be 0)"
        )
    lines.append(f"degenerate condition: {'PASS' if report.passed else 'FAIL'}")
    payload = {"command": "demo", "demo": "shor-exchange", "images": images,
               "report": _report_json(report, gram)}
    emit(payload, args.format, lines)
    return EXIT_OK


# -- recover-test / bounds / search --------------------------------------------------------

def cmd_recover_test(args) -> int:
    code = _load(args.code)
    errors = _errors_for(code, args.errors)
    if len(code.words) != 2:
        raise UsageError("recover-test needs a two-word code")
    try:
        plan = build_recovery(code, errors)
    except RecoveryRefused as exc:
        lines = [f"recovery refused: {exc}"]
        emit({"command": "recover-test", "code": code.name, "refused": True,
              "witnesses": len(exc.report.witnesses)}, args.format, lines)
        return EXIT_FAIL
    states = logical_grid() + random_logical_states(args.trials, np.random.default_rng(args.seed))
    worst = 1.0
    worst_at = None
    failures = 0
    for e in errors:
        for alpha, beta in states:
            f = roundtrip_fidelity(plan, e, alpha, beta)
            if abs(f - 1.0) > args.tol:
                failures += 1
            if f < worst:
                worst, worst_at = f, e.label
    runs = len(errors) * len(states)
    lines = [
        f"code {code.name}, {len(errors)} errors, {len(plan.syndromes)} syndrome subspaces (rank {plan.d_rank})",
        f"{runs} round trips ({len(states)} logical states per error)",
        f"worst fidelity {worst:.15f} at {worst_at}",
        f"{failures} outside tolerance {args.tol}",
    ]
    payload = {
        "command": "recover-test", "code": code.name, "syndromes": len(plan.syndromes),
        "runs": runs, "worst_fidelity": worst, "worst_error": worst_at, "failures": failures,
        "tol": args.tol, "seed": args.seed, "plan": plan.summary(),
    }
    emit(payload, args.format, lines)
    return EXIT_OK if failures == 0 else EXIT_FAIL


def cmd_bounds(args) -> int:
    models = list(BOUND_MODELS) if args.model == "all" else [args.model]
    results = [bounds_min_qubits(m) for m in models]
    lines = [f"{r.model}: n >= {r.n}  ({r.inequality}: {r.lhs} <= {r.rhs})" for r in results]
    payload = {"command": "bounds",
               "results": [{"model": r.model, "n": r.n, "lhs": r.lhs, "rhs": r.rhs,
                            "inequality": r.inequality} for r in results]}
    if args.model == "all":
        rep = repetition_expansion()
        lines.append(f"repetition code: {rep.note}")
        payload["repetition"] = {"counted": rep.total, "printed": rep.printed_total, "note": rep.note}
    emit(payload, args.format, lines)
    return EXIT_OK


def cmd_search(args) -> int:
    try:
        errors = make_error_set(args.n, args.errors)
        patterns = parse_patterns(args.patterns, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    results = search_perm_invariant(args.n, errors, patterns, args.restarts, args.seed)
    best = results[0]
    found = best.residual <= args.tol
    lines = [f"search n={args.n} errors={args.errors} patterns={len(patterns)} restarts={args.restarts} seed={args.seed}"]
    for r in results[: args.show]:
        coeffs = "; ".join(
            f"{word}: " + ", ".join(f"{w}:{c:.12g}" for w, c in r.best_coefficients[word].items())
            for word in ("word0", "word1")
        )
        lines.append(f"  {r.pattern.describe():<24} residual {r.residual:.3e}  [{coeffs}]")
    if found:
        lines.append(f"best residual {best.residual:.3e} <= {args.tol}: candidate code found")
    else:
        lines.append(f"best residual {best.residual:.3e} > {args.tol}: {EVIDENCE_NOTE}")
    lines.append("coefficients searched over the reals only")
    payload = {
        "command": "search", "n": args.n, "errors": args.errors, "seed": args.seed,
        "budget": args.restarts, "tol": args.tol, "found": found,
        "note": None if found else EVIDENCE_NOTE,
        "results": [
            {
                "pattern": r.pattern.describe(),
                "dual": r.pattern.dual_flip_related,
                "residual": r.residual,
                "restarts": r.restarts_used,
                "coefficients": {word: {str(w): c for w, c in cs.items()}
                                 for word, cs in r.best_coefficients.items()},
            }
            for r in results
        ],
    }
    emit(payload, args.format, lines)
    return EXIT_OK if found else EXIT_FAIL


# -- parser --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qexch", description="Exchange-error code verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, formats=("text", "json"), **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--format", choices=formats, default="text")
        p.set_defaults(func=func)
        return p

    add("list-codes", cmd_list_codes, help="list built-in codes")
    p = add("show", cmd_show, help="summarize a code")
    p.add_argument("--code", required=True)

    p = add("check", cmd_check, help="verify the correction conditions")
    p.add_argument("--code", required=True)
    p.add_argument("--errors", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--extended", action="store_true")
    p.add_argument("--float", action="store_true")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-witnesses", type=int, default=20)

    for name, func in (("gram", cmd_gram), ("dmatrix", cmd_dmatrix)):
        p = add(name, func, formats=("text", "json", "csv"))
        p.add_argument("--code", required=True)
        p.add_argument("--errors", required=True)

    p = add("demo", cmd_demo, help="worked examples")
    p.add_argument("name", choices=["shor-exchange"])

    p = add("recover-test", cmd_recover_test, help="round-trip recovery test")
    p.add_argument("--code", required=True)
    p.add_argument("--errors", required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("bounds", cmd_bounds, help="minimal qubit counts from dimension counting")
    p.add_argument("--model", choices=[*BOUND_MODELS, "all"], default="all")

    p = add("search", cmd_search, help="search permutation-invariant codes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--errors", required=True)
    p.add_argument("--patterns", default="all-dual")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--show", type=int, default=10)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
