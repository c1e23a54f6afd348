"""Command-line front end.

Problems arrive either as inline flags or as a JSON problem file; reports
are emitted as deterministic text or JSON (byte-identical for identical
input and seed).  Exit codes: 0 for verified/true results, 1 for false
verdicts, 2 for input errors.  A report embeds its canonical problem under
"problem", so a report file can be fed back as input and reproduces itself.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from .errors import InvariantViolation, JetCalcError
from .evofield import VerticalField, decompose, nabla, nabla_multi, prolong
from .expr import Context
from .forms import BiForm, MixedField, d_H, d_V, interior, lie
from .jetalg import total_derivative, total_derivative_multi
from .multiindex import MultiIndex, parse_multiindex
from .specseq import Bicomplex, FilteredComplex, e_infinity, e_page, total_cohomology_dim
from .varcalc import (
    CurrentJ,
    Lagrangian,
    conservation_residual,
    euler,
    is_total_divergence,
    noether_symmetry_check,
)

SCHEMA = "jetcalc-report/1"

TASKS = (
    "total-derivative",
    "nabla",
    "decompose",
    "prolong",
    "dv",
    "dh",
    "lie",
    "interior",
    "euler",
    "divergence-test",
    "conservation-law",
    "noether",
    "specseq",
    "bicomplex",
)


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jetcalc",
        description="exact calculus on jet spaces and filtered complexes",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task)
        p.add_argument("--file", help="JSON problem file (or a previous report)")
        p.add_argument("--m", type=int, help="number of independent variables")
        p.add_argument("--deps", help="comma-separated dependent names")
        p.add_argument("--transcendental", action="store_true")
        p.add_argument("--seed", type=int, help="seed for probabilistic equality")
        p.add_argument("--format", choices=("text", "json"), default=None)
        p.add_argument("--expr", help="expression text payload")
        p.add_argument("--mu", type=int, help="direction index (1-based)")
        p.add_argument("--index", help="multi-index, e.g. (1,0)")
        p.add_argument("--cutoff", type=int, help="graded cutoff K")
        p.add_argument("--window", type=int, help="materialization window")
        p.add_argument("--jobs", type=int, default=1, help="parallel page workers")
    return parser


def _load_problem(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise JetCalcError("problem file must hold a JSON object")
    if "problem" in data:  # a previous report
        data = data["problem"]
    return data


def _merge_problem(args: argparse.Namespace) -> dict:
    problem: dict = {"context": {}, "payload": {}, "options": {}}
    if args.file:
        loaded = _load_problem(args.file)
        problem["context"].update(loaded.get("context", {}))
        problem["payload"].update(loaded.get("payload", {}))
        problem["options"].update(loaded.get("options", {}))
        file_task = loaded.get("task")
        if file_task is not None and file_task != args.task:
            raise JetCalcError(
                f"problem file is for task {file_task!r}, invoked as {args.task!r}"
            )
    problem["task"] = args.task
    ctx_obj = problem["context"]
    if args.m is not None:
        ctx_obj["m"] = args.m
    if args.deps is not None:
        ctx_obj["deps"] = [d.strip() for d in args.deps.split(",") if d.strip()]
    if args.transcendental:
        ctx_obj["transcendental"] = True
    if args.seed is not None:
        ctx_obj["seed"] = args.seed
    payload = problem["payload"]
    if args.expr is not None:
        payload["expr"] = args.expr
    if args.mu is not None:
        payload["mu"] = args.mu
    if args.index is not None:
        payload["index"] = list(parse_multiindex(args.index))
    if args.cutoff is not None:
        payload["cutoff"] = args.cutoff
    if args.window is not None:
        payload["window"] = args.window
    options = problem["options"]
    if args.format is not None:
        options["format"] = args.format
    options.setdefault("format", "text")
    options["jobs"] = max(1, args.jobs)
    return problem


def _context(problem: dict) -> Context:
    ctx_obj = problem.get("context") or {}
    if "m" not in ctx_obj or "deps" not in ctx_obj:
        raise JetCalcError("context requires --m and --deps (or a problem file)")
    return Context.from_json_obj(ctx_obj)


def _field_from_payload(ctx: Context, payload: dict) -> VerticalField:
    if "field" not in payload:
        raise JetCalcError("task needs a 'field' payload entry")
    return VerticalField.from_json_obj(ctx, payload["field"])


def _mixed_field(ctx: Context, payload: dict) -> MixedField:
    spec = payload.get("field")
    if spec is None:
        raise JetCalcError("task needs a 'field' payload entry")
    window = spec.get("window")
    if "phi" in spec:
        if window is None:
            raise JetCalcError("an evolutionary field needs a 'window'")
        phi = {name: ctx.parse(text) for name, text in spec["phi"].items()}
        vertical = prolong(ctx, phi, window)
    elif "vertical" in spec:
        vertical = VerticalField.from_json_obj(ctx, spec["vertical"])
    else:
        vertical = VerticalField.zero(ctx)
    horizontal = {
        int(mu): ctx.parse(text) for mu, text in (spec.get("horizontal") or {}).items()
    }
    return MixedField(ctx, vertical=vertical, horizontal=horizontal, window=window)


def _form_from_payload(ctx: Context, payload: dict) -> BiForm:
    if "form" in payload:
        return BiForm.from_json_obj(ctx, payload["form"])
    if "expr" in payload:
        return BiForm.of_function(ctx.parse(payload["expr"]))
    raise JetCalcError("task needs a 'form' (or 'expr' for a 0-form) payload entry")


def _index_from_payload(ctx: Context, payload: dict) -> MultiIndex:
    return ctx.index(payload["index"])


# --- task handlers: return (result, verdict, certificate) ------------------


def _run_total_derivative(ctx: Context, payload: dict):
    f = ctx.parse(payload["expr"])
    if "index" in payload:
        result = total_derivative_multi(f, _index_from_payload(ctx, payload))
    else:
        result = total_derivative(f, int(payload.get("mu", 1)))
    return {"expr": str(result)}, None, None


def _run_nabla(ctx: Context, payload: dict):
    field = _field_from_payload(ctx, payload)
    if "index" in payload:
        result = nabla_multi(field, _index_from_payload(ctx, payload))
    else:
        result = nabla(field, int(payload.get("mu", 1)))
    return {"field": result.to_json_obj()}, None, None


def _run_decompose(ctx: Context, payload: dict):
    field = _field_from_payload(ctx, payload)
    cutoff = int(payload.get("cutoff", 0))
    graded = decompose(field, cutoff)
    certificate = {
        "round_trip": "verified exactly on all |i| <= cutoff",
        "cutoff": cutoff,
    }
    return {"generators": graded.to_json_obj()}, None, certificate


def _run_prolong(ctx: Context, payload: dict):
    window = int(payload["window"])
    phi = {name: ctx.parse(text) for name, text in payload["phi"].items()}
    return {"field": prolong(ctx, phi, window).to_json_obj()}, None, None


def _run_dv(ctx: Context, payload: dict):
    return {"form": d_V(_form_from_payload(ctx, payload)).to_json_obj()}, None, None


def _run_dh(ctx: Context, payload: dict):
    return {"form": d_H(_form_from_payload(ctx, payload)).to_json_obj()}, None, None


def _run_lie(ctx: Context, payload: dict):
    x = _mixed_field(ctx, payload)
    omega = _form_from_payload(ctx, payload)
    result = lie(x, omega)
    certificate = {"magic_formula": "agrees with generator rules exactly"}
    return {"form": result.to_json_obj()}, None, certificate


def _run_interior(ctx: Context, payload: dict):
    x = _mixed_field(ctx, payload)
    omega = _form_from_payload(ctx, payload)
    return {"form": interior(x, omega).to_json_obj()}, None, None


def _run_euler(ctx: Context, payload: dict):
    from .forms import d_V
    from .varcalc import integrate_by_parts

    lagrangian = Lagrangian(ctx.parse(payload["expr"]))
    source, eta = integrate_by_parts(d_V(lagrangian.top_form()))
    euler(lagrangian)  # independent closed-form cross-check
    certificate = {
        "dh_primitive": eta.to_json_obj(),
        "closed_form": "agrees with integration by parts exactly",
    }
    return {"source_form": source.to_json_obj()}, None, certificate


def _run_divergence_test(ctx: Context, payload: dict):
    f = ctx.parse(payload["expr"])
    source = euler(Lagrangian(f))
    verdict = is_total_divergence(f)
    certificate = {
        "euler_coefficients": source.to_json_obj(),
        "constant_part": str(f.constant_part()),
    }
    return {"is_total_divergence": verdict}, verdict, certificate


def _run_conservation_law(ctx: Context, payload: dict):
    current = CurrentJ(ctx, tuple(ctx.parse(t) for t in payload["current"]))
    system = [ctx.parse(t) for t in payload["system"]]
    cofactors = {}
    for entry in payload.get("cofactors", []):
        key = (int(entry["sigma"]), ctx.index(entry["index"]))
        cofactors[key] = ctx.parse(entry["expr"])
    residual = conservation_residual(current, system, cofactors)
    verdict = residual.is_zero
    certificate = {"residual": str(residual)}
    return {"conserved": verdict}, verdict, certificate


def _run_noether(ctx: Context, payload: dict):
    phi = {name: ctx.parse(text) for name, text in payload["phi"].items()}
    lagrangian = Lagrangian(ctx.parse(payload["lagrangian"]))
    window = int(payload["window"])
    verdict = noether_symmetry_check(phi, lagrangian, window)
    field = prolong(ctx, phi, window)
    applied = field.apply(lagrangian.density)
    certificate = {
        "field_applied_to_density": str(applied),
        "euler_of_result": euler(Lagrangian(applied)).to_json_obj(),
    }
    return {"noether_symmetry": verdict}, verdict, certificate


def _page_table(complex_: FilteredComplex, jobs: int) -> dict:
    spots = [
        (p, n - p)
        for p in range(complex_.p_min, complex_.p_max + 1)
        for n in range(complex_.n_min, complex_.n_max + 1)
    ]

    def one_spot(pq):
        p, q = pq
        limit = e_infinity(complex_, p, q)
        r0 = limit.stable_from
        dims = {}
        for r in range(0, max(2, r0) + 1):
            dims[str(r)] = e_page(complex_, p, q, r).dimension
        return pq, {
            "dims_by_r": dims,
            "stable_from": r0,
            "e_infinity": limit.dimension,
        }

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(one_spot, spots))
    else:
        results = dict(one_spot(pq) for pq in spots)
    pages = {f"{p},{q}": results[(p, q)] for p, q in sorted(results)}
    total = {
        str(n): total_cohomology_dim(complex_, n)
        for n in range(complex_.n_min, complex_.n_max + 1)
    }
    return {"pages": pages, "total_cohomology": total}


def _run_specseq(ctx_unused, payload: dict, jobs: int = 1):
    complex_ = FilteredComplex.from_json_obj(payload["complex"])
    return _page_table(complex_, jobs), None, None


def _run_bicomplex(ctx_unused, payload: dict, jobs: int = 1):
    bicomplex = Bicomplex.from_json_obj(payload["bicomplex"])
    result = _page_table(bicomplex.totalize(), jobs)
    return result, None, None


_CONTEXT_FREE = ("specseq", "bicomplex")

_HANDLERS = {
    "total-derivative": _run_total_derivative,
    "nabla": _run_nabla,
    "decompose": _run_decompose,
    "prolong": _run_prolong,
    "dv": _run_dv,
    "dh": _run_dh,
    "lie": _run_lie,
    "interior": _run_interior,
    "euler": _run_euler,
    "divergence-test": _run_divergence_test,
    "conservation-law": _run_conservation_law,
    "noether": _run_noether,
}


def _render_text(report: dict) -> str:
    lines = [f"task: {report['task']}", f"seed: {report['seed']}"]
    if report.get("verdict") is not None:
        lines.append(f"verdict: {'true' if report['verdict'] else 'false'}")
    lines.append("result:")
    lines.extend(
        "  " + line
        for line in json.dumps(report["result"], sort_keys=True, indent=2).splitlines()
    )
    if report.get("certificate"):
        lines.append("certificate:")
        lines.extend(
            "  " + line
            for line in json.dumps(
                report["certificate"], sort_keys=True, indent=2
            ).splitlines()
        )
    return "\n".join(lines) + "\n"


def run(argv: list[str]) -> tuple[int, str]:
    """Execute one invocation; returns (exit_code, report_text)."""
    parser = _build_arg_parser()
    args = parser.parse_args(argv)
    problem = _merge_problem(args)
    task = problem["task"]
    payload = problem["payload"]
    options = problem["options"]
    if task in _CONTEXT_FREE:
        context_json: dict = dict(problem.get("context") or {})
        seed = int(context_json.get("seed", 0))
        if task == "specseq":
            result, verdict, certificate = _run_specseq(None, payload, options["jobs"])
        else:
            result, verdict, certificate = _run_bicomplex(None, payload, options["jobs"])
    else:
        ctx = _context(problem)
        context_json = ctx.to_json_obj()
        seed = ctx.seed
        result, verdict, certificate = _HANDLERS[task](ctx, payload)
    report = {
        "schema": SCHEMA,
        "task": task,
        "seed": seed,
        "context": context_json,
        "problem": {
            "context": context_json,
            "task": task,
            "payload": payload,
            "options": {"format": options["format"]},
        },
        "result": result,
        "verdict": verdict,
        "certificate": certificate,
    }
    if options["format"] == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        text = _render_text(report)
    exit_code = 0 if verdict in (None, True) else 1
    return exit_code, text


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        code, text = run(argv)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except JetCalcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
