"""Command-line interface.

Commands:
  solve   -- run the full solver on an instance file
  mms     -- print exact maximin shares (and witness partitions)
  verify  -- score an allocation file against a threshold
  gen     -- emit a tight or random instance as JSON
  bench   -- solve a batch of seeded random instances

Exit codes: 0 success, 2 invalid input, 3 exact-search capacity exceeded,
4 internal invariant violation (diagnostics are dumped to stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from .bagfill import BagFillRun
from .core import (
    allocation_from_json,
    format_value,
    instance_from_json,
    instance_to_json,
    parse_value,
)
from .errors import (
    CapacityError,
    ContractError,
    InternalInvariantError,
    ValidationError,
)
from .harness import GeneratorSpec, gen_random, gen_tight_example, verify
from .oracle import DEFAULT_MAX_GOODS, DEFAULT_MAX_PARTS, instance_mms_all
from .pipeline import alpha_for, approx_mms
from .transforms import ReductionLog


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(doc, path: Optional[str]) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_instance(path: str):
    return instance_from_json(_read_json(path))


def _trace_doc(report) -> dict:
    return {
        "reductions": report.reduction_log.to_json(),
        "bagfill": [] if report.bagfill is None
        else [e.to_json() for e in report.bagfill.trace],
    }


def _payload_doc(payload) -> object:
    if isinstance(payload, ReductionLog):
        return {"reductions": payload.to_json()}
    if isinstance(payload, BagFillRun):
        return {"bagfill": [e.to_json() for e in payload.trace]}
    if isinstance(payload, (tuple, list)):
        return [_payload_doc(p) for p in payload if p is not None]
    return repr(payload)


def _add_capacity_args(parser) -> None:
    parser.add_argument("--max-goods", type=int, default=DEFAULT_MAX_GOODS,
                        help="exact-search good limit (default %(default)s)")
    parser.add_argument("--max-parts", type=int, default=DEFAULT_MAX_PARTS,
                        help="exact-search part limit (default %(default)s)")


def _cmd_solve(args) -> int:
    instance = _load_instance(args.input)
    choice = alpha_for(instance.n, args.alpha)
    report = approx_mms(instance, choice, max_goods=args.max_goods,
                        max_parts=args.max_parts)
    _write_json(report.to_json(instance), args.output)
    if args.trace:
        _write_json(_trace_doc(report), args.trace)
    return 0


def _cmd_mms(args) -> int:
    instance = _load_instance(args.input)
    results = instance_mms_all(instance, max_goods=args.max_goods,
                               max_parts=args.max_parts)
    agents = instance.agents if args.agent is None else (args.agent,)
    if args.agent is not None and args.agent not in results:
        raise ValidationError(f"unknown agent {args.agent}")
    doc = {
        str(a): {
            "mms": format_value(results[a].value),
            "partition": [sorted(cell, key=instance.good_position.__getitem__)
                          for cell in results[a].partition],
        }
        for a in agents
    }
    _write_json(doc, args.output)
    return 0


def _cmd_verify(args) -> int:
    instance = _load_instance(args.input)
    allocation = allocation_from_json(instance, _read_json(args.allocation))
    alpha = parse_value(args.alpha)
    report = verify(instance, allocation, alpha, max_goods=args.max_goods,
                    max_parts=args.max_parts)
    _write_json(report.to_json(), args.output)
    return 0


def _cmd_gen(args) -> int:
    if args.family == "tight":
        instance = gen_tight_example(args.n)
    else:
        spec = GeneratorSpec(kind=args.kind, n=args.n, m=args.m,
                             value_bound=args.bound, seed=args.seed)
        instance = gen_random(spec)
    _write_json(instance_to_json(instance), args.output)
    return 0


def _cmd_bench(args) -> int:
    if args.suite != "random":
        raise ValidationError(f"unknown suite {args.suite!r}")
    specs = []
    i = 0
    while len(specs) < args.count:
        for n in (2, 3, 4):
            for m in range(n, 13):
                if len(specs) >= args.count:
                    break
                specs.append(GeneratorSpec(kind="uniform-int", n=n, m=m,
                                           value_bound=100, seed=args.seed + i))
                i += 1

    def run(spec: GeneratorSpec) -> dict:
        instance = gen_random(spec)
        choice = alpha_for(instance.n, "improved")
        report = approx_mms(instance, choice, max_goods=args.max_goods,
                            max_parts=args.max_parts)
        check = verify(instance, report.allocation, choice.alpha,
                       max_goods=args.max_goods, max_parts=args.max_parts)
        return {
            "id": spec.instance_id(),
            "n": spec.n,
            "m": spec.m,
            "alpha": format_value(choice.alpha),
            "score": format_value(check.score),
            "ok": check.passed,
        }

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        results = list(pool.map(run, specs))
    results.sort(key=lambda r: r["id"])
    failures = [r for r in results if not r["ok"]]
    doc = {
        "suite": args.suite,
        "count": len(results),
        "failures": len(failures),
        "results": results,
    }
    _write_json(doc, args.output)
    return 0 if not failures else 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmsfair",
        description="Exact approximate-maximin-share allocation of indivisible goods")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance end to end")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", default="improved",
                   help='"classic", "improved", or an explicit rational like 3/4')
    p.add_argument("--trace", default=None, help="write the full solve trace here")
    p.add_argument("--output", default=None)
    _add_capacity_args(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("mms", help="print exact maximin shares")
    p.add_argument("--input", required=True)
    p.add_argument("--agent", type=int, default=None)
    p.add_argument("--output", default=None)
    _add_capacity_args(p)
    p.set_defaults(func=_cmd_mms)

    p = sub.add_parser("verify", help="score an allocation against a threshold")
    p.add_argument("--input", required=True)
    p.add_argument("--allocation", required=True)
    p.add_argument("--alpha", required=True, help="threshold as P/Q")
    p.add_argument("--output", default=None)
    _add_capacity_args(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("gen", help="generate an instance")
    gen_sub = p.add_subparsers(dest="family", required=True)
    pt = gen_sub.add_parser("tight", help="worst-case identical-valuation family")
    pt.add_argument("--n", type=int, required=True)
    pt.add_argument("--output", default=None)
    pt.set_defaults(func=_cmd_gen)
    pr = gen_sub.add_parser("random", help="seeded random family")
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--m", type=int, required=True)
    pr.add_argument("--bound", type=int, required=True)
    pr.add_argument("--seed", type=int, required=True)
    pr.add_argument("--kind", default="uniform-int",
                    choices=("uniform-int", "uniform-rational"))
    pr.add_argument("--output", default=None)
    pr.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="solve a batch of seeded random instances")
    p.add_argument("--suite", default="random")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--output", default=None)
    _add_capacity_args(p)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        if exc.payload is not None:
            json.dump(_payload_doc(exc.payload), sys.stderr, indent=2)
            print(file=sys.stderr)
        return 4
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
