"""Command line entry point: ``guessing-secrets <subcommand>``.

Exit status is 0 when every check performed passed, 1 when a check failed
and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema

from . import adversary as adv
from .census import bounds_csv
from .harness import (
    ExperimentConfig,
    default_seed,
    exhaustive_verify,
    reproduce_examples,
    run_config,
    sample_experiments,
    spectrum_csv,
)
from .gf2 import BitVec
from .recovery import KnowledgeGraph, classify, reduce_graph, stopping_rule


def _load_json(text: str) -> Any:
    """Inline JSON, or ``@path`` to read it from a file."""
    if text.startswith("@"):
        return json.loads(Path(text[1:]).read_text())
    return json.loads(text)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _adversary(args: argparse.Namespace) -> Dict[str, Any]:
    if args.adversary is None:
        raise SystemExit("--adversary is required")
    data = _load_json(args.adversary)
    spec = adv.spec_from_json(data)
    if args.n is not None and adv.spec_dim(spec) != args.n:
        raise ValueError(f"adversary has dimension {adv.spec_dim(spec)}, --n says {args.n}")
    return data


def cmd_spectrum(args: argparse.Namespace) -> int:
    csv_text, payload = spectrum_csv(_adversary(args), args.top)
    _emit(csv_text, args.out)
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    records = sample_experiments(
        _adversary(args), args.epsilon, args.m, args.seed, args.experiments, args.reduce
    )
    body = records[0] if len(records) == 1 else records
    _emit(json.dumps(body, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    record = _load_json(args.record)
    n = int(record["n"])
    outcomes = [BitVec.parse(x).bits for x in record["outcomes"]]
    eps = args.epsilon if args.epsilon is not None else record.get("epsilon", "0.01")
    rule = stopping_rule(eps, len(outcomes))
    result = classify(outcomes, rule)
    payload = {"rule": rule.to_dict(), "classification": result.to_dict(n)}
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_reduce(args: argparse.Namespace) -> int:
    graph_data = _load_json(args.graph)
    if "final_graph" in graph_data or "classification" in graph_data:
        # an experiment record: start from its case-1 candidates
        cls = graph_data["classification"]
        if cls["case"] != 1:
            raise ValueError("record is case 2; nothing to reduce")
        graph_data = {"n": graph_data["n"], "edges": cls["candidates"]}
    graph = KnowledgeGraph.from_dict(graph_data)
    table = adv.compile_spec(adv.spec_from_json(_adversary(args)))
    final, log = reduce_graph(graph, table)
    s = lambda x: str(BitVec(x, graph.n))  # noqa: E731
    payload = {
        "final_graph": final.to_dict(),
        "queries": [
            {"question": s(q.question), "answer": q.answer, "removed": [[s(a), s(b)] for a, b in q.removed]}
            for q in log
        ],
        "oracle_calls": table.call_counter,
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    _emit(bounds_csv(args.k_max), args.out)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    if args.acceptance:
        from .acceptance import CRITERIA

        ok = True
        lines = []
        wanted = args.criterion or sorted(CRITERIA)
        for i in wanted:
            report = CRITERIA[i](args.seed)
            ok &= report.passed
            lines.append(f"{'PASS' if report.passed else 'FAIL'} {report.title}")
            if args.verbose or not report.passed:
                lines.extend(report.to_text().splitlines()[1:-1])
        _emit("\n".join(lines) + "\n", args.out)
        return 0 if ok else 1
    if args.n is None:
        raise SystemExit("verify needs --n (or --acceptance)")
    report = exhaustive_verify(args.n, args.k)
    _emit(report.to_json() if args.json_out else report.to_text(), args.out)
    return 0 if report.passed else 1


def cmd_reproduce(args: argparse.Namespace) -> int:
    report = reproduce_examples(args.n or 4)
    _emit(report.to_json() if args.json_out else report.to_text(), args.out)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="guessing-secrets",
        description="Exact Deutsch-Jozsa simulation for the guessing-secrets game",
    )
    p.add_argument("--config", help="JSON experiment config; overrides the subcommand")
    sub = p.add_subparsers(dest="command")

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--n", type=int, help="dimension; checked against the adversary")
        sp.add_argument("--out", help="write output here instead of stdout")

    def sampling(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--epsilon", default="0.01")
        sp.add_argument("--m", type=int, help="runs per experiment (default: smallest m with d <= m/4)")
        sp.add_argument(
            "--seed", type=int, default=default_seed(), help="default from $GUESSING_SECRETS_SEED"
        )

    sp = sub.add_parser("spectrum", help="top outcomes of one run as CSV (index,C_j,probability)")
    common(sp)
    sp.add_argument("--adversary", help="adversary JSON, or @file")
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--json", help="also write the sparse spectrum JSON here")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("run", help="sample m runs, classify, optionally reduce")
    common(sp)
    sampling(sp)
    sp.add_argument("--adversary", help="adversary JSON, or @file")
    sp.add_argument("--experiments", type=int, default=1)
    sp.add_argument("--reduce", action="store_true", help="prune case-1 graphs with classical queries")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("classify", help="classify the outcomes stored in an experiment record")
    common(sp)
    sp.add_argument("--record", required=True, help="experiment JSON, or @file")
    sp.add_argument("--epsilon", default=None)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("reduce", help="prune a candidate graph with separating questions")
    common(sp)
    sp.add_argument("--graph", required=True, help="graph or experiment JSON, or @file")
    sp.add_argument("--adversary", help="adversary JSON, or @file")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("bounds", help="CSV of p_k, 4k/(k+1)^2 and 1/k")
    common(sp)
    sp.add_argument("--k-max", type=int, default=40)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("verify", help="exhaustive certification, or the acceptance suite")
    common(sp)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--acceptance", action="store_true")
    sp.add_argument("--criterion", type=int, action="append", help="only this criterion (repeatable)")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--verbose", action="store_true")
    sp.add_argument("--json-out", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("reproduce", help="recompute the worked examples and bounds")
    common(sp)
    sp.add_argument("--json-out", action="store_true")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            cfg = ExperimentConfig.load(Path(args.config))
            text, ok = run_config(cfg)
            _emit(text, cfg.out)
            return 0 if ok else 1
        if args.command is None:
            parser.print_help()
            return 2
        return args.func(args)
    except (ValueError, KeyError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
