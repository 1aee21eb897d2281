"""Command-line interface: solve, verify, oracle, generate, reduce, bench.

Exit codes: 0 success / certificate passed, 1 verification failure,
2 malformed input or usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from fractions import Fraction

from . import basic_auction, oracle, reductions
from .certify import CertificationError, certify, fmt, reconstruct_gamma
from .instance import (
    InstanceFormatError,
    InstanceValidationError,
    Kind,
    ProblemInstance,
    SolverConfig,
    diagnostics,
    generate,
    parse,
    serialize,
)
from .solver import Solution, solve


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_fraction(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def solution_to_text(solution: Solution) -> str:
    """Deterministic line-oriented solution record (fractions as num/den)."""
    instance = solution.instance
    cert = solution.certificate
    lines = [
        f"solution {instance.kind.value} {instance.n} {instance.m} {len(instance.edges)}",
        f"epsilon {fmt(solution.config.epsilon)}",
        f"mode {solution.config.numeric_mode}",
        f"status {'terminated' if solution.terminated else 'aborted'}",
    ]
    for e, spec in enumerate(instance.edges):
        if solution.flow[e] > 0:
            seg = f" seg={spec.segment}" if spec.segment is not None else ""
            lines.append(f"flow {spec.src + 1} {spec.dst + 1} {fmt(solution.flow[e])}{seg}")
    for i, a in enumerate(solution.alpha):
        lines.append(f"alpha {i + 1} {fmt(a)}")
    for j, b in enumerate(solution.beta):
        lines.append(f"beta {j + 1} {fmt(b)}")
    gammas = reconstruct_gamma(instance, solution.flow, solution.alpha, solution.beta)
    for e in sorted(gammas):
        if gammas[e] > 0:
            spec = instance.edges[e]
            lines.append(f"gamma {spec.src + 1} {spec.dst + 1} {fmt(gammas[e])}")
    lines.append(f"primal {fmt(cert.primal_value)}")
    lines.append(f"dual {fmt(cert.dual_value)}")
    lines.append(f"gap {fmt(cert.gap_ratio) if cert.gap_ratio is not None else 'vacuous'}")
    lines.extend(cert.to_lines())
    for key, value in solution.stats.to_dict().items():
        lines.append(f"stat {key} {value}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str, instance: ProblemInstance):
    """Read flows, duals and epsilon back from a solution file."""
    index: dict[tuple[int, int, int | None], int] = {}
    for e, spec in enumerate(instance.edges):
        index[(spec.src, spec.dst, spec.segment)] = e
    flow = [Fraction(0)] * len(instance.edges)
    alpha = [Fraction(0)] * instance.n
    beta = [Fraction(0)] * instance.m
    epsilon = None
    mode = "exact"
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        tag = tokens[0]
        try:
            if tag == "flow":
                seg = None
                fields = tokens[1:]
                if fields and fields[-1].startswith("seg="):
                    seg = int(fields[-1][4:])
                    fields = fields[:-1]
                key = (int(fields[0]) - 1, int(fields[1]) - 1, seg)
                if key not in index:
                    raise InstanceFormatError(
                        line_no, f"flow on edge ({fields[0]},{fields[1]}) not in instance"
                    )
                flow[index[key]] = _parse_fraction(fields[2])
            elif tag == "alpha":
                alpha[int(tokens[1]) - 1] = _parse_fraction(tokens[2])
            elif tag == "beta":
                beta[int(tokens[1]) - 1] = _parse_fraction(tokens[2])
            elif tag == "epsilon":
                epsilon = _parse_fraction(tokens[1])
            elif tag == "mode":
                mode = tokens[1]
        except (ValueError, IndexError):
            raise InstanceFormatError(line_no, f"malformed {tag!r} record") from None
    return flow, alpha, beta, epsilon, mode


def cmd_solve(args) -> int:
    instance = parse(_read(args.instance))
    config = SolverConfig(
        epsilon=_parse_fraction(args.epsilon),
        numeric_mode=args.mode,
        max_phases=args.max_phases,
    )
    if args.mode == "float":
        print("warning: float mode produces a non-rigorous certificate", file=sys.stderr)
    if args.baseline:
        if instance.kind is not Kind.BTP:
            print("error: --baseline handles btp instances only", file=sys.stderr)
            return 2
        result = basic_auction.run(instance, config)
        cert = certify(
            instance,
            list(result.primal.flow),
            list(result.dual.alpha),
            list(result.dual.beta),
            config.epsilon,
        )
        solution = Solution(
            instance=instance,
            config=config,
            flow=list(result.primal.flow),
            alpha=list(result.dual.alpha),
            beta=list(result.dual.beta),
            certificate=cert,
            stats=_wrap_stats(result.stats.to_dict()),
            terminated=result.terminated,
        )
    else:
        solution = solve(instance, config)
    text = solution_to_text(solution)
    if not args.seed_stats:
        text = "".join(
            line + "\n" for line in text.splitlines() if not line.startswith("stat ")
        )
    _write(args.output, text)
    return 0 if solution.certificate.passed else 1


def _wrap_stats(counts: dict[str, int]):
    from .solver import RunStats

    stats = RunStats()
    stats.counts.update(counts)
    return stats


def cmd_verify(args) -> int:
    instance = parse(_read(args.instance))
    flow, alpha, beta, epsilon, mode = parse_solution(_read(args.solution), instance)
    if args.epsilon is not None:
        epsilon = _parse_fraction(args.epsilon)
    if epsilon is None:
        print("error: epsilon not in solution file; pass --epsilon", file=sys.stderr)
        return 2
    tol = 1e-9 if mode == "float" else 0
    cert = certify(instance, flow, alpha, beta, epsilon, rigorous=(mode == "exact"), tol=tol)
    print(f"primal_feasible {cert.primal_feasible}")
    print(f"dual_feasible {cert.dual_feasible}")
    print(f"cs_source_worst {fmt(cert.cs_source_worst)}")
    print(f"cs_sink_worst {fmt(cert.cs_sink_worst)}")
    print(f"cs_edge_worst {fmt(cert.cs_edge_worst)}")
    print(f"cs_flow_worst_excess {fmt(cert.cs_flow_worst_excess)}")
    print(f"gap {fmt(cert.gap_ratio) if cert.gap_ratio is not None else 'vacuous'}")
    print(f"verdict {'pass' if cert.passed else 'fail'}")
    for violation in cert.primal_violations + cert.dual_violations:
        print(f"violation {violation}")
    return 0 if cert.passed else 1


def cmd_oracle(args) -> int:
    instance = parse(_read(args.instance))
    value, flow = oracle.exact_opt(instance)
    lines = [
        f"solution {instance.kind.value} {instance.n} {instance.m} {len(instance.edges)}"
    ]
    for e, spec in enumerate(instance.edges):
        if flow[e] > 0:
            seg = f" seg={spec.segment}" if spec.segment is not None else ""
            lines.append(f"flow {spec.src + 1} {spec.dst + 1} {fmt(flow[e])}{seg}")
    lines.append(f"primal {fmt(value)}")
    _write(args.output, "\n".join(lines) + "\n")
    return 0


def cmd_generate(args) -> int:
    u_range = None
    if args.kind == "bts":
        lo, hi = (int(x) for x in args.u_range.split(":"))
        u_range = (lo, hi)
    instance = generate(
        seed=args.seed,
        n=args.n,
        m=args.m,
        density=args.density,
        a_range=_split_range(args.a_range),
        b_range=_split_range(args.b_range),
        c_range=_split_range(args.c_range),
        p_range=_split_range(args.p_range),
        u_range=u_range,
    )
    _write(args.output, serialize(instance))
    return 0


def _split_range(text: str) -> tuple[int, int]:
    lo, hi = text.split(":")
    return int(lo), int(hi)


def cmd_reduce(args) -> int:
    if args.piecewise:
        pw = reductions.parse_piecewise(_read(args.input))
        split, edge_map = reductions.split_piecewise(pw)
        if args.map_back is None:
            _write(args.output, serialize(split))
            return 0
        flow, _, _, _, _ = parse_solution(_read(args.map_back), split)
        normalized = reductions.normalize_split_solution(flow, edge_map)
        totals = reductions.reassemble(normalized, edge_map)
        lines = []
        profit = Fraction(0)
        for o, edge in enumerate(pw.edges):
            lines.append(f"flow {edge.src + 1} {edge.dst + 1} {fmt(totals[o])}")
            profit += reductions.piecewise_profit(pw, o, totals[o])
        lines.append(f"primal {fmt(profit)}")
        _write(args.output, "\n".join(lines) + "\n")
        return 0
    g = reductions.parse_gflow(_read(args.input))
    reduced, mapper = reductions.gflow_to_btp(g)
    if args.map_back is None:
        _write(args.output, reductions.serialize_mincost(reduced))
        return 0
    flows = _read_mincost_flows(args.map_back, len(reduced.edges))
    arc_flow = reductions.map_flow_back(flows, mapper)
    lines = [f"aflow {a + 1} {fmt(v)}" for a, v in enumerate(arc_flow)]
    lines.append(f"cost {fmt(reductions.gflow_cost(g, arc_flow))}")
    _write(args.output, "\n".join(lines) + "\n")
    return 0


def _read_mincost_flows(path: str, count: int) -> list[Fraction]:
    flows = [Fraction(0)] * count
    for line_no, raw in enumerate(_read(path).splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if tokens[0] != "mflow" or len(tokens) != 3:
            raise InstanceFormatError(line_no, "expected: mflow <edge> <value>")
        flows[int(tokens[1]) - 1] = _parse_fraction(tokens[2])
    return flows


def cmd_bench(args) -> int:
    instances: list[tuple[str, ProblemInstance]] = []
    if args.gen:
        params = dict(part.split("=", 1) for part in args.gen.split(","))
        count = int(params.pop("count", "3"))
        seed0 = int(params.pop("seed", "0"))
        kind = params.pop("kind", "btp")
        n = int(params.pop("n", "4"))
        m = int(params.pop("m", "4"))
        density = float(params.pop("density", "0.9"))
        if params:
            print(f"error: unknown --gen keys {sorted(params)}", file=sys.stderr)
            return 2
        made = 0
        seed = seed0
        while made < count:
            try:
                inst = generate(
                    seed=seed, n=n, m=m, density=density,
                    u_range=(1, 8) if kind == "bts" else None,
                )
            except ValueError:
                seed += 1
                continue
            instances.append((f"gen:{seed}", inst))
            made += 1
            seed += 1
    for path in args.paths:
        instances.append((path, parse(_read(path))))
    if not instances:
        print("error: nothing to bench; pass --gen or instance paths", file=sys.stderr)
        return 2

    epsilons = [_parse_fraction(tok) for tok in args.epsilons.split(",")]
    header = (
        "name n m edges eps time_ms phases beta_rises rise_bound ops "
        "ops_per_rise_ok gap mode pass"
    )
    print(header)
    failures = 0
    for name, inst in instances:
        for eps in epsilons:
            for _ in range(args.repeat):
                config = SolverConfig(epsilon=eps, numeric_mode=args.mode)
                started = time.perf_counter()
                solution = solve(inst, config)
                elapsed_ms = (time.perf_counter() - started) * 1000.0
                rises = solution.stats.get("beta_rises")
                try:
                    bound = diagnostics(inst, eps).beta_rise_bound
                except ValueError:
                    bound = 0
                if rises > bound:
                    raise AssertionError(
                        f"{name}: beta rises {rises} exceed bound {bound}"
                    )
                ops = solution.stats.operations()
                allowance = 4 * (inst.n**2 + inst.n * math.log2(max(2, inst.m)))
                per_rise_ok = ops <= allowance * max(1, rises)
                gap = solution.certificate.gap_ratio
                ok = solution.certificate.passed
                failures += 0 if ok else 1
                print(
                    f"{name} {inst.n} {inst.m} {len(inst.edges)} {fmt(eps)} "
                    f"{elapsed_ms:.2f} {solution.stats.get('phases')} {rises} {bound} "
                    f"{ops} {per_rise_ok} "
                    f"{fmt(gap) if gap is not None else 'vacuous'} "
                    f"{args.mode} {ok}"
                )
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="budget-flow",
        description="Budgeted transportation solver with self-certifying solutions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance and certify the result")
    p_solve.add_argument("instance")
    p_solve.add_argument("--epsilon", default="1/4")
    p_solve.add_argument("--mode", choices=["exact", "float"], default="exact")
    p_solve.add_argument("--max-phases", type=int, default=None)
    p_solve.add_argument("--seed-stats", action="store_true", help="include run counters")
    p_solve.add_argument("--baseline", action="store_true", help="use the basic auction")
    p_solve.add_argument("-o", "--output", default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="re-certify a solution file")
    p_verify.add_argument("instance")
    p_verify.add_argument("solution")
    p_verify.add_argument("--epsilon", default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_oracle = sub.add_parser("oracle", help="exact optimum of a small instance")
    p_oracle.add_argument("instance")
    p_oracle.add_argument("-o", "--output", default=None)
    p_oracle.set_defaults(func=cmd_oracle)

    p_gen = sub.add_parser("generate", help="deterministically sample an instance")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--density", type=float, default=1.0)
    p_gen.add_argument("--kind", choices=["btp", "bts"], default="btp")
    p_gen.add_argument("--a-range", default="1:10")
    p_gen.add_argument("--b-range", default="1:20")
    p_gen.add_argument("--c-range", default="0:9")
    p_gen.add_argument("--p-range", default="1:6")
    p_gen.add_argument("--u-range", default="1:8")
    p_gen.add_argument("-o", "--output", default=None)
    p_gen.set_defaults(func=cmd_generate)

    p_reduce = sub.add_parser("reduce", help="piecewise or generalized-flow transforms")
    group = p_reduce.add_mutually_exclusive_group(required=True)
    group.add_argument("--piecewise", action="store_true")
    group.add_argument("--gflow", action="store_true")
    p_reduce.add_argument("input")
    p_reduce.add_argument("output")
    p_reduce.add_argument("--map-back", default=None, metavar="SOLUTION")
    p_reduce.set_defaults(func=cmd_reduce)

    p_bench = sub.add_parser("bench", help="run instances and report counters")
    p_bench.add_argument("paths", nargs="*")
    p_bench.add_argument("--gen", default=None, help="count=,n=,m=,density=,seed=,kind=")
    p_bench.add_argument("--epsilons", default="1/4")
    p_bench.add_argument("--repeat", type=int, default=1)
    p_bench.add_argument("--mode", choices=["exact", "float"], default="exact")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        InstanceFormatError,
        InstanceValidationError,
        CertificationError,
        oracle.OracleSizeError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
