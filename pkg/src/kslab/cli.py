"""Experiment runner: seeded instances, online-vs-OPT pipelines, reports.

Reports are canonical JSON (sorted keys, no whitespace drift) or a single
CSV row, so identical run specs produce byte-identical files.  Set KSL_LOG
to DEBUG/INFO/WARNING for progress logging.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import adversary
from .gpc import (
    generate_advice,
    gpc_bit_budget,
    gpc_bit_budget_nominal,
    run_online,
)
from .instances import (
    SplitMix64,
    grid_graph,
    path_decomposition,
    path_graph,
    random_distinct_vertices,
    random_partial_ktree,
    random_requests,
)
from .metric_core import all_pairs_shortest_paths, graph_from_json, graph_to_json
from .offline_solver import (
    InstanceTooLarge,
    opt_all_schedules,
    opt_cost_dp,
    opt_cost_flow,
)
from .spanner_cover import (
    SpannerSystem,
    build_heavy_paths,
    certify_system,
    generate_advice_spanner,
    measure_min_stretch,
    run_online_spanner,
    shortest_path_tree,
    spanner_bit_budget,
    system_from_json,
    verify_stretch,
)
from .tree_decomp import (
    TreeDecomposition,
    gb_decomposition,
    module_graph_decomposition,
    reduce_height,
    verify_decomposition,
)

log = logging.getLogger("kslab")

FORMAT_VERSION = 1
CSV_COLUMNS = [
    "instance_id",
    "N",
    "k",
    "n",
    "algo",
    "online_cost",
    "opt_cost",
    "ratio",
    "bits_read",
    "bit_budget",
    "pass",
]


@dataclass
class RunSpec:
    command: str
    algo: str = "opt"
    family: str | None = None
    graph: str | None = None
    instance: str | None = None
    td: str | None = None
    spanners: str | None = None
    gamma: int = 2
    modules: int = 1
    rounds: int = 1
    bits: str | None = None
    k: int = 2
    n: int = 10
    size: int = 0
    seed: int = 0
    out: str | None = None
    format: str = "json"
    dump_instance: str | None = None


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _num(x):
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    return x


def _build_instance(spec: RunSpec):
    """Resolve (graph, init, sigma, td, system) from a file or a family."""
    rng = SplitMix64(spec.seed)
    td = system = None
    if spec.graph:
        with open(spec.graph) as fh:
            g = graph_from_json(fh.read())
        if spec.td:
            with open(spec.td) as fh:
                td = TreeDecomposition.from_json(fh.read())
        if spec.spanners:
            with open(spec.spanners) as fh:
                system = system_from_json(g, fh.read())
        if spec.instance:
            with open(spec.instance) as fh:
                doc = json.load(fh)
            init = tuple(doc["init_config"])
            sigma = list(doc["sequence"])
            params = {"source": spec.graph, "instance": spec.instance}
        else:
            init = random_distinct_vertices(rng, spec.k, g.n)
            sigma = random_requests(rng, spec.n, g.n)
            params = {"source": spec.graph}
    elif spec.family == "path-rounds":
        bits = spec.bits if spec.bits is not None else rng.bit_string(max(1, spec.n // 7))
        n_path = spec.size or 5
        g = path_graph(n_path)
        sigma = adversary.path_round_sequence(bits, n_path)
        init = adversary.PATH_ROUND_INIT
        td = path_decomposition(n_path)
        params = {"bits": bits, "path_size": n_path}
    elif spec.family == "module":
        seqs = _seeded_valid_sequence(rng, spec.gamma, 1, spec.rounds)
        g = adversary.module_graph(spec.gamma)
        sigma = list(seqs.requests)
        init = adversary.perm_init(spec.gamma, 1)
        td = module_graph_decomposition(spec.gamma)
        params = {"gamma": spec.gamma, "rounds": spec.rounds, "perms": seqs.perms}
    elif spec.family == "gb":
        seqs = _seeded_valid_sequence(rng, spec.gamma, spec.modules, spec.rounds)
        g = adversary.gb_graph(spec.modules, spec.gamma)
        sigma = list(seqs.requests)
        init = adversary.perm_init(spec.gamma, spec.modules)
        td = gb_decomposition(spec.modules, spec.gamma)
        params = {
            "gamma": spec.gamma,
            "modules": spec.modules,
            "rounds": spec.rounds,
            "perms": seqs.perms,
        }
    elif spec.family == "random-ktree":
        n_vertices = spec.size or 20
        width = min(4, max(1, spec.k))
        g, td = random_partial_ktree(rng, n_vertices, width)
        init = random_distinct_vertices(rng, spec.k, g.n)
        sigma = random_requests(rng, spec.n, g.n)
        params = {"n_vertices": n_vertices, "width": width}
    elif spec.family == "grid":
        side = spec.size or 4
        g = grid_graph(side, side)
        init = random_distinct_vertices(rng, spec.k, g.n)
        sigma = random_requests(rng, spec.n, g.n)
        params = {"side": side}
    else:
        raise SystemExit(f"unknown family {spec.family!r}; pass --family or --graph")
    return g, tuple(init), list(sigma), td, system, params


def _seeded_valid_sequence(rng: SplitMix64, gamma: int, m: int, rounds: int):
    perms = []
    for _ in range(rounds):
        row = []
        for _ in range(m):
            p1 = list(range(gamma))
            p2 = list(range(gamma))
            rng.shuffle(p1)
            rng.shuffle(p2)
            row.append((tuple(p1), tuple(p2)))
        perms.append(tuple(row))
    return adversary.valid_sequence(gamma, m, tuple(perms))


def _opt(g, init, sigma, dm):
    try:
        return opt_cost_dp(g, init, sigma, dm)
    except InstanceTooLarge:
        log.info("DP guard exceeded; falling back to min-cost flow")
        return opt_cost_flow(g, init, sigma, dm)


def cmd_run(spec: RunSpec) -> int:
    g, init, sigma, td, system, params = _build_instance(spec)
    dm = all_pairs_shortest_paths(g)
    opt_cost, opt_schedule = _opt(g, init, sigma, dm)
    log.info("instance: N=%d k=%d n=%d opt=%s", g.n, len(init), len(sigma), opt_cost)

    results: dict = {
        "opt_cost": _num(opt_cost),
        "online_cost": None,
        "ratio": None,
        "bits_read": None,
        "bit_budget": None,
        "pass": True,
    }
    extra: dict = {}
    tape_dump = None

    if spec.algo == "opt":
        results["online_cost"] = _num(opt_cost)
        results["ratio"] = 1 if opt_cost else None
        extra["schedule"] = opt_schedule.to_json()
    elif spec.algo == "perm":
        if spec.family not in ("module", "gb"):
            raise SystemExit("--algo perm needs --family module or gb")
        seq = adversary.valid_sequence(
            spec.gamma,
            spec.modules if spec.family == "gb" else 1,
            params["perms"],
        )
        schedule = adversary.perm_algorithm(g, seq, init)
        results["online_cost"] = _num(schedule.total_cost)
        results["ratio"] = _ratio(schedule.total_cost, opt_cost)
        results["pass"] = schedule.total_cost == opt_cost == len(sigma)
        unique = None
        if (g.n ** len(init)) * len(sigma) <= 10**6:
            all_opt = opt_all_schedules(g, init, sigma, dm)
            unique = (
                len(all_opt) == 1
                and all_opt[0].move_triples() == schedule.move_triples()
            )
            results["pass"] = results["pass"] and unique
        extra["unique_opt"] = unique
    elif spec.algo == "gpc":
        if td is None:
            raise SystemExit("--algo gpc needs a tree decomposition (--td or family)")
        check = verify_decomposition(g, td)
        if not check:
            raise SystemExit(f"decomposition invalid: {check.message}")
        red = reduce_height(td, g.n)
        tape = generate_advice(g, dm, red, init, sigma, opt_schedule)
        tape.rewind()
        run = run_online(g, dm, red, init, sigma, tape)
        budget = gpc_bit_budget(red, len(init), len(sigma))
        results.update(
            online_cost=_num(run.online_cost),
            ratio=_ratio(run.online_cost, opt_cost),
            bits_read=run.bits_read,
            bit_budget=budget,
        )
        results["pass"] = run.online_cost == opt_cost and run.bits_read <= budget
        extra["reduced_width"] = red.width
        extra["reduced_height"] = red.height
        extra["bit_budget_nominal"] = gpc_bit_budget_nominal(
            red, len(init), len(sigma)
        )
        extra["moves"] = run.to_json()["moves"]
        tape_dump = tape.to_hex()
    elif spec.algo == "spanner":
        if system is None:
            roots = _spanner_roots(spec, g.n)
            trees = tuple(shortest_path_tree(g, r) for r in roots)
            q, _ = measure_min_stretch(g, dm, SpannerSystem(trees=trees))
            system = certify_system(g, dm, trees, q, 0)
            extra["spanner_roots"] = list(roots)
        extra["q"] = _num(system.q)
        extra["r"] = _num(system.r)
        hp = [build_heavy_paths(t) for t in system.trees]
        tape = generate_advice_spanner(g, dm, system, init, sigma, opt_schedule)
        tape.rewind()
        run = run_online_spanner(g, system, hp, init, sigma, tape)
        budget = spanner_bit_budget(system.mu, g.n, len(init), len(sigma))
        results.update(
            online_cost=_num(run.cost),
            ratio=_ratio(run.cost, opt_cost),
            bits_read=run.bits_read,
            bit_budget=budget,
        )
        results["pass"] = (
            run.cost <= (system.q + system.r) * opt_cost
            and run.bits_read <= budget
        )
        extra["suffix_bits"] = run.suffix_bits
        extra["labels"] = run.labels
        extra["moves"] = run.to_json()["moves"]
        tape_dump = tape.to_hex()
    else:
        raise SystemExit(f"unknown algo {spec.algo!r}")

    instance_doc = {
        "family": spec.family,
        "params": _jsonable(params),
        "seed": spec.seed,
        "N": g.n,
        "k": len(init),
        "init_config": list(init),
        "sequence": sigma,
    }
    if spec.dump_instance:
        with open(spec.dump_instance + ".graph.json", "w") as fh:
            fh.write(graph_to_json(g) + "\n")
        with open(spec.dump_instance + ".instance.json", "w") as fh:
            fh.write(_canonical(instance_doc))
    report = {
        "format_version": FORMAT_VERSION,
        # the output path is not part of the experiment identity
        "spec": {
            k: v for k, v in asdict(spec).items() if v is not None and k != "out"
        },
        "instance": instance_doc,
        "digests": {
            "graph": _digest(graph_to_json(g)),
            "instance": _digest(_canonical(instance_doc)),
            "td": _digest(_canonical(td.to_json())) if td is not None else None,
            "tape": tape_dump[0] if tape_dump else None,
        },
        "tape_bits": tape_dump[1] if tape_dump else None,
        "results": results,
        "extra": _jsonable(extra),
    }
    _emit(spec, report)
    return 0 if results["pass"] else 1


def _ratio(online, opt):
    if opt == 0:
        return None if online == 0 else "inf"
    return _num(Fraction(online, opt) if online else Fraction(0))


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return _num(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _spanner_roots(spec: RunSpec, n: int) -> tuple[int, ...]:
    rng = SplitMix64(spec.seed ^ 0xB0F5)
    return tuple(random_distinct_vertices(rng, 2, n))


def _emit(spec: RunSpec, report: dict) -> None:
    if spec.format == "csv":
        res = report["results"]
        inst = report["instance"]
        row = {
            "instance_id": report["digests"]["instance"],
            "N": inst["N"],
            "k": inst["k"],
            "n": len(inst["sequence"]),
            "algo": report["spec"].get("algo", ""),
            "online_cost": res["online_cost"],
            "opt_cost": res["opt_cost"],
            "ratio": res["ratio"],
            "bits_read": res["bits_read"],
            "bit_budget": res["bit_budget"],
            "pass": str(res["pass"]).lower(),
        }
        text = ",".join(CSV_COLUMNS) + "\n"
        text += ",".join("" if row[c] is None else str(row[c]) for c in CSV_COLUMNS) + "\n"
    else:
        text = _canonical(report)
    if spec.out:
        with open(spec.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args) -> int:
    rows = []
    if args.tau:
        rows.append("tau,bits,bits_per_request,bits_per_opt_cost")
        for tok in args.tau.split(","):
            tau = Fraction(tok)
            bits = adversary.sgkh_advice_bound(tau, args.n)
            rows.append(
                f"{tok},{bits:.6f},{adversary.sgkh_bound_per_request(tau):.6f},"
                f"{adversary.sgkh_bound_per_opt_cost(tau):.6f}"
            )
    elif args.alpha:
        rows.append("alpha,exact_bits,closed_form_bits")
        for tok in args.alpha.split(","):
            alpha = int(tok)
            exact, closed = adversary.treewidth_advice_bound(alpha, args.n)
            rows.append(f"{alpha},{exact:.6f},{closed:.6f}")
    else:
        raise SystemExit("pass --tau or --alpha (comma-separated list)")
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    with open(args.graph) as fh:
        g = graph_from_json(fh.read())
    if args.td:
        with open(args.td) as fh:
            td = TreeDecomposition.from_json(fh.read())
        check = verify_decomposition(g, td)
        if check:
            print(f"pass: width={td.width} height={td.height}")
            return 0
        print(f"fail: axiom {check.axiom}, witness {check.witness}: {check.message}")
        return 1
    if args.spanners:
        with open(args.spanners) as fh:
            obj = json.load(fh)
        dm = all_pairs_shortest_paths(g)
        try:
            system = system_from_json(g, obj)
        except ValueError as exc:
            print(f"fail: {exc}")
            return 1
        if system.q is None:
            print("fail: spanner file carries no (q, r) claim to verify")
            return 1
        check = verify_stretch(g, dm, system, system.q, system.r)
        if check:
            print(f"pass: ({system.q}, {system.r})-stretch verified, mu={system.mu}")
            return 0
        print(f"fail: worst pair {check.witness} exceeds by {check.excess}")
        return 1
    raise SystemExit("pass --td or --spanners")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kslab",
        description="k-server advice laboratory: run online algorithms "
        "against the exact offline optimum, evaluate bound functions, and "
        "verify decompositions and spanner systems.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="generate-advice / run-online / compare-to-OPT")
    run.add_argument("--graph", help="graph JSON file")
    run.add_argument(
        "--instance",
        "--seq",
        dest="instance",
        help="instance sidecar JSON holding init_config and sequence "
        "(with --graph)",
    )
    run.add_argument("--td", help="tree decomposition JSON file")
    run.add_argument("--spanners", help="spanner system JSON file")
    run.add_argument(
        "--family",
        choices=["path-rounds", "module", "gb", "random-ktree", "grid"],
        help="generated instance family",
    )
    run.add_argument("--gamma", type=int, default=2)
    run.add_argument("--modules", type=int, default=1)
    run.add_argument("--rounds", type=int, default=1)
    run.add_argument("--bits", help="round-type bit string for path-rounds")
    run.add_argument("--k", type=int, default=2, help="number of servers")
    run.add_argument("--n", type=int, default=10, help="request count")
    run.add_argument("--size", type=int, default=0, help="graph size parameter")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--algo", choices=["opt", "gpc", "spanner", "perm"], default="opt")
    run.add_argument("--out", help="report file (default: stdout)")
    run.add_argument("--format", choices=["json", "csv"], default="json")
    run.add_argument(
        "--dump-instance",
        help="also write PREFIX.graph.json and PREFIX.instance.json",
    )

    bounds = sub.add_parser("bounds", help="advice lower-bound tables")
    bounds.add_argument("--tau", help="comma-separated ratios in (1, 5/4]")
    bounds.add_argument("--alpha", help="comma-separated even treewidths >= 4")
    bounds.add_argument("--n", type=int, default=10**6)
    bounds.add_argument("--out")

    ver = sub.add_parser("verify", help="check a decomposition or spanner system")
    ver.add_argument("--graph", required=True)
    ver.add_argument("--td")
    ver.add_argument("--spanners")
    return ap


def main(argv=None) -> int:
    level = os.environ.get("KSL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = make_parser().parse_args(argv)
    if args.command == "run":
        spec = RunSpec(
            command="run",
            algo=args.algo,
            family=args.family,
            graph=args.graph,
            instance=args.instance,
            td=args.td,
            spanners=args.spanners,
            gamma=args.gamma,
            modules=args.modules,
            rounds=args.rounds,
            bits=args.bits,
            k=args.k,
            n=args.n,
            size=args.size,
            seed=args.seed,
            out=args.out,
            format=args.format,
            dump_instance=args.dump_instance,
        )
        return cmd_run(spec)
    if args.command == "bounds":
        return cmd_bounds(args)
    if args.command == "verify":
        return cmd_verify(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
