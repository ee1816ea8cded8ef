"""Command-line front end and end-to-end pipeline driver.

Subcommands operate on JSON files so every intermediate artifact can be
inspected and re-fed to the next stage; `pipeline` chains all stages from a
single TOML config (mine -> rank -> merge variants -> PE spec -> map ->
simulate -> cost) and writes one directory per PE variant.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .costs import default_cost_table, evaluate_mapping, load_cost_table, pe_area
from .errors import PEDSEError, PipelineError
from .graph import (
    BLOCK_CLASS,
    Embedding,
    Pattern,
    graph_from_json,
    graph_to_json,
    parse_graph,
)
from .mapper import emit_netlist, map_application, simulate_mapping
from .merge import build_pe_variants
from .miner import MinedPattern, MiningConfig, mine_frequent_subgraphs
from .mis import MisReport, analyze_patterns
from .pespec import generate_pe_spec, pe_spec_from_json, pe_spec_to_json
from .sim import SimResult, random_input_vector, simulate_graph


def _read_json(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _write_json(path: str | Path, doc) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(doc, indent=2, sort_keys=True))
        f.write("\n")


def _load_graph(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return parse_graph(f.read())


# Input-vector keys: plain node id, or "node:port" for an undriven port.
def _decode_key(k: str):
    if ":" in k:
        node, _, port = k.rpartition(":")
        if port.isdigit():
            return (node, int(port))
    return k


def _encode_key(k) -> str:
    return k if isinstance(k, str) else f"{k[0]}:{k[1]}"


def _mined_to_json(mined: list[MinedPattern]) -> list[dict]:
    out = []
    for mp in mined:
        n = mp.pattern.node_count
        out.append(
            {
                "pattern": graph_to_json(mp.pattern.graph),
                "frequency": mp.frequency,
                "embeddings": [
                    [e.mapping[f"n{i}"] for i in range(n)]
                    for e in mp.embeddings
                ],
            }
        )
    return out


def _mined_from_json(doc: list[dict]) -> list[MinedPattern]:
    out = []
    for entry in doc:
        pat = Pattern(graph_from_json(entry["pattern"]))
        embs = [
            Embedding.make(pat, {f"n{i}": v for i, v in enumerate(ids)})
            for ids in entry["embeddings"]
        ]
        out.append(MinedPattern(pat, entry["frequency"], embs))
    return out


def _reports_to_json(reports: list[MisReport]) -> list[dict]:
    docs = _mined_to_json([r.mined for r in reports])
    for doc, r in zip(docs, reports):
        doc["mis_size"] = r.mis_size
        doc["chosen_embeddings"] = r.chosen_indices
        doc["exact"] = r.exact
    return docs


def _reports_from_json(doc: list[dict]) -> list[MisReport]:
    mined = _mined_from_json(doc)
    return [
        MisReport(mp, entry["mis_size"], entry["chosen_embeddings"],
                  entry.get("exact", True))
        for mp, entry in zip(mined, doc)
    ]


def _traces_from_json(doc: list[dict]) -> list[SimResult]:
    return [
        SimResult(outputs=t["outputs"], op_event_count=dict(t["ops"]))
        for t in doc
    ]


# -- subcommands --------------------------------------------------------------


def cmd_mine(args) -> None:
    g = _load_graph(args.graph)
    cfg = MiningConfig(
        min_support=args.min_support,
        max_pattern_nodes=args.max_nodes,
        include_const_nodes=not args.no_const,
    )
    mined = mine_frequent_subgraphs(g, cfg)
    _write_json(args.out, _mined_to_json(mined))


def cmd_mis(args) -> None:
    mined = _mined_from_json(_read_json(args.patterns))
    reports = analyze_patterns(mined)
    _write_json(args.out, _reports_to_json(reports))


def cmd_merge(args) -> None:
    reports = _reports_from_json(_read_json(args.patterns))
    baseline_ops = _read_json(args.baseline)["ops"]
    costs = load_cost_table(args.costs) if args.costs else default_cost_table()
    app_ops = set(baseline_ops)
    for r in reports:
        app_ops.update(r.mined.pattern.graph.op(v)
                       for v in r.mined.pattern.graph.node_ids)
    variants = build_pe_variants(
        reports, baseline_ops, args.k, costs, sorted(app_ops)
    )
    dp = variants[-1]
    _write_json(args.out, dp.to_json())
    if args.dot:
        Path(args.dot).write_text(dp.to_dot(), encoding="utf-8")


def cmd_genpe(args) -> None:
    doc = _read_json(args.pe)
    spec = pe_spec_from_json(doc if "datapath" in doc else {"datapath": doc})
    _write_json(args.out, pe_spec_to_json(spec))


def _load_spec(path: str):
    doc = _read_json(path)
    return pe_spec_from_json(doc if "datapath" in doc else {"datapath": doc})


def cmd_map(args) -> None:
    app = _load_graph(args.graph)
    spec = _load_spec(args.pe)
    mapping = map_application(app, spec)
    _write_json(args.out, emit_netlist(mapping))


def cmd_simulate(args) -> None:
    g = _load_graph(args.graph)
    vectors = _read_json(args.inputs)
    results = []
    for vec in vectors:
        x = {_decode_key(k): v for k, v in vec.items()}
        res = simulate_graph(g, x)
        results.append(
            {
                "outputs": dict(sorted(res.outputs.items())),
                "ops": dict(sorted(res.op_event_count.items())),
            }
        )
    _write_json(args.out, results)


def cmd_cost(args) -> None:
    netlist = _read_json(args.netlist)
    spec = _load_spec(args.pe)
    traces = _traces_from_json(_read_json(args.traces))
    costs = load_cost_table(args.costs) if args.costs else default_cost_table()

    class _Shim:
        instances = netlist["instances"]

    report = evaluate_mapping(_Shim(), spec, traces, costs)
    _write_json(args.out, report.to_json())


# -- pipeline ------------------------------------------------------------------


def _pool_reports(per_app: list[list[MisReport]]) -> list[MisReport]:
    """Cross-application pattern pool: dedup by canonical key, rank by the
    sum of per-application MIS sizes."""
    pooled: dict[bytes, MisReport] = {}
    for reports in per_app:
        for r in reports:
            key = r.mined.pattern.key
            prev = pooled.get(key)
            if prev is None:
                pooled[key] = MisReport(
                    mined=MinedPattern(r.mined.pattern, r.mined.frequency, []),
                    mis_size=r.mis_size,
                    chosen_indices=[],
                    exact=r.exact,
                )
            else:
                pooled[key] = MisReport(
                    mined=MinedPattern(
                        prev.mined.pattern,
                        prev.mined.frequency + r.mined.frequency,
                        [],
                    ),
                    mis_size=prev.mis_size + r.mis_size,
                    chosen_indices=[],
                    exact=prev.exact and r.exact,
                )
    return sorted(
        pooled.values(),
        key=lambda r: (
            -r.mis_size,
            -r.mined.pattern.node_count,
            r.mined.pattern.key,
        ),
    )


def run_pipeline(cfg: dict) -> dict:
    apps = cfg.get("applications", [])
    if not apps:
        raise PipelineError("config lists no applications")
    k = int(cfg.get("k", 1))
    if k < 1:
        raise PipelineError("k must be >= 1")
    seed = cfg.get("seed", 0)
    n_vectors = int(cfg.get("vectors", 100))
    out_dir = Path(cfg.get("out_dir", "out"))
    costs = (
        load_cost_table(cfg["costs"]) if cfg.get("costs")
        else default_cost_table()
    )
    mcfg = MiningConfig(
        min_support=int(cfg.get("min_support", 2)),
        max_pattern_nodes=int(cfg.get("max_pattern_nodes", 8)),
        include_const_nodes=bool(cfg.get("include_const_nodes", True)),
    )

    stage = "mine"
    try:
        graphs = {Path(p).stem: _load_graph(p) for p in apps}
        per_app_reports = []
        app_ops: set[str] = set()
        for name in sorted(graphs):
            g = graphs[name]
            app_ops.update(g.op(v) for v in g.node_ids)
            mined = mine_frequent_subgraphs(g, mcfg)
            stage = "mis"
            per_app_reports.append(analyze_patterns(mined))
            stage = "mine"
        stage = "merge"
        pooled = _pool_reports(per_app_reports)
        baseline_ops = cfg.get("baseline_ops") or sorted(
            op for op in app_ops if op in BLOCK_CLASS and op != "const"
        )
        variants = build_pe_variants(
            pooled, baseline_ops, k, costs, sorted(app_ops)
        )

        summary = {"variants": [], "cost_table": costs.to_json()}
        for i, dp in enumerate(variants, start=1):
            vdir = out_dir / f"variant{i}"
            stage = "genpe"
            spec = generate_pe_spec(dp)
            _write_json(vdir / "pe.json", pe_spec_to_json(spec))
            ventry = {"variant": i, "pe_area": pe_area(spec, costs),
                      "applications": []}
            for name in sorted(graphs):
                g = graphs[name]
                stage = "map"
                mapping = map_application(g, spec)
                _write_json(vdir / f"{name}.netlist.json",
                            emit_netlist(mapping))
                stage = "simulate"
                rng = random.Random(f"{seed}:{name}")
                traces = []
                for _ in range(n_vectors):
                    x = random_input_vector(g, rng)
                    ref = simulate_graph(g, x)
                    got = simulate_mapping(mapping, x)
                    if got.outputs != ref.outputs:
                        raise PipelineError(
                            f"mapped netlist for {name!r} disagrees with "
                            f"the application"
                        )
                    traces.append(got)
                stage = "cost"
                report = evaluate_mapping(mapping, spec, traces, costs,
                                          frequency_label=name)
                _write_json(vdir / f"{name}.report.json", report.to_json())
                ventry["applications"].append(
                    {
                        "application": name,
                        "pe_count": report.pe_count,
                        "total_area": report.total_area,
                        "energy_per_op": report.energy_per_op,
                    }
                )
            summary["variants"].append(ventry)
        _write_json(out_dir / "summary.json", summary)
        return summary
    except PEDSEError as exc:
        raise PipelineError(f"stage {stage}: {exc}") from exc


def cmd_pipeline(args) -> None:
    with open(args.config, "rb") as f:
        cfg = tomllib.load(f)
    run_pipeline(cfg)


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pe-dse",
        description="Processing-element design-space exploration over "
                    "dataflow graphs",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine frequent connected subgraphs")
    p.add_argument("--graph", required=True)
    p.add_argument("--min-support", type=int, default=2)
    p.add_argument("--max-nodes", type=int, default=8)
    p.add_argument("--no-const", action="store_true",
                   help="exclude const nodes from patterns")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("mis", help="rank patterns by disjoint occurrences")
    p.add_argument("--graph", required=False, help="unused; kept for symmetry")
    p.add_argument("--patterns", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mis)

    p = sub.add_parser("merge", help="merge ranked patterns into a PE datapath")
    p.add_argument("--patterns", required=True)
    p.add_argument("--baseline", required=True,
                   help='JSON {"ops": [...]} baseline op set')
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--costs")
    p.add_argument("--out", required=True)
    p.add_argument("--dot", help="also write a DOT rendering")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("genpe", help="derive the PE spec from a merged datapath")
    p.add_argument("--pe", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_genpe)

    p = sub.add_parser("map", help="cover an application with PE instances")
    p.add_argument("--graph", required=True)
    p.add_argument("--pe", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("simulate", help="evaluate a graph on input vectors")
    p.add_argument("--graph", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cost", help="area/energy report for a mapped app")
    p.add_argument("--netlist", required=True)
    p.add_argument("--pe", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--costs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("pipeline", help="run every stage from one config")
    p.add_argument("--config", required=True,
                   help="TOML pipeline configuration")
    p.set_defaults(func=cmd_pipeline)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PEDSEError as exc:
        print(f"pe-dse {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"pe-dse {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
