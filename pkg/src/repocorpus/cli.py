"""Command-line entry point: ``repocorpus <group> <command> [options]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .analysis import FrontendConfig, ScanError, scan_repository
from .corpus.config import ConfigError, PipelineConfig, load_config
from .corpus.pipeline import (
    PipelineError,
    composition_tasks,
    make_sandbox,
    relation_samples,
    run_pipeline,
    utilization_samples,
)
from .corpus.records import (
    CorpusReadError,
    RecordKind,
    SftRecord,
    read_jsonl,
    read_samples,
    validate_corpus,
    write_jsonl,
    write_samples,
)
from .cpt import CptConfig, build_cpt_corpus, mix_corpus
from .graph import graph_stats, load_graph, save_graph
from .llm import Gateway
from .sandbox import ExecOutcome, compilation_at_k, group_outcomes, load_attempts, load_tasks, pass_at_k, run_attempt
from .sandbox.runner import SandboxConfig
from .sft.composition import rule_filter_stage1
from .sft.traces import trace_composition, trace_relation, trace_utilization
from .sft.utilization import execution_filter

log = logging.getLogger("repocorpus")


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    gw = cfg.gateway
    if getattr(args, "replay", None):
        gw = dataclasses.replace(gw, backend="replay", replay_path=args.replay)
    if getattr(args, "record", None):
        gw = dataclasses.replace(gw, record_path=args.record)
    cfg.gateway = gw
    return cfg


def _gateway(cfg: PipelineConfig) -> Gateway:
    return Gateway.from_config(cfg.gateway, cfg.seed)


def _frontend(args, cfg: PipelineConfig) -> FrontendConfig:
    fe = cfg.frontend
    lang = getattr(args, "lang", None) or fe.language
    roots = getattr(args, "include_root", None) or (fe.include_roots if lang == fe.language else ["."])
    excludes = list(fe.exclude_globs) + list(getattr(args, "exclude", None) or [])
    return FrontendConfig(lang, list(roots), excludes, fe.follow_symlinks, getattr(args, "workers", None) or fe.workers)


def _verdict_path(args) -> Path:
    return Path(args.verdicts) if getattr(args, "verdicts", None) else Path(args.out).with_suffix(".verdicts.jsonl")


def _write_verdicts(path: Path, kind: str, verdicts) -> None:
    write_jsonl(path, "verdicts", ({**v.to_record(), "kind": kind} for v in verdicts))


# -- graph ------------------------------------------------------------------------


def cmd_graph_build(args) -> int:
    cfg = _config(args)
    graph = scan_repository(args.root, _frontend(args, cfg))
    save_graph(graph, args.out)
    tags: dict[str, int] = {}
    for d in graph.diagnostics:
        tags[d.tag] = tags.get(d.tag, 0) + 1
    print(f"{len(graph.entities)} entities, {len(graph.relations)} relations -> {args.out}")
    if tags:
        print("diagnostics: " + ", ".join(f"{k}={v}" for k, v in sorted(tags.items())))
    return 0


def cmd_graph_stats(args) -> int:
    cfg = _config(args)
    if args.input:
        graph = load_graph(args.input)
        title = Path(args.input).stem
    elif args.root:
        graph = scan_repository(args.root, _frontend(args, cfg))
        title = Path(args.root).resolve().name
    else:
        raise SystemExit("graph stats needs --in or --root")
    stats = graph_stats(graph)
    if args.format in ("text", "both"):
        print(stats.to_text())
    if args.format in ("json", "both"):
        print(json.dumps(stats.to_record(), sort_keys=True))
    if args.figures:
        from .report import plot_graph_stats

        path = plot_graph_stats(stats, Path(args.figures) / f"graph_stats_{title}.png", title)
        print(f"figure: {path}", file=sys.stderr)
    return 0


# -- cpt / corpus ----------------------------------------------------------------


def cmd_cpt_generate(args) -> int:
    cfg = _config(args)
    base = cfg.cpt
    cpt = CptConfig(
        context_limit=args.limit or base.context_limit,
        max_paths_per_root=args.max_paths or base.max_paths_per_root,
        emit_tail_window=base.emit_tail_window if args.tail is None else args.tail,
        pointer_mode=args.mode or base.pointer_mode,
        general_mix_ratio=base.general_mix_ratio,
        seed=cfg.seed,
    )
    samples = build_cpt_corpus(load_graph(args.graph), cpt)
    write_jsonl(args.out, "cpt", (s.to_record() for s in samples))
    print(f"{len(samples)} CPT samples -> {args.out}")
    return 0


def cmd_corpus_mix(args) -> int:
    head, domain = read_jsonl(args.domain)
    _, general = read_jsonl(args.general)
    seed = args.seed if args.seed is not None else _config(args).seed
    mixed = mix_corpus(domain, general, args.ratio, seed)
    meta = {k: v for k, v in head.items() if k not in ("format", "schema", "version")}
    write_jsonl(args.out, head["schema"], mixed, **meta)
    print(f"{len(mixed)} records ({sum(r['general'] for r in mixed)} general) -> {args.out}")
    return 0


def cmd_corpus_validate(args) -> int:
    graph = load_graph(args.graph) if args.graph else None
    violations = validate_corpus(args.path, graph)
    for v in violations:
        print(v)
    print(f"{len(violations)} violation(s)")
    return 1 if violations else 0


# -- sft ---------------------------------------------------------------------------


def cmd_sft_relation(args) -> int:
    cfg = _config(args)
    rc = cfg.relation
    rc.n1 = rc.n1 if args.n1 is None else args.n1
    rc.n2 = rc.n2 if args.n2 is None else args.n2
    if args.kinds:
        rc.kinds = args.kinds.split(",")
    if args.cap is not None:
        rc.per_kind_cap = args.cap
    rc.__post_init__()
    graph = load_graph(args.graph)
    samples = relation_samples(graph, cfg, _gateway(cfg))
    write_samples(args.out, RecordKind.RELATION, samples, graph=str(Path(args.graph).resolve()))
    skipped = sum(1 for s in samples if s.skipped)
    print(f"{len(samples)} relation samples ({skipped} skipped) -> {args.out}")
    return 0


def _difficulty(text: str) -> list[int]:
    lo, _, hi = text.partition("..")
    return [int(lo), int(hi or lo)]


def cmd_sft_composition(args) -> int:
    cfg = _config(args)
    cc = cfg.composition
    if args.formats:
        cc.formats = args.formats.split(",")
    if args.difficulty:
        cc.difficulty = _difficulty(args.difficulty)
    cc.__post_init__()
    graph = load_graph(args.graph)
    tasks, skips, requested = composition_tasks(graph, cfg, _gateway(cfg), graph.diagnostics)
    write_samples(args.out, RecordKind.COMPOSITION, tasks, graph=str(Path(args.graph).resolve()))
    _write_verdicts(_verdict_path(args), "composition", skips)
    print(f"{len(tasks)} of {requested} composition tasks designed ({len(skips)} skipped) -> {args.out}")
    return 0


def cmd_sft_utilization(args) -> int:
    cfg = _config(args)
    if args.include_root:
        cfg.frontend.include_roots = list(args.include_root)
    graph = load_graph(args.graph)
    sandbox = make_sandbox(graph, args.repo, cfg)
    sandbox.check_toolchain()
    kept, verdicts, n = utilization_samples(graph, sandbox, cfg, _gateway(cfg))
    meta = {"graph": str(Path(args.graph).resolve()), "repo": str(Path(args.repo).resolve()), "include_roots": cfg.frontend.include_roots}
    write_samples(args.out, RecordKind.UTILIZATION, kept, **meta)
    _write_verdicts(_verdict_path(args), "utilization", verdicts)
    print(f"{len(kept)} of {n} tests kept as utilization samples -> {args.out}")
    return 0


def _sandbox(args, cfg: PipelineConfig, head: dict, graph):
    roots = args.include_root or head.get("include_roots")
    if roots:
        cfg.frontend.include_roots = list(roots)
    repo = args.repo or head.get("repo")
    if not repo:
        raise SystemExit("no repository: pass --repo")
    return make_sandbox(graph, repo, cfg)


def _load_context(args):
    kind, head, samples = read_samples(args.samples)
    gpath = args.graph or head.get("graph")
    if not gpath:
        raise SystemExit("no graph: pass --graph")
    return kind, head, samples, load_graph(gpath), gpath


def cmd_filter(args) -> int:
    """Rule filters that need no model: stage 1 for composition, execution for utilization."""
    cfg = _config(args)
    kind, head, samples, graph, gpath = _load_context(args)
    verdicts = []
    kept = []
    if kind is RecordKind.COMPOSITION:
        for t in samples:
            v = rule_filter_stage1(t, graph)
            verdicts.append(v)
            if v:
                kept.append(t)
    elif kind is RecordKind.UTILIZATION:
        sandbox = _sandbox(args, cfg, head, graph)
        for s in samples:
            v = execution_filter(s, sandbox)
            verdicts.append(v)
            if v:
                kept.append(s)
    else:
        kept = [s for s in samples if not s.skipped]
    meta = {k: v for k, v in head.items() if k not in ("format", "schema", "version")}
    write_samples(args.out, kind, kept, **meta)
    _write_verdicts(_verdict_path(args), kind.value, verdicts)
    print(f"{len(kept)} of {len(samples)} {kind.value} samples passed -> {args.out}")
    return 0


def cmd_trace(args) -> int:
    cfg = _config(args)
    kind, head, samples, graph, gpath = _load_context(args)
    gw = _gateway(cfg)
    if kind is RecordKind.RELATION:
        live = [s for s in samples if not s.skipped]
        traced = gw.map(lambda s: trace_relation(s, gw, cfg.seed), live)
        prov = [[x.entity_id for x in (s.edge.src, s.edge.dst) if x.entity_id] for s in live]
    elif kind is RecordKind.COMPOSITION:
        live = samples
        traced = gw.map(lambda t: trace_composition(t, graph, gw, cfg.seed), live)
        prov = [list(dict.fromkeys([t.source_test, *t.apis])) for t in live]
    else:
        live = samples
        sandbox = _sandbox(args, cfg, head, graph)
        traced = gw.map(lambda s: trace_utilization(s, sandbox, gw, cfg.seed), live)
        prov = [list(dict.fromkeys([s.source_test, *sorted(s.context.entity_ids)])) for s in live]
    records, verdicts = [], []
    for ts, p in zip(traced, prov):
        verdicts.extend(ts.verdicts)
        if ts.accepted:
            meta = {"accepted": True, "attempt_index": ts.trace.attempt_index, "provenance": p, "verdicts": [v.to_record() for v in ts.verdicts]}
            records.append(SftRecord(ts.sample_id, kind, ts.instruction, ts.context, ts.trace.reasoning_trace, ts.trace.response, meta).to_record())
    write_jsonl(args.out, "sft", records, graph=str(Path(gpath).resolve()))
    _write_verdicts(_verdict_path(args), kind.value, verdicts)
    print(f"{len(records)} of {len(live)} {kind.value} samples accepted -> {args.out}")
    return 0


# -- eval / run --------------------------------------------------------------------


def cmd_eval_run(args) -> int:
    cfg = _config(args)
    tasks = load_tasks(args.tasks)
    attempts = load_attempts(args.attempts)
    s = cfg.utilization.sandbox
    outcomes: list[ExecOutcome] = []
    for a in attempts:
        task = tasks.get(a["task_id"])
        if task is None:
            raise SystemExit(f"attempt for unknown task {a['task_id']}")
        sb = SandboxConfig(
            task.language,
            cxx=s.cxx,
            cxx_flags=list(s.cxx_flags),
            include_dirs=list(args.include or []),
            sources=list(args.source or []),
            python=s.python,
            python_path=list(args.include or []),
        )
        outcomes.append(run_attempt(task.id, a["code"], task.tests, sb, int(a["attempt_index"])))
    grouped = group_outcomes(outcomes)
    ks = [int(k) for k in str(args.k).split(",")]
    metrics = [m.strip() for m in args.metric.split(",")]
    fns = {"pass": pass_at_k, "compile": compilation_at_k}
    unknown = [m for m in metrics if m not in fns]
    if unknown:
        raise SystemExit(f"unknown metric(s): {', '.join(unknown)}")
    rows = []
    for m in metrics:
        for k in ks:
            v = fns[m](grouped, k)
            rows.append({"metric": f"{m}@{k}", "k": k, "value": float(v), "exact": f"{v.numerator}/{v.denominator}"})
    print("metric\tk\tvalue\texact")
    for r in rows:
        print(f"{r['metric']}\t{r['k']}\t{r['value']:.4f}\t{r['exact']}")
    if args.out:
        write_jsonl(args.out, "outcomes", (o.to_record() for o in outcomes))
    if args.figures:
        from .report import plot_metrics

        series = {m: [(r["k"], r["value"]) for r in rows if r["metric"].startswith(m + "@")] for m in metrics}
        print(f"figure: {plot_metrics(series, Path(args.figures) / 'metrics.png')}", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    cfg.frontend = _frontend(args, cfg)
    report = run_pipeline(args.repo, cfg, args.out, _gateway(cfg))
    print(report.to_text())
    if args.figures:
        from .report import plot_graph_stats, plot_run_report
        from .graph import StatsReport

        fig_dir = Path(args.figures)
        plot_run_report(report.to_record()["stages"], fig_dir / "run_report.png")
        plot_graph_stats(StatsReport(**report.graph_stats), fig_dir / "graph_stats.png", Path(args.repo).resolve().name)
        print(f"figures: {fig_dir}", file=sys.stderr)
    return 1 if report.errors else 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config (YAML or JSON)")
    common.add_argument("--log-level", default="WARNING")

    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--replay", help="answer generation requests from this transcript")
    gen.add_argument("--record", help="append every generation exchange to this transcript")

    front = argparse.ArgumentParser(add_help=False)
    front.add_argument("--lang", choices=["cpp", "python"])
    front.add_argument("--include-root", action="append", help="include/import root (repeatable)")
    front.add_argument("--exclude", action="append", help="exclude glob (repeatable)")
    front.add_argument("--workers", type=int)

    p = argparse.ArgumentParser(prog="repocorpus", description="Repository-grounded training corpus construction.", parents=[common])
    groups = p.add_subparsers(dest="group", required=True)

    g = groups.add_parser("graph", help="build or inspect code graphs", parents=[common]).add_subparsers(dest="cmd", required=True)
    b = g.add_parser("build", parents=[common, front])
    b.add_argument("--root", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(fn=cmd_graph_build)
    s = g.add_parser("stats", parents=[common, front])
    s.add_argument("--in", dest="input")
    s.add_argument("--root", help="scan a checkout instead of loading a graph file")
    s.add_argument("--format", choices=["text", "json", "both"], default="both")
    s.add_argument("--figures", help="directory for PNG figures")
    s.set_defaults(fn=cmd_graph_stats)

    c = groups.add_parser("cpt", help="dependency-ordered pretraining windows", parents=[common]).add_subparsers(dest="cmd", required=True)
    cg = c.add_parser("generate", parents=[common, gen])
    cg.add_argument("--graph", required=True)
    cg.add_argument("--limit", type=int, help="context limit L in tokens")
    cg.add_argument("--mode", choices=["overlap_one", "step_one"])
    cg.add_argument("--max-paths", type=int)
    cg.add_argument("--tail", action=argparse.BooleanOptionalAction, default=None)
    cg.add_argument("--out", required=True)
    cg.set_defaults(fn=cmd_cpt_generate)

    co = groups.add_parser("corpus", help="mix and validate corpora", parents=[common]).add_subparsers(dest="cmd", required=True)
    m = co.add_parser("mix", parents=[common])
    m.add_argument("--domain", required=True)
    m.add_argument("--general", required=True)
    m.add_argument("--ratio", type=float, required=True)
    m.add_argument("--seed", type=int)
    m.add_argument("--out", required=True)
    m.set_defaults(fn=cmd_corpus_mix)
    v = co.add_parser("validate", parents=[common])
    v.add_argument("path")
    v.add_argument("--graph")
    v.set_defaults(fn=cmd_corpus_validate)

    sf = groups.add_parser("sft", help="generate one family of instruction samples", parents=[common]).add_subparsers(dest="cmd", required=True)
    r = sf.add_parser("relation", parents=[common, gen])
    r.add_argument("--graph", required=True)
    r.add_argument("--n1", type=int)
    r.add_argument("--n2", type=int)
    r.add_argument("--kinds", help="comma-separated relation kinds")
    r.add_argument("--cap", type=int, help="per-kind edge cap")
    r.add_argument("--out", required=True)
    r.set_defaults(fn=cmd_sft_relation)
    cp = sf.add_parser("composition", parents=[common, gen])
    cp.add_argument("--graph", required=True)
    cp.add_argument("--formats", help="comma list of qa,blank,prog")
    cp.add_argument("--difficulty", help="range lo..hi")
    cp.add_argument("--verdicts")
    cp.add_argument("--out", required=True)
    cp.set_defaults(fn=cmd_sft_composition)
    u = sf.add_parser("utilization", parents=[common, gen])
    u.add_argument("--graph", required=True)
    u.add_argument("--repo", required=True)
    u.add_argument("--include-root", action="append")
    u.add_argument("--verdicts")
    u.add_argument("--out", required=True)
    u.set_defaults(fn=cmd_sft_utilization)

    f = groups.add_parser("filter", parents=[common, gen], help="rule filters over a sample file")
    f.add_argument("--samples", required=True)
    f.add_argument("--graph")
    f.add_argument("--repo")
    f.add_argument("--include-root", action="append")
    f.add_argument("--verdicts")
    f.add_argument("--out", required=True)
    f.set_defaults(fn=cmd_filter)

    t = groups.add_parser("trace", parents=[common, gen], help="reasoning traces with rejection sampling")
    t.add_argument("--samples", required=True)
    t.add_argument("--graph")
    t.add_argument("--repo")
    t.add_argument("--include-root", action="append")
    t.add_argument("--verdicts")
    t.add_argument("--out", required=True)
    t.set_defaults(fn=cmd_trace)

    e = groups.add_parser("eval", help="compilation@k and pass@k over attempt files", parents=[common]).add_subparsers(dest="cmd", required=True)
    er = e.add_parser("run", parents=[common])
    er.add_argument("--tasks", required=True)
    er.add_argument("--attempts", required=True)
    er.add_argument("--k", default="1")
    er.add_argument("--metric", default="pass,compile")
    er.add_argument("--include", action="append", help="include dir / python path (repeatable)")
    er.add_argument("--source", action="append", help="extra C++ source to link (repeatable)")
    er.add_argument("--out", help="write per-attempt outcomes here")
    er.add_argument("--figures")
    er.set_defaults(fn=cmd_eval_run)

    rn = groups.add_parser("run", parents=[common, gen, front], help="the full pipeline")
    rn.add_argument("--repo", required=True)
    rn.add_argument("--out", required=True)
    rn.add_argument("--figures")
    rn.set_defaults(fn=cmd_run)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, CorpusReadError, ScanError, PipelineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
