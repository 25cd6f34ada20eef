"""End-to-end orchestration: graph, CPT, the three SFT families, traces, mixing."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..analysis import scan_repository
from ..cpt import build_cpt_corpus, mix_corpus
from ..graph import CodeGraph, RelationKind, graph_stats, save_graph
from ..llm import Gateway
from ..sandbox import Limits, SandboxConfig
from ..sft.common import TestMatcher
from ..sft.composition import CompositionTask, TaskFormat, generate_tasks, mine_combinations, rule_filter_stage1
from ..sft.relation import Polarity, RelationSample, augment_relations, positive_samples, select_edges
from ..sft.traces import TracedSample, trace_composition, trace_relation, trace_utilization
from ..sft.utilization import (
    UtilizationSample,
    build_sample,
    compile_and_repair,
    execution_filter,
    header_hints,
    sandbox_for_repo,
)
from ..verdict import FilterVerdict
from .config import PipelineConfig
from .records import RecordKind, SftRecord, file_digest, read_jsonl, write_jsonl

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """A stage failed as a whole; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class StageCount:
    generated: int = 0
    accepted: int = 0
    rejected: int = 0
    skipped: int = 0

    @property
    def conserved(self) -> bool:
        return self.generated == self.accepted + self.rejected + self.skipped

    @property
    def rejection_rate(self) -> float:
        judged = self.accepted + self.rejected
        return self.rejected / judged if judged else 0.0

    def to_record(self) -> dict:
        return {
            "generated": self.generated,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "skipped": self.skipped,
            "rejection_rate": round(self.rejection_rate, 6),
        }


@dataclass
class RunReport:
    stages: dict[str, StageCount] = field(default_factory=dict)
    totals: dict[str, int] = field(default_factory=dict)
    digests: dict[str, str] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    generation_calls: dict[str, int] = field(default_factory=dict)
    diagnostics: dict[str, int] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    graph_stats: dict = field(default_factory=dict)

    def stage(self, name: str) -> StageCount:
        return self.stages.setdefault(name, StageCount())

    @property
    def conserved(self) -> bool:
        return all(s.conserved for s in self.stages.values())

    def to_record(self) -> dict:
        return {
            "stages": {k: v.to_record() for k, v in self.stages.items()},
            "totals": dict(self.totals),
            "digests": dict(sorted(self.digests.items())),
            "inputs": dict(sorted(self.inputs.items())),
            "generation_calls": dict(sorted(self.generation_calls.items())),
            "diagnostics": dict(sorted(self.diagnostics.items())),
            "errors": list(self.errors),
            "graph_stats": self.graph_stats,
            "conserved": self.conserved,
        }

    def to_text(self) -> str:
        width = max([len(k) for k in self.stages] + [5])
        lines = [f"{'stage':<{width}}  generated  accepted  rejected  skipped  reject%"]
        for k, s in self.stages.items():
            lines.append(
                f"{k:<{width}}  {s.generated:>9}  {s.accepted:>8}  {s.rejected:>8}  {s.skipped:>7}  {100 * s.rejection_rate:>6.1f}"
            )
        lines.append("")
        lines.extend(f"{k}: {v}" for k, v in self.totals.items())
        return "\n".join(lines)


# -- per-family drivers ----------------------------------------------------------


def _verdict_records(kind: str, verdicts: list[FilterVerdict]) -> list[dict]:
    return [{**v.to_record(), "kind": kind} for v in verdicts]


def _sft_record(ts: TracedSample, provenance: list[str], extra: dict) -> SftRecord:
    assert ts.trace is not None
    meta = {
        "accepted": True,
        "attempt_index": ts.trace.attempt_index,
        "provenance": provenance,
        "verdicts": [v.to_record() for v in ts.verdicts],
        **extra,
    }
    return SftRecord(ts.sample_id, RecordKind(ts.kind), ts.instruction, ts.context, ts.trace.reasoning_trace, ts.trace.response, meta)


def _tally(stage: StageCount, traced: TracedSample, trace_stage: StageCount) -> None:
    trace_stage.generated += 1
    if traced.trace is None:
        trace_stage.skipped += 1
        stage.skipped += 1
    elif traced.accepted:
        trace_stage.accepted += 1
        stage.accepted += 1
    else:
        trace_stage.rejected += 1
        stage.rejected += 1


def relation_samples(graph: CodeGraph, cfg: PipelineConfig, gateway: Gateway) -> list[RelationSample]:
    rc = cfg.relation
    edges = select_edges(graph, tuple(RelationKind(k) for k in rc.kinds), rc.per_kind_cap, cfg.seed)
    return augment_relations(positive_samples(graph, edges), graph, gateway, rc.n1, rc.n2, cfg.seed)


def run_relation(graph: CodeGraph, cfg: PipelineConfig, gateway: Gateway, report: RunReport, verdicts: list[dict]) -> list[SftRecord]:
    stage, tstage = report.stage("relation"), report.stage("trace")
    samples = relation_samples(graph, cfg, gateway)
    stage.generated += len(samples)
    live = []
    for s in samples:
        if s.skipped:
            stage.skipped += 1
            verdicts.extend(_verdict_records("relation", [FilterVerdict.fail(s.id, "augment", "skipped", s.skipped)]))
        else:
            live.append(s)
    traced = gateway.map(lambda s: trace_relation(s, gateway, cfg.seed), live)
    out = []
    for s, ts in zip(live, traced):
        _tally(stage, ts, tstage)
        verdicts.extend(_verdict_records("relation", ts.verdicts))
        if ts.accepted:
            prov = [x.entity_id for x in (s.edge.src, s.edge.dst) if x.entity_id]
            extra = {"polarity": s.polarity.value, "relation": s.edge.kind.value, "statement": s.statement, "paraphrases": s.paraphrases}
            if s.origin:
                extra["origin"] = s.origin
            out.append(_sft_record(ts, prov, extra))
    return out


def composition_tasks(graph: CodeGraph, cfg: PipelineConfig, gateway: Gateway, diagnostics: list | None = None):
    cc = cfg.composition
    combos = mine_combinations(graph, TestMatcher(), diagnostics)
    if cc.max_combinations is not None:
        combos = combos[: cc.max_combinations]
    formats = [TaskFormat(f) for f in cc.formats]
    results = gateway.map(lambda c: generate_tasks(c, graph, formats, tuple(cc.difficulty), gateway, cfg.seed), combos)
    tasks: list[CompositionTask] = []
    skips: list[FilterVerdict] = []
    requested = 0
    for r in results:
        tasks.extend(r.tasks)
        skips.extend(r.verdicts)
        requested += r.requested
    return tasks, skips, requested


def run_composition(graph: CodeGraph, cfg: PipelineConfig, gateway: Gateway, report: RunReport, verdicts: list[dict]) -> list[SftRecord]:
    stage, tstage = report.stage("composition"), report.stage("trace")
    tasks, skips, requested = composition_tasks(graph, cfg, gateway, graph.diagnostics)
    stage.generated += requested
    stage.skipped += len(skips)
    verdicts.extend(_verdict_records("composition", skips))
    live = []
    for t in tasks:
        v = rule_filter_stage1(t, graph)
        verdicts.extend(_verdict_records("composition", [v]))
        if v:
            live.append(t)
        else:
            stage.rejected += 1
    traced = gateway.map(lambda t: trace_composition(t, graph, gateway, cfg.seed), live)
    out = []
    for t, ts in zip(live, traced):
        _tally(stage, ts, tstage)
        verdicts.extend(_verdict_records("composition", ts.verdicts))
        if ts.accepted:
            prov = list(dict.fromkeys([t.source_test, *t.apis, *(c.entity_id for c in t.grading_criteria)]))
            extra = {
                "format": t.format.value,
                "difficulty": t.difficulty,
                "grading_criteria": [c.to_record() for c in t.grading_criteria],
                "reference_answer": t.reference_answer,
                "prompt_version": t.prompt_version,
            }
            out.append(_sft_record(ts, prov, extra))
    return out


def make_sandbox(graph: CodeGraph, repo: str | os.PathLike, cfg: PipelineConfig) -> SandboxConfig:
    s = cfg.utilization.sandbox
    return sandbox_for_repo(
        graph,
        repo,
        cfg.frontend.include_roots,
        cxx=s.cxx,
        cxx_flags=list(s.cxx_flags),
        python=s.python,
        limits=Limits(s.wall_seconds, s.output_bytes),
        workers=s.workers,
    )


def utilization_samples(
    graph: CodeGraph, sandbox: SandboxConfig, cfg: PipelineConfig, gateway: Gateway
) -> tuple[list[UtilizationSample], list[FilterVerdict], int]:
    """Decompose, repair and execution-filter every test.

    Returns (accepted samples, failure verdicts, number of tests seen).
    """
    tests = TestMatcher().tests(graph)
    hints = header_hints(graph, cfg.frontend.include_roots)

    def one(test):
        s = build_sample(test, graph, gateway, cfg.seed)
        if isinstance(s, FilterVerdict):
            return s, [s]
        s = compile_and_repair(s, sandbox, gateway, cfg.utilization.max_repair_iters, cfg.seed, hints)
        if s.rejected:
            return s, [FilterVerdict.fail(s.id, "compile", "repair-exhausted", s.last_diagnostic[-500:])]
        v = execution_filter(s, sandbox)
        return s, [FilterVerdict.ok(s.id, "compile"), v]

    kept, verdicts = [], []
    for s, vs in gateway.map(one, tests):
        verdicts.extend(vs)
        if isinstance(s, UtilizationSample) and all(vs):
            kept.append(s)
    return kept, verdicts, len(tests)


def run_utilization(
    graph: CodeGraph, repo: Path, cfg: PipelineConfig, gateway: Gateway, report: RunReport, verdicts: list[dict]
) -> list[SftRecord]:
    stage, tstage = report.stage("utilization"), report.stage("trace")
    tests = TestMatcher().tests(graph)
    if not tests:
        return []
    sandbox = make_sandbox(graph, repo, cfg)
    sandbox.check_toolchain()
    kept, vs, n = utilization_samples(graph, sandbox, cfg, gateway)
    stage.generated += n
    verdicts.extend(_verdict_records("utilization", vs))
    for v in vs:
        if not v:
            if v.stage == "decompose":
                stage.skipped += 1
            else:
                stage.rejected += 1
    traced = gateway.map(lambda s: trace_utilization(s, sandbox, gateway, cfg.seed), kept)
    out = []
    for s, ts in zip(kept, traced):
        _tally(stage, ts, tstage)
        verdicts.extend(_verdict_records("utilization", ts.verdicts))
        if ts.accepted:
            prov = list(dict.fromkeys([s.source_test, *sorted(s.context.entity_ids)]))
            extra = {
                "entry": s.entry,
                "functional_code": s.functional_code,
                "assertions": s.assertions,
                "repair_log": [r.to_record() for r in s.repair_log],
            }
            out.append(_sft_record(ts, prov, extra))
    return out


def _general_sft(path: str) -> list[dict]:
    _, recs = read_jsonl(path)
    out = []
    for i, r in enumerate(recs):
        out.append(
            SftRecord(
                str(r.get("id", f"general-{i}")),
                RecordKind(r.get("kind", "relation")),
                r["instruction"],
                None,
                r.get("reasoning_trace", ""),
                r["response"],
                {"accepted": True, "provenance": []},
                True,
            ).to_record()
        )
    return out


def run_pipeline(repo: str | os.PathLike, cfg: PipelineConfig, out_dir: str | os.PathLike, gateway: Gateway | None = None) -> RunReport:
    """Run every stage and write the corpora into ``out_dir``.

    Files: ``graph.jsonl``, ``cpt.jsonl``, ``sft_relation.jsonl``,
    ``sft_composition.jsonl``, ``sft_utilization.jsonl``, ``sft.jsonl``
    (mixed), ``verdicts.jsonl`` and ``report.json``. Per-sample failures
    end up in the verdict log; a stage-wide failure raises
    :class:`PipelineError`.
    """
    repo = Path(repo).resolve()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport()
    gateway = gateway or Gateway.from_config(cfg.gateway, cfg.seed)
    report.inputs["config"] = cfg.digest
    if cfg.gateway.backend == "replay" and cfg.gateway.replay_path:
        report.inputs["transcript"] = file_digest(cfg.gateway.replay_path)
    verdicts: list[dict] = []

    stage = "graph"
    try:
        graph = scan_repository(repo, cfg.frontend)
        report.inputs["repo"] = graph.content_hash
        save_graph(graph, out / "graph.jsonl")
        report.graph_stats = graph_stats(graph).to_record()
        g = report.stage("graph")
        g.generated = g.accepted = len(graph.entities)

        stage = "cpt"
        cpt = [s.to_record() for s in build_cpt_corpus(graph, cfg.cpt)]
        c = report.stage("cpt")
        c.generated = c.accepted = len(cpt)
        if cfg.mix.general_cpt and cfg.cpt.general_mix_ratio:
            _, general = read_jsonl(cfg.mix.general_cpt)
            cpt = mix_corpus(cpt, general, cfg.cpt.general_mix_ratio, cfg.seed)
        report.digests["cpt.jsonl"] = write_jsonl(out / "cpt.jsonl", "cpt", cpt)

        report.stage("trace")
        families: dict[str, list[SftRecord]] = {}
        stage = "relation"
        families["relation"] = run_relation(graph, cfg, gateway, report, verdicts)
        stage = "composition"
        families["composition"] = run_composition(graph, cfg, gateway, report, verdicts)
        stage = "utilization"
        families["utilization"] = run_utilization(graph, repo, cfg, gateway, report, verdicts)

        stage = "mix"
        all_records = []
        for kind, recs in families.items():
            rows = [r.to_record() for r in recs]
            report.digests[f"sft_{kind}.jsonl"] = write_jsonl(out / f"sft_{kind}.jsonl", "sft", rows, graph="graph.jsonl")
            report.totals[kind] = len(rows)
            all_records.extend(rows)
        mixed = all_records
        if cfg.mix.general_sft and cfg.mix.sft_ratio:
            mixed = mix_corpus(all_records, _general_sft(cfg.mix.general_sft), cfg.mix.sft_ratio, cfg.seed)
            report.totals["general"] = sum(1 for r in mixed if r["general"])
        report.digests["sft.jsonl"] = write_jsonl(out / "sft.jsonl", "sft", mixed, graph="graph.jsonl")
        report.digests["verdicts.jsonl"] = write_jsonl(out / "verdicts.jsonl", "verdicts", verdicts)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    report.generation_calls = dict(gateway.counter.by_role)
    for d in graph.diagnostics:
        report.diagnostics[d.tag] = report.diagnostics.get(d.tag, 0) + 1
    for name, s in report.stages.items():
        if not s.conserved:
            report.errors.append(f"stage {name} counts not conserved: {s.to_record()}")
    (out / "report.json").write_text(json.dumps(report.to_record(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return report


__all__ = [
    "PipelineError",
    "RunReport",
    "StageCount",
    "composition_tasks",
    "make_sandbox",
    "relation_samples",
    "run_pipeline",
    "utilization_samples",
]
