"""Reasoning-trace generation with per-family acceptors.

Every sample family asks the reasoning model for a (trace, response) pair
given the instruction and the ground-truth context, and keeps the first
candidate its acceptor passes.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..context import ContextBundle
from ..graph import CodeGraph
from ..llm import Gateway, GatewayError, GenRequest, Role, TraceResult
from ..sandbox import SandboxConfig
from ..verdict import FilterVerdict
from .composition import CompositionTask, consistency_filter_stage2, extract_code
from .relation import RelationSample, ground_truth_response, relation_instruction
from .utilization import UtilizationSample, execution_filter, utilization_instruction


@dataclass
class TracedSample:
    """A sample after trace generation; ``verdicts`` holds every filter decision."""

    sample_id: str
    kind: str
    instruction: str
    context: ContextBundle
    trace: TraceResult | None
    verdicts: list[FilterVerdict]

    @property
    def accepted(self) -> bool:
        return self.trace is not None and self.trace.accepted


def _request(instruction: str, context: ContextBundle, answer: str, gateway: Gateway, seed: int) -> GenRequest:
    prompt = f"{instruction}\n\nThink through the relevant code before answering."
    return GenRequest(Role.TRACE_GENERATION, prompt, context, gateway.sampling(seed), hints={"answer": answer})


def _sample(sid: str, kind: str, instruction: str, context: ContextBundle, answer: str, gateway: Gateway, seed: int, check) -> TracedSample:
    """Run rejection sampling; ``check(response)`` returns a FilterVerdict."""
    verdicts: list[FilterVerdict] = []

    def acceptor(cand: TraceResult) -> bool:
        if not cand.reasoning_trace.strip() or not cand.response.strip():
            v = FilterVerdict.fail(sid, "trace", "empty-trace", f"attempt {cand.attempt_index}")
        else:
            v = check(cand.response)
        verdicts.append(v)
        return bool(v)

    try:
        result = gateway.rejection_sample(_request(instruction, context, answer, gateway, seed), acceptor)
    except GatewayError as exc:
        return TracedSample(sid, kind, instruction, context, None, [FilterVerdict.fail(sid, "trace", "gateway", str(exc))])
    return TracedSample(sid, kind, instruction, context, result, verdicts)


def trace_relation(sample: RelationSample, gateway: Gateway, seed: int = 0) -> TracedSample:
    truth = ground_truth_response(sample)
    instruction = relation_instruction(sample.statement)

    def check(response: str) -> FilterVerdict:
        v = gateway.judge_consistency(truth, response, sample.context, seed, instruction)
        if v.consistent:
            return FilterVerdict.ok(sample.id, "judge", v.rationale)
        return FilterVerdict.fail(sample.id, "judge", "inconsistent", v.rationale)

    return _sample(sample.id, "relation", instruction, sample.context, truth, gateway, seed, check)


def trace_composition(task: CompositionTask, graph: CodeGraph, gateway: Gateway, seed: int = 0) -> TracedSample:
    return _sample(
        task.id,
        "composition",
        task.statement,
        task.context,
        task.reference_answer,
        gateway,
        seed,
        lambda response: consistency_filter_stage2(task, response, gateway, graph, seed),
    )


def trace_utilization(sample: UtilizationSample, sandbox: SandboxConfig, gateway: Gateway, seed: int = 0) -> TracedSample:
    """The response must be code that passes the extracted assertions."""
    answer = f"```{sample.language}\n{sample.functional_code.rstrip()}\n```"
    return _sample(
        sample.id,
        "utilization",
        utilization_instruction(sample),
        sample.context,
        answer,
        gateway,
        seed,
        lambda response: execution_filter(sample, sandbox, extract_code(response)),
    )


__all__ = ["TracedSample", "trace_composition", "trace_relation", "trace_utilization"]
