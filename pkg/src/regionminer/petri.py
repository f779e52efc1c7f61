"""Labelled Petri nets, workflow nets, replay and soundness checking.

Markings are sparse bags (place -> positive token count). Nets are
immutable after construction; replay, exploration and the checkers are
pure functions, safe to run in parallel over traces.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping
from xml.sax.saxutils import escape, quoteattr
import xml.etree.ElementTree as ET

from .errors import ParseError, ReplayError
from .eventlog import EventLog, Trace

Marking = dict[str, int]


class PetriNet:
    """Bipartite net: places, transitions, unit-weight arcs and a label
    per transition (None marks a silent transition)."""

    def __init__(
        self,
        places: Iterable[str],
        transitions: Iterable[str],
        arcs: Iterable[tuple[str, str]],
        labels: Mapping[str, str | None],
    ):
        self.places = frozenset(places)
        self.transitions = frozenset(transitions)
        self.arcs = frozenset(arcs)
        self.labels = dict(labels)
        if self.places & self.transitions:
            raise ValueError("places and transitions must be disjoint")
        nodes = self.places | self.transitions
        for source, target in self.arcs:
            if source not in nodes or target not in nodes:
                raise ValueError(f"arc ({source}, {target}) references unknown node")
            if (source in self.places) == (target in self.places):
                raise ValueError(f"arc ({source}, {target}) is not bipartite")
        for t in self.transitions:
            if t not in self.labels:
                raise ValueError(f"transition {t} has no label entry")
        self.preset: dict[str, frozenset[str]] = {n: frozenset() for n in nodes}
        self.postset: dict[str, frozenset[str]] = {n: frozenset() for n in nodes}
        pre: dict[str, set[str]] = {n: set() for n in nodes}
        post: dict[str, set[str]] = {n: set() for n in nodes}
        for source, target in self.arcs:
            post[source].add(target)
            pre[target].add(source)
        for n in nodes:
            self.preset[n] = frozenset(pre[n])
            self.postset[n] = frozenset(post[n])

    def silent_transitions(self) -> list[str]:
        return sorted(t for t in self.transitions if self.labels[t] is None)

    def visible_labels(self) -> set[str]:
        return {label for label in self.labels.values() if label is not None}

    def components(self):
        return (self.places, self.transitions, self.arcs, self.labels)

    def __eq__(self, other):
        return isinstance(other, PetriNet) and self.components() == other.components()

    def __repr__(self):
        return (
            f"PetriNet({len(self.places)} places, {len(self.transitions)} "
            f"transitions, {len(self.arcs)} arcs)"
        )


@dataclass(frozen=True)
class WorkflowNet:
    net: PetriNet
    source: str
    sink: str

    def initial_marking(self) -> Marking:
        return {self.source: 1}

    def final_marking(self) -> Marking:
        return {self.sink: 1}


def enabled(net: PetriNet, marking: Marking, transition: str) -> bool:
    if transition not in net.transitions:
        raise ValueError(f"unknown transition {transition}")
    return all(marking.get(p, 0) > 0 for p in net.preset[transition])


def fire(net: PetriNet, marking: Marking, transition: str) -> Marking:
    """Token update rule: consume one from each input-only place, produce
    one on each output-only place, self-loop places unchanged."""
    if not enabled(net, marking, transition):
        raise ValueError(f"transition {transition} is not enabled")
    result = dict(marking)
    pre = net.preset[transition]
    post = net.postset[transition]
    for p in pre - post:
        result[p] -= 1
        if result[p] == 0:
            del result[p]
    for p in post - pre:
        result[p] = result.get(p, 0) + 1
    return result


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    blocked_at: int | None
    final_marking: Marking
    fired: tuple[str, ...]


def _label_transition(net: PetriNet, label: str) -> str:
    matches = [t for t in net.transitions if net.labels[t] == label]
    if len(matches) != 1:
        raise ReplayError(
            f"label {label!r} maps to {len(matches)} transitions, need exactly one"
        )
    return matches[0]


def _fire_unique_silent(net, marking, fired) -> Marking | None:
    silents = [t for t in net.silent_transitions() if enabled(net, marking, t)]
    if len(silents) != 1:
        return None
    fired.append(silents[0])
    return fire(net, marking, silents[0])


def replay(wfnet: WorkflowNet, trace: Trace) -> ReplayResult:
    """Deterministic replay of a visible trace from the source place.

    Silent transitions fire greedily whenever the next visible transition
    is disabled and exactly one silent transition is enabled; discovery
    output has just the two wrapper silents at fixed positions, so this
    rule is complete there. The replay is ok when every event fired and
    the final marking is exactly one token on the sink.
    """
    net = wfnet.net
    marking = wfnet.initial_marking()
    fired: list[str] = []
    cap = len(net.transitions) + 1
    for index, label in enumerate(trace):
        transition = _label_transition(net, label)
        hops = 0
        while not enabled(net, marking, transition):
            advanced = _fire_unique_silent(net, marking, fired)
            hops += 1
            if advanced is None or hops > cap:
                return ReplayResult(False, index, marking, tuple(fired))
            marking = advanced
        marking = fire(net, marking, transition)
        fired.append(transition)
    hops = 0
    while marking != wfnet.final_marking():
        advanced = _fire_unique_silent(net, marking, fired)
        hops += 1
        if advanced is None or hops > cap:
            return ReplayResult(False, len(trace), marking, tuple(fired))
        marking = advanced
    return ReplayResult(True, None, marking, tuple(fired))


def is_wf_net(net: PetriNet, source: str, sink: str) -> tuple[bool, list[str]]:
    """Structural workflow-net conditions: no arc into the source, none out
    of the sink, and every node on a source-to-sink path."""
    violations: list[str] = []
    if source not in net.places or sink not in net.places:
        return False, [f"missing boundary place {source}/{sink}"]
    if source == sink:
        return False, ["source equals sink"]
    if net.preset[source]:
        violations.append(f"source has incoming arcs: {sorted(net.preset[source])}")
    if net.postset[sink]:
        violations.append(f"sink has outgoing arcs: {sorted(net.postset[sink])}")

    def sweep(origin: str, mapping) -> set[str]:
        seen = {origin}
        queue = [origin]
        while queue:
            for nxt in mapping[queue.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    forward = sweep(source, net.postset)
    backward = sweep(sink, net.preset)
    for node in sorted(net.places | net.transitions):
        if node not in forward or node not in backward:
            violations.append(node)
    return (not violations, violations)


def relaxed_soundness_witnesses(
    wfnet: WorkflowNet, log: EventLog
) -> dict[str, Trace | None]:
    """Per transition, the first log trace whose replay fires it and ends
    on the sink; full coverage certifies relaxed soundness constructively."""
    witnesses: dict[str, Trace | None] = {t: None for t in wfnet.net.transitions}
    for trace in sorted(log.traces):
        result = replay(wfnet, trace)
        if not result.ok:
            continue
        for t in set(result.fired):
            if witnesses[t] is None:
                witnesses[t] = trace
    return witnesses


def _marking_key(marking: Marking) -> tuple[tuple[str, int], ...]:
    return tuple(sorted(marking.items()))


@dataclass(frozen=True)
class ReachabilityGraph:
    initial: tuple
    markings: dict
    edges: tuple
    complete: bool


def explore_state_space(
    net: PetriNet, marking: Marking, bound: int = 100000
) -> ReachabilityGraph:
    """Breadth-first reachability up to ``bound`` distinct markings; the
    result says whether exploration exhausted the state space."""
    if bound < 1:
        raise ValueError("bound must be at least 1")
    start = _marking_key(marking)
    markings = {start: dict(marking)}
    edges: list[tuple[tuple, str, tuple]] = []
    queue = deque([start])
    complete = True
    while queue:
        key = queue.popleft()
        state = markings[key]
        for t in sorted(net.transitions):
            if not enabled(net, state, t):
                continue
            successor = fire(net, state, t)
            successor_key = _marking_key(successor)
            if successor_key not in markings:
                if len(markings) >= bound:
                    complete = False
                    continue
                markings[successor_key] = successor
                queue.append(successor_key)
            edges.append((key, t, successor_key))
    return ReachabilityGraph(
        initial=start, markings=markings, edges=tuple(edges), complete=complete
    )


def relaxed_soundness_by_exploration(
    wfnet: WorkflowNet, bound: int = 100000
) -> str:
    """Direct decision over the reachability graph: "sound", "unsound", or
    "undecided" when the bound cut exploration short."""
    graph = explore_state_space(wfnet.net, wfnet.initial_marking(), bound)
    if not graph.complete:
        return "undecided"
    final = _marking_key(wfnet.final_marking())
    backward: dict[tuple, set[tuple]] = {}
    for origin, _t, target in graph.edges:
        backward.setdefault(target, set()).add(origin)
    co_reachable = set()
    if final in graph.markings:
        co_reachable.add(final)
        queue = [final]
        while queue:
            for origin in backward.get(queue.pop(), ()):
                if origin not in co_reachable:
                    co_reachable.add(origin)
                    queue.append(origin)
    fireable = {
        t
        for origin, t, target in graph.edges
        if target in co_reachable
    }
    return "sound" if fireable == wfnet.net.transitions else "unsound"


def export_pnml(wfnet: WorkflowNet) -> bytes:
    """Standard place/transition/arc vocabulary; silent transitions carry
    an invisible toolspecific tag; byte-stable for identical nets."""
    net = wfnet.net
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<pnml>",
        '  <net id="net1" type="http://www.pnml.org/version-2009/grammar/ptnet">',
        '    <page id="page1">',
    ]
    initial = wfnet.initial_marking()
    for place in sorted(net.places):
        lines.append(f"      <place id={quoteattr(place)}>")
        lines.append(f"        <name><text>{escape(place)}</text></name>")
        tokens = initial.get(place, 0)
        if tokens:
            lines.append(
                f"        <initialMarking><text>{tokens}</text></initialMarking>"
            )
        lines.append("      </place>")
    for transition in sorted(net.transitions):
        label = net.labels[transition]
        lines.append(f"      <transition id={quoteattr(transition)}>")
        lines.append(
            f"        <name><text>{escape(label) if label is not None else ''}</text></name>"
        )
        if label is None:
            lines.append(
                '        <toolspecific tool="regionminer" version="0.1" invisible="true"/>'
            )
        lines.append("      </transition>")
    for index, (source, target) in enumerate(sorted(net.arcs)):
        lines.append(
            f'      <arc id="arc{index}" source={quoteattr(source)} '
            f"target={quoteattr(target)}/>"
        )
    lines.extend(["    </page>", "  </net>", "</pnml>", ""])
    return "\n".join(lines).encode("utf-8")


def parse_pnml(data: bytes | str) -> WorkflowNet:
    """Rebuild a workflow net from PNML; the unique place without incoming
    arcs becomes the source, the unique place without outgoing arcs the
    sink."""
    try:
        root = ET.fromstring(data if isinstance(data, bytes) else data.encode("utf-8"))
    except ET.ParseError as exc:
        raise ParseError(f"malformed PNML document: {exc}") from exc

    def local(tag: str) -> str:
        return tag.rsplit("}", 1)[-1]

    places: list[str] = []
    transitions: list[str] = []
    labels: dict[str, str | None] = {}
    arcs: list[tuple[str, str]] = []
    for element in root.iter():
        kind = local(element.tag)
        if kind == "place":
            places.append(element.attrib["id"])
        elif kind == "transition":
            tid = element.attrib["id"]
            transitions.append(tid)
            label: str | None = None
            invisible = False
            for child in element:
                if local(child.tag) == "name":
                    for text_el in child:
                        if local(text_el.tag) == "text":
                            label = text_el.text or ""
                elif local(child.tag) == "toolspecific":
                    if child.get("invisible") == "true" or child.get("activity") == "$invisible$":
                        invisible = True
            labels[tid] = None if invisible or not label else label
        elif kind == "arc":
            arcs.append((element.attrib["source"], element.attrib["target"]))
    net = PetriNet(places, transitions, arcs, labels)
    sources = sorted(p for p in net.places if not net.preset[p])
    sinks = sorted(p for p in net.places if not net.postset[p])
    if len(sources) != 1 or len(sinks) != 1:
        raise ParseError(
            f"not a workflow net: {len(sources)} source place(s), "
            f"{len(sinks)} sink place(s)"
        )
    return WorkflowNet(net=net, source=sources[0], sink=sinks[0])


def export_dot(wfnet: WorkflowNet) -> str:
    """Graphviz rendering: circles for places (token dots on marked ones),
    boxes for transitions, filled black boxes for silent ones."""
    net = wfnet.net
    initial = wfnet.initial_marking()
    lines = ["digraph wfnet {", "  rankdir=LR;"]
    for place in sorted(net.places):
        tokens = initial.get(place, 0)
        label = "&bull;" * tokens
        lines.append(
            f"  {quoteattr(place)} [shape=circle, label=\"{label}\", xlabel={quoteattr(place)}];"
        )
    for transition in sorted(net.transitions):
        label = net.labels[transition]
        if label is None:
            lines.append(
                f"  {quoteattr(transition)} [shape=box, label=\"\", style=filled, fillcolor=black];"
            )
        else:
            lines.append(f"  {quoteattr(transition)} [shape=box, label={quoteattr(label)}];")
    for source, target in sorted(net.arcs):
        lines.append(f"  {quoteattr(source)} -> {quoteattr(target)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
