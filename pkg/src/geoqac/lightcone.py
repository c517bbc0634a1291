"""Light cones, separability, and subset selection.

A forward light cone of qubit q grows layer by layer: whenever a CZ gate's
support meets the cone, the whole support joins it.  Single-qubit gates
never spread a cone.  The backward cone is the same process run from the
last layer to the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .circuit import Circuit, CircuitError, Layer, MultiCZGate, compose, erase


class AnalysisError(CircuitError):
    """An analysis precondition does not hold."""


@dataclass(frozen=True)
class LightCone:
    origin: int
    direction: str
    members: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be forward or backward")
        if self.origin not in self.members:
            raise ValueError("a light cone contains its origin")

    def __contains__(self, q: int) -> bool:
        return q in self.members

    def __len__(self) -> int:
        return len(self.members)

    @property
    def set(self) -> frozenset[int]:
        return frozenset(self.members)

    def is_interval(self) -> bool:
        return self.members[-1] - self.members[0] == len(self.members) - 1


def _grow(cone: set[int], layers: Iterable[Layer]) -> set[int]:
    for layer in layers:
        add = [g.support for g in layer.czs if cone.intersection(g.support)]
        for sup in add:
            cone.update(sup)
    return cone


def _make(c: Circuit, q: int, direction: str, members: set[int]) -> LightCone:
    cone = LightCone(q, direction, tuple(sorted(members)))
    if c.layout.kind == "line" and not cone.is_interval():
        raise AnalysisError(f"{direction} cone of qubit {q} is not an interval on a line layout")
    return cone


def forward_lightcone(c: Circuit, q: int, upto_layer: int | None = None) -> LightCone:
    """Cone of ``q`` after layers ``0 .. upto_layer - 1`` (all layers by default)."""
    if not 0 <= q < c.num_qubits:
        raise AnalysisError(f"qubit {q} outside circuit")
    layers = c.layers if upto_layer is None else c.layers[:upto_layer]
    return _make(c, q, "forward", _grow({q}, layers))


def backward_lightcone(c: Circuit, q: int, from_layer: int | None = None) -> LightCone:
    """Qubits that can influence ``q`` at the output (or before layer ``from_layer``)."""
    if not 0 <= q < c.num_qubits:
        raise AnalysisError(f"qubit {q} outside circuit")
    layers = c.layers if from_layer is None else c.layers[:from_layer]
    return _make(c, q, "backward", _grow({q}, reversed(layers)))


def forward_cones(c: Circuit, I: Iterable[int], upto_layer: int | None = None) -> dict[int, frozenset[int]]:
    return {i: forward_lightcone(c, i, upto_layer).set for i in sorted(set(I))}


def gate_weight(c: Circuit, layer: int, gate: MultiCZGate, I: Iterable[int]) -> int:
    """Number of cones of ``I`` (taken before ``layer``) that the gate's support meets."""
    if not 0 <= layer < len(c.layers) or gate not in c.layers[layer].czs:
        raise AnalysisError(f"gate {gate.support} not found in layer {layer}")
    cones = forward_cones(c, I, layer)
    sup = set(gate.support)
    return sum(1 for cone in cones.values() if cone & sup)


@dataclass
class SeparabilityCertificate:
    input_subset: tuple[int, ...]
    cones: dict[int, frozenset[int]]
    separable: bool
    witness: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.separable

    def to_dict(self) -> dict:
        return {
            "input_subset": list(self.input_subset),
            "separable": self.separable,
            "witness": None if self.witness is None else list(self.witness),
            "cones": {str(i): sorted(v) for i, v in self.cones.items()},
        }


def check_separable(c: Circuit, I: Iterable[int], upto_layer: int | None = None) -> SeparabilityCertificate:
    I = tuple(sorted(set(I)))
    cones = forward_cones(c, I, upto_layer)
    for i, j in combinations(I, 2):
        if cones[i] & cones[j]:
            return SeparabilityCertificate(I, cones, False, (i, j))
    return SeparabilityCertificate(I, cones, True)


def backward_disjoint_select(c: Circuit, I: Iterable[int]) -> tuple[int, ...]:
    """Every other element of sorted ``I`` (first, third, ...); their backward
    cones are checked to be pairwise disjoint."""
    if c.layout.kind != "line":
        raise AnalysisError("backward_disjoint_select needs a line layout")
    picked = tuple(sorted(set(I)))[::2]
    cones = {i: backward_lightcone(c, i).set for i in picked}
    for i, j in combinations(picked, 2):
        if cones[i] & cones[j]:
            raise AnalysisError(f"backward cones of {i} and {j} intersect; input set is not separable")
    return picked


# ---------------------------------------------------------------------------
# graphs


def _adjacency(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for u, v in edges:
        if u == v:
            raise AnalysisError("self loops are not allowed")
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def independent_set_deg2(vertices: Iterable[int], edges: Iterable[tuple[int, int]] = ()) -> set[int]:
    """Independent set of size >= ceil(|V|/2) in an acyclic graph of max degree 2.

    Each component is a path; walk it from its lower-id endpoint and keep
    every other vertex.
    """
    adj = _adjacency(vertices, edges)
    for v, nb in adj.items():
        if len(nb) > 2:
            raise AnalysisError(f"vertex {v} has degree {len(nb)} > 2")
    seen: set[int] = set()
    out: set[int] = set()
    for v in sorted(adj):
        if v in seen:
            continue
        comp = [v]
        stack = [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        n_edges = sum(len(adj[u]) for u in comp) // 2
        if n_edges != len(comp) - 1:
            raise AnalysisError("graph contains a cycle")
        ends = [u for u in comp if len(adj[u]) <= 1]
        cur, prev, take = min(ends), None, True
        while cur is not None:
            if take:
                out.add(cur)
            take = not take
            nxt = [w for w in adj[cur] if w != prev]
            prev, cur = cur, (nxt[0] if nxt else None)
    return out


def _two_color(adj: Mapping[int, set[int]]) -> dict[int, int] | None:
    color: dict[int, int] = {}
    for s in sorted(adj):
        if s in color:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in color:
                    color[w] = 1 - color[u]
                    stack.append(w)
                elif color[w] == color[u]:
                    return None
    return color


def independent_set(vertices: Iterable[int], edges: Iterable[tuple[int, int]] = ()) -> set[int]:
    """Independent set for general graphs: path walk when possible, else the
    larger colour class per component of a bipartite graph, else greedy."""
    vertices = list(vertices)
    edges = list(edges)
    try:
        return independent_set_deg2(vertices, edges)
    except AnalysisError:
        pass
    adj = _adjacency(vertices, edges)
    color = _two_color(adj)
    if color is not None:
        out: set[int] = set()
        seen: set[int] = set()
        for s in sorted(adj):
            if s in seen:
                continue
            comp, stack = [s], [s]
            seen.add(s)
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        comp.append(w)
                        stack.append(w)
            c0 = [u for u in comp if color[u] == 0]
            c1 = [u for u in comp if color[u] == 1]
            out.update(c0 if len(c0) >= len(c1) else c1)
        return out
    out = set()
    blocked: set[int] = set()
    for v in sorted(adj, key=lambda u: (len(adj[u]), u)):
        if v not in blocked:
            out.add(v)
            blocked.add(v)
            blocked.update(adj[v])
    return out


# ---------------------------------------------------------------------------
# structure selection


@dataclass
class Selection:
    """Outcome of one structure-selection step."""

    kept: tuple[int, ...]
    good: dict[tuple[int, ...], int] = field(default_factory=dict)  # good gate -> survivor
    a1: tuple[int, ...] = ()
    a2: tuple[int, ...] = ()
    a3: tuple[int, ...] = ()
    certificate: SeparabilityCertificate | None = None


def _select(cones: Mapping[int, frozenset[int]], supports: Sequence[tuple[int, ...]], deg2: bool) -> Selection:
    hits = {sup: [i for i in sorted(cones) if cones[i] & set(sup)] for sup in supports}
    good: dict[tuple[int, ...], int] = {}
    a1: set[int] = set()
    for sup, hit in hits.items():
        inside = [i for i in hit if cones[i] <= set(sup)]
        if inside:
            good[sup] = inside[0]
            a1.update(hit)
    touched = {i for hit in hits.values() for i in hit}
    a3 = sorted(i for i in cones if i not in touched)
    a2 = sorted(touched - a1)
    edges = set()
    for sup, hit in hits.items():
        if sup in good:
            continue
        members = [i for i in hit if i in set(a2)]
        for u, v in combinations(members, 2):
            edges.add((u, v))
    ind = independent_set_deg2(a2, edges) if deg2 else independent_set(a2, edges)
    kept = tuple(sorted(set(good.values()) | ind | set(a3)))
    return Selection(kept, good, tuple(sorted(a1)), tuple(a2), tuple(a3))


def _one_layer(c: Circuit, L: Layer) -> Circuit:
    return compose(c, c.with_layers((L,)))


def structure_select_1d(c: Circuit, I: Iterable[int], L: Layer, s: int) -> Selection:
    """Subset S of I, |S| >= ceil(|I|/s), such that L after c is S-separable."""
    if c.layout.kind != "line":
        raise AnalysisError("structure_select_1d needs a line layout")
    if s < 3:
        raise AnalysisError("s must be at least 3")
    I = sorted(set(I))
    cert = check_separable(c, I)
    if not cert:
        raise AnalysisError(f"circuit is not I-separable (witness {cert.witness})")
    cones = cert.cones
    for g in L.czs:
        w = sum(1 for i in I if cones[i] & set(g.support))
        if w > s:
            raise AnalysisError(f"gate {g.support} meets {w} > s = {s} cones")
    sel = _select(cones, [g.support for g in L.czs], deg2=True)
    sel.certificate = check_separable(_one_layer(c, L), sel.kept)
    if not sel.certificate:
        raise AnalysisError(f"selection is not separable (witness {sel.certificate.witness})")
    return sel


def width2_structure_select(c: Circuit, I: Iterable[int], L: Layer, s: int) -> Selection:
    """Width-2 lattice version: row-0 gates, row-1 gates, then column gates,
    each handled as a separate selection step."""
    lay = c.layout
    if lay.kind != "lattice" or lay.rows != 2:
        raise AnalysisError("width2_structure_select needs a lattice with 2 rows")
    if s < 1:
        raise AnalysisError("s must be positive")
    I = sorted(set(I))
    cert = check_separable(c, I)
    if not cert:
        raise AnalysisError(f"circuit is not I-separable (witness {cert.witness})")
    for g in L.czs:
        w = sum(1 for i in I if cert.cones[i] & set(g.support))
        if w > s:
            raise AnalysisError(f"gate {g.support} has weight {w} > s = {s}")

    def kind(g: MultiCZGate) -> int:
        rows = {lay.coord(q)[0] for q in g.support}
        if len(rows) == 2:
            return 2
        return rows.pop() if len(g.support) > 1 else 0

    groups = [[g for g in L.czs if kind(g) == k] for k in (0, 1, 2)]
    cur = c
    keep = I
    good: dict[tuple[int, ...], int] = {}
    for grp in groups:
        if not grp:
            continue
        cones = forward_cones(cur, keep)
        sel = _select(cones, [g.support for g in grp], deg2=False)
        good.update(sel.good)
        keep = list(sel.kept)
        cur = _one_layer(cur, Layer((), tuple(grp)))
    out = Selection(tuple(keep), good)
    out.certificate = check_separable(_one_layer(c, L), keep)
    if not out.certificate:
        raise AnalysisError(f"selection is not separable (witness {out.certificate.witness})")
    return out


def erase_gate(c: Circuit, layer: int, gate: MultiCZGate) -> Circuit:
    """Replace one CZ gate by the identity."""
    return erase(c, layer, gate)
