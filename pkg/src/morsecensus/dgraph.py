"""Oriented, Morse-index-marked intersection graphs of all-real states."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx

from .vmcore import VirtualMorsification


class UnsupportedState(ValueError):
    pass


class InvalidGraph(ValueError):
    pass


@dataclass(frozen=True)
class DGraph:
    marks: tuple[int, ...]  # Morse index per vertex
    mult: tuple[tuple[int, ...], ...]  # signed edge multiplicity, symmetric
    arrows: frozenset[tuple[int, int]]  # (u, v): edge oriented from lower to higher value

    @property
    def n(self) -> int:
        return len(self.marks)


def extract_dgraph(vm: VirtualMorsification) -> DGraph:
    if not vm.all_real:
        raise UnsupportedState("D-graphs are defined for all-real states only")
    n = vm.mu
    A = vm.matrix
    mult = tuple(tuple(0 if i == j else A[i][j] for j in range(n)) for i in range(n))
    arrows = frozenset((i, j) for i in range(n) for j in range(i + 1, n) if A[i][j])
    return DGraph(tuple(k.morse_index for k in vm.kinds), mult, arrows)


def make_dgraph(marks, edges) -> DGraph:
    """Build from (u, v, multiplicity) triples, oriented u -> v."""
    n = len(marks)
    mult = [[0] * n for _ in range(n)]
    arrows = set()
    for u, v, a in edges:
        mult[u][v] = mult[v][u] = a
        arrows.add((u, v))
    return DGraph(tuple(marks), tuple(map(tuple, mult)), frozenset(arrows))


def _direction(g: DGraph, u: int, v: int) -> int:
    if (u, v) in g.arrows:
        return 1
    if (v, u) in g.arrows:
        return 2
    return 0


def _refined_colors(g: DGraph) -> list[int]:
    n = g.n
    colors = list(g.marks)
    for _ in range(n):
        sigs = [
            (colors[v], tuple(sorted((g.mult[v][w], _direction(g, v, w), colors[w]) for w in range(n) if g.mult[v][w])))
            for v in range(n)
        ]
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new
    return colors


def _encode(g: DGraph, order) -> bytes:
    out = bytearray(g.marks[v] for v in order)
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            u, v = order[a], order[b]
            out.append(g.mult[u][v] & 0xFF)
            out.append(_direction(g, u, v))
    return bytes(out)


def _best_order(g: DGraph) -> tuple[bytes, list[int]]:
    colors = _refined_colors(g)
    cells = [[v for v in range(g.n) if colors[v] == c] for c in sorted(set(colors))]
    best = None
    for parts in itertools.product(*(itertools.permutations(c) for c in cells)):
        order = [v for part in parts for v in part]
        enc = _encode(g, order)
        if best is None or enc < best[0]:
            best = (enc, order)
    return best


def canonical_dgraph(g: DGraph) -> bytes:
    """Minimal encoding over all relabelings compatible with refined vertex colors."""
    return b"DG1:" + _best_order(g)[0]


def canonical_relabel(g: DGraph) -> DGraph:
    """Isomorphic copy with vertices in canonical order."""
    order = _best_order(g)[1]
    pos = {v: i for i, v in enumerate(order)}
    mult = tuple(tuple(g.mult[u][v] for v in order) for u in order)
    arrows = frozenset((pos[u], pos[v]) for u, v in g.arrows)
    return DGraph(tuple(g.marks[v] for v in order), mult, arrows)


def _predecessor_masks(g: DGraph) -> list[int]:
    pred = [0] * g.n
    for u, v in g.arrows:
        pred[v] |= 1 << u
    return pred


def is_acyclic(g: DGraph) -> bool:
    dg = nx.DiGraph(list(g.arrows))
    return nx.is_directed_acyclic_graph(dg)


def linear_extensions(g: DGraph) -> int:
    """Total orders extending the arrows, by dynamic programming over downsets."""
    if not is_acyclic(g):
        raise InvalidGraph("orientation relation has a cycle")
    n = g.n
    pred = _predecessor_masks(g)
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def count(placed: int) -> int:
        if placed == full:
            return 1
        total = 0
        for v in range(n):
            if not placed >> v & 1 and pred[v] & placed == pred[v]:
                total += count(placed | 1 << v)
        return total

    return count(0)


def strict_class_bound(card: int) -> int:
    if card % 10:
        raise ValueError(f"{card} is not divisible by 10")
    return card // 10


# Dynkin shapes

@dataclass(frozen=True)
class AdeShape:
    family: str  # "A", "D", "E" or "T" (star with given arm lengths)
    rank: int
    arms: tuple[int, ...] = ()

    def __post_init__(self):
        ok = {
            "A": self.rank >= 1,
            "D": self.rank >= 4,
            "E": self.rank in (6, 7, 8),
            "T": bool(self.arms) and self.rank == 1 + sum(self.arms),
        }.get(self.family, False)
        if not ok:
            raise ValueError(f"no Dynkin shape {self.name}")

    @property
    def name(self) -> str:
        if self.family == "T":
            return "T" + ",".join(map(str, self.arms))
        return f"{self.family}{self.rank}"

    def tree(self) -> nx.Graph:
        if self.family == "A":
            return nx.path_graph(self.rank)
        arms = {"D": (1, 1, self.rank - 3), "E": (1, 2, self.rank - 4), "T": self.arms}[self.family]
        g = nx.Graph()
        g.add_node(0)
        nxt = 1
        for length in arms:
            prev = 0
            for _ in range(length):
                g.add_edge(prev, nxt)
                prev = nxt
                nxt += 1
        return g


_SHAPE_RE = re.compile(r"^(?:([ADE])(\d+)|T(\d+(?:,\d+)+))$")


def parse_shape(text: str) -> AdeShape:
    m = _SHAPE_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse shape {text!r}")
    if m.group(1):
        return AdeShape(m.group(1), int(m.group(2)))
    arms = tuple(int(x) for x in m.group(3).split(","))
    return AdeShape("T", 1 + sum(arms), arms)


def parse_split(text: str) -> list[AdeShape]:
    """'A5+A4' -> [A5, A4]."""
    return [parse_shape(part) for part in text.split("+")]


def _unit_subgraph(g: DGraph, vertices) -> nx.Graph | None:
    sub = nx.Graph()
    sub.add_nodes_from(vertices)
    for u, v in itertools.combinations(vertices, 2):
        a = g.mult[u][v]
        if a:
            if abs(a) != 1:
                return None
            sub.add_edge(u, v)
    return sub


def _matches(g: DGraph, vertices, shape: AdeShape, alternating: bool) -> bool:
    sub = _unit_subgraph(g, vertices)
    if sub is None or not nx.is_isomorphic(sub, shape.tree()):
        return False
    if alternating and shape.family == "A":
        return all({g.marks[u], g.marks[v]} == {0, 1} for u, v in sub.edges)
    return True


def ade_split(g: DGraph, left: AdeShape, right: AdeShape, alternating: bool = False):
    """Vertex bipartitions whose two induced unit-edge graphs are the given Dynkin trees."""
    if left.rank + right.rank != g.n:
        raise ValueError("shape ranks must add up to the vertex count")
    out = []
    verts = range(g.n)
    for side in itertools.combinations(verts, left.rank):
        rest = tuple(v for v in verts if v not in side)
        if _matches(g, side, left, alternating) and _matches(g, rest, right, alternating):
            out.append((frozenset(side), frozenset(rest)))
    return out


def find_subdiagram(g: DGraph, shape: AdeShape):
    """Vertex sets whose induced unit-edge graph is the given Dynkin tree."""
    return [
        frozenset(vs)
        for vs in itertools.combinations(range(g.n), shape.rank)
        if _matches(g, vs, shape, False)
    ]


def to_dot(g: DGraph, name: str = "dgraph") -> str:
    lines = [f"digraph {name} {{"]
    style = {
        0: 'shape=circle, style=solid, label=""',
        1: 'shape=circle, style=filled, fillcolor=black, label=""',
        2: 'shape=doublecircle, style=solid, label=""',
    }
    for v, m in enumerate(g.marks):
        lines.append(f"  v{v + 1} [{style[m]}];")
    for u, v in sorted(g.arrows):
        a = g.mult[u][v]
        attr = "" if a > 0 else " [style=dashed]"
        for _ in range(abs(a)):
            lines.append(f"  v{u + 1} -> v{v + 1}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
