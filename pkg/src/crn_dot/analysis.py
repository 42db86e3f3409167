"""Structural analysis of reaction networks.

Linkage classes are the weakly connected components of the reaction
digraph, strong linkage classes its strongly connected components, and a
strong class is terminal when no reaction leaves it. Self-loops never
connect anything and never escape a class.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

import networkx as nx

from crn_dot.crn import Complex, MassActionSystem, Network, NetworkError, Reaction, build_matrices
from crn_dot.linalg import bareiss_rank

logger = logging.getLogger(__name__)

Partition = tuple[tuple[int, ...], ...]


def _sorted_partition(blocks) -> Partition:
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


def reaction_graph(net: Network) -> nx.DiGraph:
    """Directed graph on complex indices, self-loops dropped."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(net.n))
    graph.add_edges_from((r.source, r.target) for r in net.reactions if not r.is_self_loop)
    return graph


@dataclass(frozen=True)
class LinkageDecomposition:
    """Linkage classes, strong linkage classes and their terminal flags.

    Both partitions are sorted (blocks ascending, by smallest member), and
    ``terminal_flags[k]`` belongs to ``strong_linkage_classes[k]``.
    """

    linkage_classes: Partition
    strong_linkage_classes: Partition
    terminal_flags: tuple[bool, ...]

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.linkage_classes)

    @property
    def t(self) -> int:
        return sum(self.terminal_flags)

    @property
    def terminal_classes(self) -> Partition:
        return tuple(c for c, flag in zip(self.strong_linkage_classes, self.terminal_flags) if flag)

    @property
    def weakly_reversible(self) -> bool:
        return set(self.linkage_classes) == set(self.strong_linkage_classes)

    def linkage_class_of(self, complex_index: int) -> int:
        for theta, block in enumerate(self.linkage_classes):
            if complex_index in block:
                return theta
        raise IndexError(complex_index)


def decompose(net: Network) -> LinkageDecomposition:
    """Compute linkage, strong linkage and terminal strong linkage classes."""
    graph = reaction_graph(net)
    linkage = _sorted_partition(nx.weakly_connected_components(graph))
    strong = _sorted_partition(nx.strongly_connected_components(graph))
    owner = {v: k for k, block in enumerate(strong) for v in block}
    terminal = [True] * len(strong)
    for u, v in graph.edges:
        if owner[u] != owner[v]:
            terminal[owner[u]] = False
    return LinkageDecomposition(linkage, strong, tuple(terminal))


def _difference_rows(net: Network, pairs) -> list[list[Fraction]]:
    return [
        [b - a for a, b in zip(net.complexes[i].y, net.complexes[j].y)]
        for i, j in pairs
    ]


def stoichiometric_dim(
    net: Network, decomposition: Optional[LinkageDecomposition] = None
) -> tuple[int, tuple[int, ...]]:
    """Dimension s of the stoichiometric subspace and the per-class s_theta.

    The per-class span is taken over all pairs of complexes in the class,
    which spans the same space as the class's reaction vectors.
    """
    decomposition = decomposition or decompose(net)
    rows = _difference_rows(net, ((r.source, r.target) for r in net.reactions if not r.is_self_loop))
    s = bareiss_rank(rows) if rows else 0
    per_class = []
    for block in decomposition.linkage_classes:
        anchor = block[0]
        class_rows = _difference_rows(net, ((anchor, j) for j in block[1:]))
        per_class.append(bareiss_rank(class_rows) if class_rows else 0)
    return s, tuple(per_class)


@dataclass(frozen=True)
class DeficiencyReport:
    """Deficiency breakdown and theorem verdicts of one network."""

    n: int
    l: int  # noqa: E741
    s: int
    delta: int
    t: int
    class_sizes: tuple[int, ...]
    class_dims: tuple[int, ...]
    class_deficiencies: tuple[int, ...]
    weakly_reversible: bool
    decomposition: LinkageDecomposition

    @property
    def dot_condition_1(self) -> bool:
        """Every linkage class has deficiency at most one."""
        return all(d <= 1 for d in self.class_deficiencies)

    @property
    def dot_condition_2(self) -> bool:
        """Class deficiencies add up to the network deficiency."""
        return sum(self.class_deficiencies) == self.delta

    @property
    def dot_condition_3(self) -> bool:
        """One terminal strong linkage class per linkage class."""
        return self.t == self.l

    @property
    def dot(self) -> bool:
        return self.dot_condition_1 and self.dot_condition_2 and self.dot_condition_3

    @property
    def boros(self) -> bool:
        return self.dot_condition_2

    @property
    def deficiency_zero(self) -> bool:
        return self.weakly_reversible and self.delta == 0

    def verdict(self, theorem: str) -> bool:
        if theorem == "dot":
            return self.dot
        if theorem == "boros":
            return self.boros
        raise ValueError(f"unknown theorem: {theorem!r}")

    def to_dict(self) -> dict[str, Any]:
        d = self.decomposition
        return {
            "n": self.n,
            "l": self.l,
            "s": self.s,
            "delta": self.delta,
            "t": self.t,
            "linkage_classes": [list(b) for b in d.linkage_classes],
            "strong_linkage_classes": [list(b) for b in d.strong_linkage_classes],
            "terminal_strong_linkage_classes": [list(b) for b in d.terminal_classes],
            "class_sizes": list(self.class_sizes),
            "class_dims": list(self.class_dims),
            "class_deficiencies": list(self.class_deficiencies),
            "weakly_reversible": self.weakly_reversible,
            "dot": {
                "condition_1": self.dot_condition_1,
                "condition_2": self.dot_condition_2,
                "condition_3": self.dot_condition_3,
                "satisfied": self.dot,
            },
            "boros": self.boros,
            "deficiency_zero": self.deficiency_zero,
        }


def deficiency_report(net: Network) -> DeficiencyReport:
    """Compute n, l, s, delta, per-class deficiencies, t and the verdicts."""
    decomposition = decompose(net)
    s, dims = stoichiometric_dim(net, decomposition)
    sizes = tuple(len(b) for b in decomposition.linkage_classes)
    deficiencies = tuple(size - 1 - dim for size, dim in zip(sizes, dims))
    report = DeficiencyReport(
        n=net.n,
        l=decomposition.l,
        s=s,
        delta=net.n - decomposition.l - s,
        t=decomposition.t,
        class_sizes=sizes,
        class_dims=dims,
        class_deficiencies=deficiencies,
        weakly_reversible=decomposition.weakly_reversible,
        decomposition=decomposition,
    )
    logger.debug(
        "deficiency report: n=%d l=%d s=%d delta=%d t=%d", report.n, report.l, report.s, report.delta, report.t
    )
    return report


def kinetic_dim(sys: MassActionSystem) -> int:
    """Rank of M = Y @ A(K).

    Raises:
        RuntimeError: If t = l but the kinetic and stoichiometric dimensions differ.
    """
    s_kin = build_matrices(sys).rank
    decomposition = decompose(sys.network)
    if decomposition.t == decomposition.l:
        s_stoic, _ = stoichiometric_dim(sys.network, decomposition)
        if s_stoic != s_kin:
            raise RuntimeError(
                f"kinetic dimension {s_kin} differs from stoichiometric dimension {s_stoic} although t = l"
            )
    return s_kin


def add_isolated_complex(net: Network, complex_: Complex) -> Network:
    """Append ``complex_`` with a self-reaction.

    Raises:
        NetworkError: If the complex is already in the network or has the
            wrong number of coordinates.
    """
    if complex_ in net.complexes:
        raise NetworkError("complex is already in the network")
    if len(complex_.y) != net.m:
        raise NetworkError(f"complex has {len(complex_.y)} coordinates, expected {net.m}")
    n = net.n
    return Network(
        species=net.species,
        complexes=net.complexes + (complex_,),
        reactions=net.reactions + (Reaction(n, n),),
    )


def isolated_complexes(net: Network) -> tuple[int, ...]:
    """Indices of complexes whose only reactions are self-loops."""
    touched = {r.source for r in net.reactions if not r.is_self_loop}
    touched |= {r.target for r in net.reactions if not r.is_self_loop}
    return tuple(i for i in range(net.n) if i not in touched)


def remove_isolated_complexes(net: Network) -> Network:
    """Drop self-loop-only complexes, and species no longer used by any complex.

    Raises:
        NetworkError: If nothing but isolated complexes remain.
    """
    drop = set(isolated_complexes(net))
    if not drop:
        return net
    keep = [i for i in range(net.n) if i not in drop]
    if not keep:
        raise NetworkError("network consists only of isolated complexes")
    remap = {old: new for new, old in enumerate(keep)}
    complexes = [net.complexes[i] for i in keep]
    used_species = [k for k in range(net.m) if any(c.y[k] for c in complexes)]
    names = [net.species[k].name for k in used_species]
    complexes = [Complex(tuple(c.y[k] for k in used_species)) for c in complexes]
    reactions = [(remap[r.source], remap[r.target]) for r in net.reactions if r.source not in drop]
    return Network.build(names, complexes, reactions)
