"""Unit tests for linkage classes, deficiency and theorem verdicts."""

import numpy as np
import pytest

from crn_dot.analysis import (
    add_isolated_complex,
    decompose,
    deficiency_report,
    isolated_complexes,
    kinetic_dim,
    reaction_graph,
    remove_isolated_complexes,
)
from crn_dot.crn import Complex, NetworkError, canonical_realization
from crn_dot.parsing import parse_network

from tests.conftest import random_network


class TestDecompose:
    """Tests for decompose."""

    def test_two_class_partitions(self, two_class):
        """Linkage classes, strong classes and terminal classes."""
        d = decompose(two_class.network)
        assert d.linkage_classes == ((0, 1, 2, 3), (4, 5, 6))
        assert d.terminal_classes == ((3,), (4, 5, 6))
        assert d.t == 2
        assert d.l == 2
        assert not d.weakly_reversible

    def test_self_loops_ignored(self):
        """A self-loop neither connects nor makes a class non-terminal."""
        system = parse_network("X1 -> X2\nX2 -> X2\n")
        graph = reaction_graph(system.network)
        assert graph.number_of_edges() == 1
        assert decompose(system.network).terminal_classes == ((1,),)

    def test_linkage_class_of(self, two_class):
        """Complex 5 (X4) lies in the second class."""
        assert decompose(two_class.network).linkage_class_of(5) == 1


class TestDeficiencyReport:
    """Tests for deficiency_report and its verdicts."""

    def test_two_class_satisfies_dot(self, two_class):
        """delta = 1 split as 1 + 0, one terminal class per linkage class."""
        report = deficiency_report(two_class.network)
        assert (report.n, report.l, report.s, report.delta, report.t) == (7, 2, 4, 1, 2)
        assert report.class_deficiencies == (1, 0)
        assert report.dot
        assert report.boros
        assert not report.deficiency_zero

    def test_cycle_fails_condition_two(self, cycle_system):
        """Class deficiencies 0 + 0 do not add up to delta = 1."""
        report = deficiency_report(cycle_system.network)
        assert (report.n, report.s, report.delta) == (5, 2, 1)
        assert report.class_deficiencies == (0, 0)
        assert report.dot_condition_1
        assert not report.dot_condition_2
        assert report.dot_condition_3
        assert not report.dot
        assert not report.boros

    def test_canonical_three_species_network(self, three_species_ode):
        """11 complexes, 4 linkage classes, s = 3, delta = 4."""
        report = deficiency_report(canonical_realization(three_species_ode).network)
        assert (report.n, report.l, report.s, report.delta) == (11, 4, 3, 4)
        assert report.class_deficiencies == (0, 0, 0, 0)

    def test_reversible_pair_is_deficiency_zero(self, reversible_pair):
        """2X1 <-> 2X2 is weakly reversible with deficiency zero."""
        report = deficiency_report(reversible_pair.network)
        assert report.weakly_reversible
        assert report.deficiency_zero
        assert report.verdict("dot")

    def test_unknown_theorem(self, reversible_pair):
        """Only dot and boros verdicts exist."""
        with pytest.raises(ValueError):
            deficiency_report(reversible_pair.network).verdict("zero")

    def test_to_dict_shape(self, two_class):
        """JSON form carries the partitions and condition flags."""
        data = deficiency_report(two_class.network).to_dict()
        assert data["delta"] == 1
        assert data["terminal_strong_linkage_classes"] == [[3], [4, 5, 6]]
        assert data["dot"] == {"condition_1": True, "condition_2": True, "condition_3": True, "satisfied": True}


class TestKineticDim:
    """Tests for kinetic_dim."""

    def test_equals_stoichiometric_dim_when_t_equals_l(self, cycle_system):
        """With t = l both dimensions are 2."""
        assert kinetic_dim(cycle_system) == 2

    def test_may_be_smaller_when_t_exceeds_l(self):
        """X1 -> 2X1, X1 -> 0 with equal rates has M = 0."""
        system = parse_network("X1 -> 2 X1\nX1 -> 0\n")
        assert kinetic_dim(system) == 0


class TestIsolatedComplexes:
    """Tests for adding and removing isolated complexes."""

    def test_add_isolated_complex_preserves_dot(self, two_class):
        """An isolated self-loop complex adds one class of deficiency zero."""
        before = deficiency_report(two_class.network)
        after = deficiency_report(add_isolated_complex(two_class.network, Complex.of([0, 0, 0, 0, 3])))
        assert after.n == before.n + 1
        assert after.l == before.l + 1
        assert after.s == before.s
        assert after.delta == before.delta
        assert after.class_deficiencies == before.class_deficiencies + (0,)
        assert after.dot == before.dot

    def test_add_existing_complex_rejected(self, two_class):
        """The new complex must not already be in the network."""
        with pytest.raises(NetworkError):
            add_isolated_complex(two_class.network, two_class.network.complexes[0])

    def test_remove_isolated_complexes(self, two_class):
        """Removing what was added gives back the original network."""
        grown = add_isolated_complex(two_class.network, Complex.of([0, 0, 0, 0, 3]))
        assert isolated_complexes(grown) == (7,)
        assert remove_isolated_complexes(grown) == two_class.network

    def test_remove_drops_unused_species(self):
        """A species used only by an isolated complex disappears."""
        system = parse_network("X1 -> 0\nX2 -> X2\n")
        stripped = remove_isolated_complexes(system.network)
        assert stripped.species_names == ("X1",)
        assert stripped.n == 2

    def test_only_isolated_complexes(self):
        """Nothing left to keep is an error."""
        system = parse_network("X1 -> X1\n")
        with pytest.raises(NetworkError):
            remove_isolated_complexes(system.network)


def closure(n, edges):
    """Boolean reachability matrix including i -> i."""
    reach = np.eye(n, dtype=bool)
    for u, v in edges:
        reach[u, v] = True
    for k in range(n):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def blocks(reach):
    n = len(reach)
    return tuple(sorted({tuple(j for j in range(n) if reach[i, j] and reach[j, i]) for i in range(n)}))


class TestRandomNetworks:
    """Deficiency bounds and class structure on 200 random networks."""

    def test_deficiency_bounds(self):
        """delta >= 0, class deficiencies are nonnegative and sum to at most delta, t >= l."""
        rng = np.random.default_rng(7)
        for _ in range(200):
            report = deficiency_report(random_network(rng))
            assert report.delta >= 0
            assert all(d >= 0 for d in report.class_deficiencies)
            assert sum(report.class_deficiencies) <= report.delta
            assert report.t >= report.l

    def test_isolated_complex_invariance(self):
        """Adding an isolated complex keeps delta and both verdicts; removing it restores the network."""
        rng = np.random.default_rng(8)
        for _ in range(200):
            net = random_network(rng)
            while True:
                extra = Complex.of(int(v) for v in rng.integers(0, 4, size=net.m))
                if extra not in net.complexes:
                    break
            padded = add_isolated_complex(net, extra)
            before, after = deficiency_report(net), deficiency_report(padded)
            assert after.delta == before.delta
            assert after.dot == before.dot
            assert after.boros == before.boros
            assert remove_isolated_complexes(padded) == net

    def test_classes_match_reachability(self):
        """Strong, terminal and linkage classes agree with a transitive closure."""
        rng = np.random.default_rng(9)
        for _ in range(200):
            net = random_network(rng)
            edges = [(r.source, r.target) for r in net.reactions]
            reach = closure(net.n, edges)
            undirected = closure(net.n, edges + [(v, u) for u, v in edges])
            strong = blocks(reach)
            terminal = tuple(
                b for b in strong if all(reach[j, b[0]] for j in range(net.n) if reach[b[0], j])
            )
            d = decompose(net)
            assert d.strong_linkage_classes == strong
            assert d.terminal_classes == terminal
            assert d.linkage_classes == blocks(undirected)
