"""Shared network fixtures."""

import os
from fractions import Fraction

import pytest

from crn_dot import config, metrics
from crn_dot.crn import Complex, MassActionSystem, Network, PolynomialSystem
from crn_dot.model import ModelConfig
from crn_dot.parsing import parse_network, parse_ode
from crn_dot.realize import model_for

# Two linkage classes, deficiencies 1 and 0, one terminal class each.
TWO_CLASS_NETWORK = """\
2 X1 <-> X1 + X3
2 X2 <-> X1 + X3
X1 + X3 -> X1 + X2
X2 + X3 <-> X4
X4 <-> X2 + X5
"""

# Deficiency one, class deficiencies 0 and 0.
CYCLE_AND_AUTOCATALYSIS = """\
0 -> 3 X2
3 X2 -> 3 X1
3 X1 -> 0
X1 + X2 -> 2 X1 + 2 X2
"""

# Same vector field as REVERSIBLE_PAIR.
CHAIN = """\
2 X1 -> 2 X2 ; k=1
2 X2 -> X1 + X2 ; k=2
"""

REVERSIBLE_PAIR = """\
2 X1 <-> 2 X2 ; k=1,1
"""

# Conjugate under c = (1, 2).
CONJUGATE_ORIGINAL = """\
2 X1 -> X1 + X2 ; k=1
X2 -> X1 ; k=1
"""

CONJUGATE_TARGET = """\
2 X1 <-> X2 ; k=1/2,1
"""

THREE_SPECIES_ODE = """\
dx1/dt = 2*x2^3 - x1^2 - x1*x2*x3
dx2/dt = 1 - 3*x2^3 + 3*x1*x2*x3
dx3/dt = x1*x2 - x1*x2*x3
"""


def random_network(rng, max_species=4, max_complexes=8):
    """A random network without self-loops in which every complex and species is used."""
    while True:
        m = int(rng.integers(1, max_species + 1))
        n = int(rng.integers(2, max_complexes + 1))
        pool = sorted({tuple(int(v) for v in rng.integers(0, 3, size=m)) for _ in range(3 * n)})
        if len(pool) < n:
            continue
        complexes = [pool[int(i)] for i in rng.permutation(len(pool))[:n]]
        if all(any(c[k] for c in complexes) for k in range(m)):
            break
    pairs = set()
    for i in range(n):
        j = int(rng.integers(n - 1))
        j += j >= i
        pairs.add((i, j) if rng.integers(2) else (j, i))
    for _ in range(int(rng.integers(0, n + 1))):
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        pairs.add((i, j))
    return Network.build(
        [f"X{k + 1}" for k in range(m)], [Complex.of(c) for c in complexes], sorted(pairs)
    )


def random_system(rng, **kwargs):
    net = random_network(rng, **kwargs)
    rates = tuple(
        Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 5))) for _ in net.reactions
    )
    return MassActionSystem(net, rates)


def random_point(rng, m):
    return [Fraction(int(rng.integers(1, 50)), int(rng.integers(1, 20))) for _ in range(m)]


def random_polynomial_system(rng, max_species=4):
    """A random system whose negative terms all contain their own species."""
    m = int(rng.integers(1, max_species + 1))
    rows = []
    for i in range(m):
        terms = []
        for _ in range(int(rng.integers(1, 4))):
            exponent = [int(v) for v in rng.integers(0, 3, size=m)]
            c = Fraction(int(rng.integers(1, 6)), int(rng.integers(1, 4)))
            if rng.integers(2):
                c = -c
                exponent[i] = max(exponent[i], 1)
            terms.append((c, tuple(exponent)))
        rows.append(tuple(terms))
    return PolynomialSystem(tuple(f"X{k + 1}" for k in range(m)), tuple(rows))


@pytest.fixture(autouse=True)
def reset_state(monkeypatch):
    """Start every test from an environment without CRN_/OTEL_ overrides."""
    for name in list(os.environ):
        if name.startswith(("CRN_", "OTEL_")):
            monkeypatch.delenv(name, raising=False)
    config.reset_config()
    metrics.shutdown_metrics()
    yield
    config.reset_config()
    metrics.shutdown_metrics()


@pytest.fixture
def two_class():
    return parse_network(TWO_CLASS_NETWORK)


@pytest.fixture
def cycle_system():
    return parse_network(CYCLE_AND_AUTOCATALYSIS)


@pytest.fixture
def chain():
    return parse_network(CHAIN)


@pytest.fixture
def reversible_pair():
    return parse_network(REVERSIBLE_PAIR)


@pytest.fixture
def conjugate_original():
    return parse_network(CONJUGATE_ORIGINAL)


@pytest.fixture
def conjugate_target():
    return parse_network(CONJUGATE_TARGET)


@pytest.fixture
def three_species_ode():
    return parse_ode(THREE_SPECIES_ODE)


@pytest.fixture
def write_file(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


# Weights for the conjugate-original model: delta[1,3] - delta[3,1] = 1.
CONJUGATE_DELTAS = {
    (i, j): Fraction(10 + 4 * i + j, 10) for i in range(4) for j in range(4) if i != j
}
CONJUGATE_DELTAS[(0, 2)] = Fraction(2)
CONJUGATE_DELTAS[(2, 0)] = Fraction(1)


@pytest.fixture
def conjugate_model(conjugate_original):
    """Realization model of CONJUGATE_ORIGINAL with pinned weights."""
    return model_for(conjugate_original, ModelConfig(seed=0, delta_samples=CONJUGATE_DELTAS))


@pytest.fixture
def conjugate_point(conjugate_model):
    """A feasible point encoding 2X1 <-> X2 with c = (1, 2), by variable name.

    Complexes are 2X1, X1+X2, X2, X1; slot 1 holds 2X1 and X2, the other two
    complexes sit alone in slots 2 and 3.
    """
    values = {v.name: Fraction(0) for v in conjugate_model.variables}
    values.update({
        "d_1": Fraction(1), "d_2": Fraction(1, 2),
        "b_1_3": Fraction(1, 2), "b_3_1": Fraction(1, 2),
        "Lam_1_1": Fraction(1), "Lam_3_1": Fraction(1), "Lam_2_2": Fraction(1), "Lam_4_3": Fraction(1),
        "L_1": Fraction(1), "L_2": Fraction(1), "L_3": Fraction(1),
        "Gam_1_3_1": Fraction(1), "Gam_3_1_1": Fraction(1),
        "S_1_3_1": Fraction(1), "Sp_1_3_1": Fraction(1),
        "C_1_1": Fraction(1), "C_2_2": Fraction(1), "C_4_3": Fraction(1),
        "Cp_1": Fraction(1), "Cp_2": Fraction(1), "Cp_4": Fraction(1),
        "w_1_3": Fraction(1, 2), "w_3_1": Fraction(1, 2),
    })
    return values
