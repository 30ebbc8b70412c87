import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SIZE6_SEED
from oscising.annealer import generate_network
from oscising.ising import (
    DimensionError,
    IsingProblem,
    ParseError,
    WeightedGraph,
    all_configs,
    binary_to_spin,
    brute_force_ground,
    cut_size,
    encode_half_adder,
    format_gset,
    homogenize,
    ising_energy,
    parse_gset,
    spin_to_binary,
)


def dense_energy(s, J, h):
    """Ordered-pair double loop, halved."""
    n = len(s)
    pair = 0.0
    for a in range(n):
        for b in range(n):
            if a != b:
                pair += J[a][b] * s[a] * s[b]
    return sum(h[a] * s[a] for a in range(n)) + pair / 2


def random_problem(rng, n, density=0.6, integer=False):
    J = np.triu(rng.normal(size=(n, n)) * (rng.random((n, n)) < density), 1)
    if integer:
        J = np.round(J * 3)
    J = J + J.T
    h = rng.normal(size=n)
    if integer:
        h = np.round(h * 2)
    return IsingProblem.from_dense(J, h), J, h


problems = st.integers(1, 10).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2**32 - 1)))


# -- parse_gset ---------------------------------------------------------------

def test_parse_small():
    g = parse_gset("3 2\n1 2 1\n2 3 -1\n")
    assert g.n == 3 and g.m == 2
    assert g.edges == [(0, 1, 1.0), (1, 2, -1.0)]
    assert g.duplicates == 0


def test_parse_bytes_and_reals():
    g = parse_gset(b"4 2\n4 1 0.5\n2 3 2\n")
    assert g.edges == [(0, 3, 0.5), (1, 2, 2.0)]


def test_parse_out_of_range_names_line():
    with pytest.raises(ParseError) as exc:
        parse_gset("3 2\n1 4 1\n")
    assert exc.value.line == 2


@pytest.mark.parametrize("text,line", [
    ("3 2\n1 2 1\n", 3),            # m mismatch: reported past the last line
    ("3 1\n1 2\n", 2),              # short line
    ("3 1\n1 x 1\n", 2),            # malformed number
    ("3 1\n2 2 1\n", 2),            # self-loop
    ("3\n", 1),                     # bad header
    ("3 1\n1 2 1\n2 3 1\n", 3),     # extra line
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        parse_gset(text)
    assert exc.value.line == line


def test_parse_duplicate_last_wins():
    g = parse_gset("3 3\n1 2 1\n2 3 5\n2 1 7\n")
    assert g.duplicates == 1
    assert dict(((a, b), w) for a, b, w in g.edges) == {(0, 1): 7.0, (1, 2): 5.0}


def test_gset_roundtrip(rng):
    g = generate_network("sparse", 30, "pm1", 3, p=0.3)
    g2 = parse_gset(format_gset(g))
    assert g2.edges == g.edges


# -- energies -----------------------------------------------------------------

def test_single_pair():
    p = IsingProblem(2, [0], [1], [1.0])
    assert ising_energy([1, 1], p) == 1


def test_triangle_enumeration():
    p = IsingProblem(3, [0, 0, 1], [1, 2, 2], [1.0, 1.0, 1.0])
    values = [ising_energy(s, p) for s in itertools.product((-1, 1), repeat=3)]
    assert min(values) == -1 and max(values) == 3


def test_length_mismatch():
    p = IsingProblem(2, [0], [1], [1.0])
    with pytest.raises(DimensionError):
        ising_energy([1, 1, 1], p)
    with pytest.raises(ValueError):
        ising_energy([1, 0], p)


@given(problems)
def test_energy_matches_dense_double_loop(args):
    n, seed = args
    rng = np.random.default_rng(seed)
    p, J, h = random_problem(rng, n)
    s = rng.choice([-1, 1], n)
    assert ising_energy(s, p) == pytest.approx(dense_energy(s, J, h), rel=1e-12, abs=1e-12)


@given(problems)
def test_global_flip_invariance(args):
    n, seed = args
    rng = np.random.default_rng(seed)
    p, J, _ = random_problem(rng, n)
    p0 = IsingProblem(p.n, p.i, p.j, p.w)
    s = rng.choice([-1, 1], n)
    assert ising_energy(s, p0) == ising_energy(-s, p0)


# -- cut identity -------------------------------------------------------------

def test_cut_path():
    g = WeightedGraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
    assert cut_size([1, -1, 1], g) == 2
    assert cut_size([1, 1, 1], g) == 0
    assert ising_energy([1, 1, 1], IsingProblem.from_graph(g)) == 2


@given(st.integers(0, 2**32 - 1))
def test_cut_identity_integer_exact(seed):
    rng = np.random.default_rng(seed)
    g = generate_network("sparse", 10, "pm1", seed, p=0.5)
    g = WeightedGraph(g.n, g.i, g.j, g.w * rng.integers(1, 5, g.m))
    s = rng.choice([-1, 1], 10)
    H = ising_energy(s, IsingProblem.from_graph(g))
    assert H + 2 * cut_size(s, g) - g.w.sum() == 0


@given(st.integers(0, 2**32 - 1))
def test_cut_identity_real(seed):
    rng = np.random.default_rng(seed)
    g = generate_network("full", 10, "uniform02", seed)
    s = rng.choice([-1, 1], 10)
    H = ising_energy(s, IsingProblem.from_graph(g))
    total = g.total_weight()
    assert abs(H + 2 * cut_size(s, g) - total) <= 1e-12 * total


# -- homogenize ---------------------------------------------------------------

def test_homogenize_fields_become_reference_row():
    p = IsingProblem(4, [], [], [], [2, 1, -1, -1])
    q = homogenize(p)
    assert q.n == 5 and np.all(q.h == 0)
    # unordered-pair convention: J_{k,ref} = h_k keeps H unchanged
    assert np.array_equal(q.dense()[4, :4], [2, 1, -1, -1])


def test_homogenize_zero_field():
    p = IsingProblem(3, [0], [2], [1.5])
    q = homogenize(p)
    assert q.n == 4 and q.m == 1 and np.array_equal(q.dense()[:3, :3], p.dense())
    assert not q.dense()[3].any()


@pytest.mark.parametrize("n", [5, 10])
def test_homogenize_preserves_energy_exhaustively(n):
    rng = np.random.default_rng(n)
    p, _, _ = random_problem(rng, n)
    q = homogenize(p)
    for s in all_configs(n):
        assert ising_energy(np.append(s, 1), q) == pytest.approx(ising_energy(s, p), abs=1e-12)


# -- brute force --------------------------------------------------------------

def test_brute_force_two_spins():
    H, mins = brute_force_ground(IsingProblem(2, [0], [1], [1.0]))
    assert H == -1 and [list(m) for m in mins] == [[-1, 1], [1, -1]]
    H, mins = brute_force_ground(IsingProblem(2, [0], [1], [-1.0]))
    assert H == -1 and [list(m) for m in mins] == [[-1, -1], [1, 1]]


def test_brute_force_matches_naive_enumeration(rng):
    p, J, h = random_problem(rng, 8)
    naive = sorted((dense_energy(s, J, h), s) for s in itertools.product((-1, 1), repeat=8))
    H, mins = brute_force_ground(p)
    assert H == pytest.approx(naive[0][0], abs=1e-12)
    assert [tuple(m) for m in mins] == [naive[0][1]]


def test_brute_force_refuses_large():
    with pytest.raises(ValueError):
        brute_force_ground(IsingProblem(25, [], [], []))


def test_size6_regression_fixture():
    g = generate_network("full", 6, "uniform02", SIZE6_SEED)
    H, mins = brute_force_ground(IsingProblem.from_graph(g))
    assert len(mins) == 2
    groups = {frozenset(np.flatnonzero(m == m[0])) for m in mins}
    # 1-based {2,3,6} / {1,4,5}
    assert groups == {frozenset({0, 3, 4})}
    assert H == pytest.approx(-7.482641113337804, abs=1e-12)


# -- binary / spin ------------------------------------------------------------

def test_binary_spin_maps():
    assert list(binary_to_spin([0, 1])) == [-1, 1]
    assert list(binary_to_spin([0, 0, 0, 0])) == [-1, -1, -1, -1]
    for x in itertools.product((0, 1), repeat=4):
        assert tuple(spin_to_binary(binary_to_spin(x))) == x
    with pytest.raises(ValueError):
        binary_to_spin([0, 2])


# -- half adder ---------------------------------------------------------------

def test_half_adder_matrices():
    ha = encode_half_adder()
    assert ha.variables == ("c", "s", "a", "b")
    assert ha.J_matrix.tolist() == [[0, 2, -2, -2], [2, 0, -1, -1], [-2, -1, 0, 1], [-2, -1, 1, 0]]
    assert ha.spin.h.tolist() == [2, 1, -1, -1]


def test_half_adder_binary_energy_is_penalty():
    ha = encode_half_adder()
    assert ising_energy([1, 0, 1, 1], ha.binary) == 0
    for x in itertools.product((0, 1), repeat=4):
        c, s, a, b = x
        assert ising_energy(x, ha.binary) == (a + b - 2 * c - s) ** 2
        # matrix form with ordered pairs
        xv = np.array(x)
        assert ha.h_x @ xv + xv @ ha.J_matrix @ xv == (a + b - 2 * c - s) ** 2


def test_half_adder_spin_form_is_affine_in_penalty():
    ha = encode_half_adder()
    offsets = {ising_energy(binary_to_spin(x), ha.spin) - 2 * ising_energy(x, ha.binary)
               for x in itertools.product((0, 1), repeat=4)}
    assert len(offsets) == 1


def test_half_adder_ground_set():
    ha = encode_half_adder()
    truth = {x for x in itertools.product((0, 1), repeat=4) if x[2] + x[3] == 2 * x[0] + x[1]}
    H, mins = brute_force_ground(ha.binary)
    assert H == 0 and {tuple(m) for m in mins} == truth == set(ha.truth_set())
    _, smins = brute_force_ground(ha.spin)
    assert {tuple(spin_to_binary(m)) for m in smins} == truth


# -- serialization ------------------------------------------------------------

def test_json_roundtrip(rng):
    p, _, _ = random_problem(rng, 7)
    q = IsingProblem.from_json(p.to_json())
    assert np.array_equal(q.dense(), p.dense()) and np.array_equal(q.h, p.h)
    doc = json.loads(p.to_json())
    assert set(doc) == {"n", "edges", "h"}


def test_problem_validation():
    with pytest.raises(ValueError):
        IsingProblem(3, [0, 1], [1, 0], [1.0, 2.0])   # same unordered pair twice
    with pytest.raises(ValueError):
        IsingProblem(2, [0], [1], [float("inf")])
    with pytest.raises(ValueError):
        IsingProblem(2, [1], [1], [1.0])
