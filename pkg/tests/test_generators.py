import pytest

from graphbisect import GraphError, dijkstra_all_pairs, metadata
from graphbisect.generators import Family, GeneratorSpec, generate


def test_nest_cycle_examples():
    g = generate(GeneratorSpec("nest-cycle", c=3, k=1))
    assert (g.n, g.m, g.directed) == (3, 3, True)
    g = generate(GeneratorSpec("nest-cycle", c=3, k=2))
    assert (g.n, g.m) == (9, 12)
    top = {(a.source, a.target) for a in g.edges} - {(u + 3 * i, v + 3 * i) for i in range(3) for u, v in [(0, 1), (1, 2), (2, 0)]}
    assert top == {(0, 3), (3, 6), (6, 0)}
    g = generate(GeneratorSpec("nest-cycle", c=4, k=0))
    assert (g.n, g.m) == (1, 0)


@pytest.mark.parametrize("c", [2, 3, 4, 5])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_nest_cycle_size_and_constant(c, k):
    g = generate(GeneratorSpec("nest-cycle", c=c, k=k))
    assert g.n == c**k
    # each level adds c^(k-j) cycles of length c
    assert g.m == c * sum(c ** (k - j) for j in range(1, k + 1))
    if g.n > 1:
        assert metadata(g, dijkstra_all_pairs(g)).cycle_constant == c


def test_path_two():
    g = generate(GeneratorSpec("path", n=2))
    assert (g.n, [(a.source, a.target) for a in g.edges]) == (2, [(0, 1)])


@pytest.mark.parametrize(
    "spec",
    [
        GeneratorSpec("path", n=10),
        GeneratorSpec("star", n=10),
        GeneratorSpec("complete-binary-tree", n=31),
        GeneratorSpec("random-tree", n=200, max_degree=3, seed=7),
        GeneratorSpec("grid", width=7, height=4),
        GeneratorSpec("er-connected", n=50, m=80, seed=3, wmax=9),
        GeneratorSpec("directed-cycle", n=6),
        GeneratorSpec("random-strongly-connected", n=20, m=50, seed=1, wmax=4),
    ],
)
def test_families_are_valid_and_deterministic(spec):
    a, b = generate(spec), generate(spec)
    assert a.to_text() == b.to_text()
    assert all(1 <= e.weight <= spec.wmax for e in a.edges)
    if spec.family in (Family.PATH, Family.STAR, Family.COMPLETE_BINARY_TREE, Family.RANDOM_TREE):
        assert a.is_tree()


def test_random_tree_respects_max_degree():
    for seed in range(10):
        for delta in (2, 3, 5):
            g = generate(GeneratorSpec("random-tree", n=150, max_degree=delta, seed=seed))
            assert max(g.degree(u) for u in range(g.n)) <= delta


def test_seed_changes_random_families():
    a = generate(GeneratorSpec("er-connected", n=30, m=50, seed=0))
    b = generate(GeneratorSpec("er-connected", n=30, m=50, seed=1))
    assert a.to_text() != b.to_text()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="random-tree", n=5, max_degree=1),
        dict(family="nest-cycle", c=1, k=2),
        dict(family="er-connected", n=5, m=11),
        dict(family="er-connected", n=10, m=3),
        dict(family="path"),
        dict(family="path", n=0),
        dict(family="nest-cycle", c=2, k=-1),
    ],
)
def test_unsatisfiable_specs(kwargs):
    with pytest.raises(GraphError):
        generate(GeneratorSpec(**kwargs))


def test_graph_id_is_stable():
    spec = GeneratorSpec("grid", width=3, height=2, seed=4)
    assert spec.graph_id == "grid:width=3:height=2:seed=4:wmax=1"
