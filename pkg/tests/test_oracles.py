import numpy as np
import pytest

from graphbisect import CandidateSet, Graph, WeightVector, dijkstra_all_pairs, reach
from graphbisect.generators import GeneratorSpec, generate
from graphbisect.oracles import (
    DistanceOracle,
    EdgeDist,
    EdgeQueryOracle,
    EdgeResponse,
    OracleState,
    Side,
    Target,
    VertexOracle,
    format_response,
    parse_response,
    response_ordinal,
)

from .conftest import component_side, with_dist

# First 20 truth coins for seeds 0, 1, 2 at p = 0.75 (T = truthful, L = lie),
# computed from a bare PCG64 stream: coin k is uniform 2k of the stream.
GOLDEN_COINS = {
    0: "TTLTTLLTLTTTTLTTTTTL",
    1: "TTTLTLTTTTLTLTTTTTTT",
    2: "TLTTTTTTLTTLTTTTTTTL",
}


def test_truthful_examples(path3, cycle4_undirected):
    g, d = path3
    o = VertexOracle(g, d, OracleState(target=2))
    assert o.answer(1) == EdgeResponse(g.find_arc(1, 2))
    assert o.answer(2) == Target(2)
    assert o.queries == 2
    g, d = cycle4_undirected
    o = VertexOracle(g, d, OracleState(target=2))
    # both arcs out of 0 are correct; the minimum index wins
    assert o.answer(0) == EdgeResponse(min(g.find_arc(0, 1), g.find_arc(0, 3)))


def test_adversarial_prefers_larger_mirror_survivor(cycle4_undirected):
    g, d = cycle4_undirected
    o = VertexOracle(g, d, OracleState(target=2, correct_policy="adversarial-max-survivor"))
    assert o.answer(0, CandidateSet.of(4, [2, 3])) == EdgeResponse(g.find_arc(0, 3))
    assert o.answer(0, CandidateSet.of(4, [1, 2])) == EdgeResponse(g.find_arc(0, 1))
    # a tie falls back to the smaller arc index
    assert o.answer(0, CandidateSet.of(4, [2])) == EdgeResponse(min(g.find_arc(0, 1), g.find_arc(0, 3)))


def test_seeded_random_choice_is_correct_and_reproducible():
    g = generate(GeneratorSpec("grid", width=5, height=5))
    d = dijkstra_all_pairs(g)
    runs = []
    for _ in range(2):
        o = VertexOracle(g, d, OracleState(target=24, correct_policy="seeded-random", rng_seed=9))
        runs.append([o.answer(0) for _ in range(50)])
    assert runs[0] == runs[1]
    assert {r.arc for r in runs[0]} == set(o.correct_arcs(0))


@pytest.mark.parametrize("seed", sorted(GOLDEN_COINS))
def test_golden_lie_stream(seed):
    g, d = with_dist(generate(GeneratorSpec("path", n=7)))
    o = VertexOracle(g, d, OracleState(target=3, p=0.75, rng_seed=seed))
    for q in range(20):
        o.answer(q % 7)
    assert "".join("L" if x else "T" for x in o.lies) == GOLDEN_COINS[seed]


@pytest.mark.parametrize("seed", sorted(GOLDEN_COINS))
def test_golden_stream_matches_bare_generator(seed):
    u = np.random.Generator(np.random.PCG64(seed)).random(40)[0::2]
    assert "".join("L" if x >= 0.75 else "T" for x in u) == GOLDEN_COINS[seed]


def test_truth_fraction_is_close_to_p():
    g, d = with_dist(generate(GeneratorSpec("path", n=9)))
    p, N = 0.7, 20_000
    o = VertexOracle(g, d, OracleState(target=4, p=p, rng_seed=123))
    for _ in range(N):
        o.answer(0)
    frac = 1 - sum(o.lies) / N
    assert abs(frac - p) <= 4 * np.sqrt(p * (1 - p) / N)


def test_star_lie_excludes_target(star5):
    g, d = star5
    # seed 4 opens with coin 0.943 (a lie) and choice 0.511, i.e. option 2 of 5
    o = VertexOracle(g, d, OracleState(target=1, p=0.75, rng_seed=4))
    r = o.answer(0)
    assert o.lies == [True]
    assert r == EdgeResponse(g.find_arc(0, 2))
    assert 1 not in reach(g, d, 0, r.arc)


def test_mirrored_lie_maximizes_ratio(path3):
    g, d = path3
    w = WeightVector.from_raw([0.45, 0.1, 0.45])
    o = VertexOracle(g, d, OracleState(target=0, p=0.75, lie_policy="adversarial-mirrored", rng_seed=0))
    p = 0.75
    # brute force over the three responses to query 1
    cands = {"target": {1}, "left": {0}, "right": {2}}
    ratios = {}
    for name, cons in cands.items():
        upd = [w.mu[v] * (p if v in cons else 1 - p) for v in range(3)]
        ratios[name] = (sum(upd) - upd[0]) / upd[0]
    best = max(ratios, key=ratios.get)
    lie = o._mirrored_lie(1, w)
    expected = {"target": Target(1), "left": EdgeResponse(g.find_arc(1, 0)), "right": EdgeResponse(g.find_arc(1, 2))}
    assert lie == expected[best] == EdgeResponse(g.find_arc(1, 2))


def test_noisy_answers_need_p_below_one(path3):
    g, d = path3
    with pytest.raises(ValueError):
        VertexOracle(g, d, OracleState(target=0)).answer_noisy(1)
    with pytest.raises(ValueError):
        OracleState(target=0, p=0.5)


def test_distance_oracle(cycle4_directed):
    g, d = cycle4_directed
    o = DistanceOracle(g, d, OracleState(target=3))
    assert o.answer(0) == EdgeDist(g.find_arc(0, 1), 3)
    assert o.answer(3) == Target(3)
    with pytest.raises(ValueError):
        DistanceOracle(g, d, OracleState(target=3, p=0.9))


def test_edge_oracle_matches_component_search():
    for seed in range(5):
        tree = generate(GeneratorSpec("random-tree", n=9, seed=seed))
        for t in range(9):
            o = EdgeQueryOracle(tree, t)
            for u, v, _ in tree.edges:
                assert o.answer_edge(u, v) == Side(component_side(tree, u, v, t))
                assert o.answer_edge(v, u) == Side(component_side(tree, v, u, t))


def test_edge_oracle_rejects_non_tree(cycle4_undirected):
    g, _ = cycle4_undirected
    with pytest.raises(Exception):
        EdgeQueryOracle(g, 0)


def test_format_and_parse_roundtrip(path3):
    g, _ = path3
    arc = g.find_arc(1, 2)
    for r, q in [(Target(1), 1), (EdgeResponse(arc), 1), (EdgeDist(arc, 1), 1)]:
        assert parse_response(g, format_response(g, r), q) == r
    assert parse_response(g, "side 2", (1, 2)) == Side(2)
    assert response_ordinal(Target(1)) == 0
    assert response_ordinal(EdgeResponse(arc)) == arc + 1


@pytest.mark.parametrize(
    "text, q",
    [
        ("", 1),
        ("edge 0 1", 1),  # arc does not leave q
        ("edge 0 2", 0),  # no such arc
        ("edge 1 2 dist 0", 1),
        ("edge 1 x", 1),
        ("side 0", (1, 2)),
        ("side 1", 1),
        ("target", (1, 2)),
        ("shrug", 1),
    ],
)
def test_parse_rejects(path3, text, q):
    g, _ = path3
    with pytest.raises(ValueError):
        parse_response(g, text, q)


def test_oracle_rejects_bad_target(path3):
    g, d = path3
    with pytest.raises(ValueError):
        VertexOracle(g, d, OracleState(target=3))
    with pytest.raises(ValueError):
        EdgeQueryOracle(Graph.from_edges(2, [(0, 1)]), 5)
