import itertools

import pytest
from hypothesis import assume, given, strategies as st

from sigmacalc import gallery
from sigmacalc.dmg import Dmg, acyclify, extend, marginalize
from sigmacalc.errors import GraphTooLarge, LatentInQuery, UnknownNode
from sigmacalc.separation import (
    Notion,
    SeparationQuery,
    d_separated,
    is_open_walk,
    oracle_separated,
    oracle_witness,
    reachable,
    separated,
    sigma_separated,
)

from strategies import dmgs

CYCLE = Dmg.from_edges("x->y; y->z; z->y")


def all_queries(g, max_c=None):
    nodes = sorted(g.nodes)
    for a, b in itertools.permutations(nodes, 2):
        rest = [v for v in nodes if v not in (a, b)]
        for r in range(len(rest) + 1 if max_c is None else min(max_c, len(rest)) + 1):
            for c in itertools.combinations(rest, r):
                yield {a}, {b}, set(c)


class TestSigma:
    def test_a_inside_c(self):
        g = Dmg.from_edges("a->b; b->c")
        assert separated(g, {"a"}, {"c"}, {"a"})

    def test_conditioned_cycle_member_stays_open(self):
        assert not separated(CYCLE, {"x"}, {"z"}, {"y"})

    def test_fig1_condition_one(self):
        g = extend(gallery.fig1())
        assert separated(g, {"Z0", "L1", "L2"}, {"I_X"}, {"C"})

    def test_single_node_trivial_walk(self):
        g = Dmg.from_edges("", nodes=["v"])
        assert not separated(g, {"v"}, {"v"})

    def test_isolated_nodes(self):
        g = Dmg.from_edges("", nodes=["a", "b"])
        assert separated(g, {"a"}, {"b"})

    def test_empty_side_is_separated(self):
        assert separated(CYCLE, set(), {"x"}, {"y"})

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            separated(CYCLE, {"x"}, {"q"})

    def test_latent_in_query(self):
        g = Dmg.from_edges("u->a; u->b", latents=["u"])
        with pytest.raises(LatentInQuery):
            separated(g, {"u"}, {"a"})

    def test_query_object(self):
        q = SeparationQuery({"x"}, {"z"}, {"y"})
        assert sigma_separated(CYCLE, q) is False
        assert q.to_json() == {"a": ["x"], "b": ["z"], "c": ["y"], "notion": "sigma"}


class TestD:
    def test_chain_blocked(self):
        g = Dmg.from_edges("a->b; b->c")
        assert separated(g, {"a"}, {"c"}, {"b"}, Notion.D)

    def test_collider_opened(self):
        g = Dmg.from_edges("a->b; c->b")
        assert not separated(g, {"a"}, {"c"}, {"b"}, Notion.D)

    def test_cycle_collider_opened(self):
        # x->y<-z is a collider walk, so conditioning on y connects x and z
        assert not separated(CYCLE, {"x"}, {"z"}, {"y"}, Notion.D)

    def test_sigma_and_d_differ_on_a_cycle(self):
        g = Dmg.from_edges("x->y; y->z; z->w; w->y")
        assert separated(g, {"x"}, {"z"}, {"y", "w"}, Notion.D)
        assert not separated(g, {"x"}, {"z"}, {"y", "w"}, Notion.SIGMA)

    def test_d_query_object(self):
        assert d_separated(CYCLE, SeparationQuery({"x"}, {"z"}, (), "d")) is False


class TestOracle:
    def test_agrees_on_cycle_graph(self):
        for notion in Notion:
            for a, b, c in all_queries(CYCLE):
                q = SeparationQuery(a, b, c, notion)
                assert separated(CYCLE, a, b, c, notion) == oracle_separated(CYCLE, q)

    def test_witness_is_open(self):
        q = SeparationQuery({"x"}, {"z"}, {"y"})
        walk = oracle_witness(CYCLE, q)
        assert walk[0] == "x" and walk[-1] == "z"

    def test_is_open_walk_directly(self):
        sc = {"x": {"x"}, "y": {"y", "z"}, "z": {"y", "z"}}
        walk = ["x", (False, True), "y", (False, True), "z"]
        assert is_open_walk(walk, {"y"}, sc, Notion.SIGMA)
        assert not is_open_walk(walk, {"y"}, sc, Notion.D)

    def test_size_guard(self):
        g = Dmg.from_edges("", nodes=[f"v{i}" for i in range(9)])
        with pytest.raises(GraphTooLarge):
            oracle_witness(g, SeparationQuery({"v0"}, {"v1"}))

    @given(dmgs(max_nodes=5, max_inputs=1), st.data())
    def test_agrees_with_oracle(self, g, data):
        nodes = sorted(g.nodes)
        a = data.draw(st.sets(st.sampled_from(nodes), min_size=1, max_size=2))
        b = data.draw(st.sets(st.sampled_from(nodes), min_size=1, max_size=2))
        c = data.draw(st.sets(st.sampled_from(nodes), max_size=3))
        notion = data.draw(st.sampled_from(list(Notion)))
        assert separated(g, a, b, c, notion) == oracle_separated(g, SeparationQuery(a, b, c, notion))


class TestProperties:
    @given(dmgs(max_nodes=5), st.data())
    def test_symmetry(self, g, data):
        nodes = sorted(g.nodes)
        a, b, c = (data.draw(st.sets(st.sampled_from(nodes))) for _ in range(3))
        assert separated(g, a, b, c) == separated(g, b, a, c)

    @given(dmgs(max_nodes=5), st.data())
    def test_sigma_separation_implies_d_separation(self, g, data):
        nodes = sorted(g.nodes)
        a, b, c = (data.draw(st.sets(st.sampled_from(nodes))) for _ in range(3))
        if separated(g, a, b, c, Notion.SIGMA):
            assert separated(g, a, b, c, Notion.D)

    @given(dmgs(max_nodes=5, acyclic=True), st.data())
    def test_acyclic_notions_coincide(self, g, data):
        nodes = sorted(g.nodes)
        a, b, c = (data.draw(st.sets(st.sampled_from(nodes))) for _ in range(3))
        assert separated(g, a, b, c, Notion.SIGMA) == separated(g, a, b, c, Notion.D)

    @given(dmgs(max_nodes=5), st.data())
    def test_sigma_equals_d_on_acyclification(self, g, data):
        nodes = sorted(g.nodes)
        a, b, c = (data.draw(st.sets(st.sampled_from(nodes))) for _ in range(3))
        assert separated(g, a, b, c) == separated(acyclify(g), a, b, c, Notion.D)

    @given(dmgs(min_nodes=3, max_nodes=6), st.data())
    def test_marginalization_stability(self, g, data):
        nodes = sorted(g.nodes)
        lset = data.draw(st.sets(st.sampled_from(nodes), max_size=len(nodes) - 2))
        rest = [v for v in nodes if v not in lset]
        a = data.draw(st.sets(st.sampled_from(rest), min_size=1, max_size=2))
        b = data.draw(st.sets(st.sampled_from(rest), min_size=1, max_size=2))
        c = data.draw(st.sets(st.sampled_from(rest)))
        assume(not (a & b))
        assert separated(g, a, b, c) == separated(marginalize(g, lset), a, b, c)

    @given(dmgs(max_nodes=5), st.data())
    def test_reachable_matches_pairwise_queries(self, g, data):
        nodes = sorted(g.nodes)
        a = data.draw(st.sets(st.sampled_from(nodes), min_size=1))
        c = data.draw(st.sets(st.sampled_from(nodes)))
        reach = reachable(g, a, c)
        for v in g.nodes - c:
            assert (v in reach) == (not separated(g, a, {v}, c))


@given(dmgs(max_nodes=6), st.integers(1, 7), st.data())
def test_separoid_rules(g, rule, data):
    from separoid import check_rule

    nodes = sorted(g.nodes)
    roles = data.draw(st.lists(st.integers(0, 4), min_size=len(nodes), max_size=len(nodes)))
    a, b, c, d = (frozenset(v for v, r in zip(nodes, roles) if r == i) for i in range(4))
    premise, conclusion = check_rule(g, rule, a, b, c, d)
    assert conclusion or not premise
