import pytest
from hypothesis import given, strategies as st

from sigmacalc import gallery
from sigmacalc.dmg import (
    Dmg,
    NodeKind,
    acyclify,
    ancestors,
    descendants,
    enumerate_loops,
    extend,
    induced_dmg,
    induced_subgraph,
    input_confound,
    intervene,
    marginalize,
    strongly_connected_components,
    twin_graph,
)
from sigmacalc.errors import InvalidGraph, InvalidIntervention, NameCollision, SccBoundViolation, UnknownNode
from sigmacalc.separation import separated

from strategies import dmgs


def sccs(g):
    return {frozenset(c) for c in strongly_connected_components(g).components}


class TestConstruction:
    def test_parse_edge_string(self):
        g = Dmg.from_edges("a->b; b<-c, c<->d", inputs=["a"])
        assert g.directed == {("a", "b"), ("c", "b")}
        assert g.bidirected == {frozenset("cd")}
        assert g.kind("a") is NodeKind.INPUT

    def test_bad_edge_string(self):
        with pytest.raises(InvalidGraph):
            Dmg.from_edges("a=>b")

    def test_edge_into_input_rejected(self):
        with pytest.raises(InvalidGraph):
            Dmg.from_edges("a->b", inputs=["b"])

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            Dmg.from_edges("a->b").parents("zz")

    def test_equality_ignores_edge_order(self):
        assert Dmg.from_edges("a->b; b->c") == Dmg.from_edges("b->c; a->b")


class TestScc:
    def test_chain(self):
        assert sccs(Dmg.from_edges("a->b; b->c")) == {frozenset("a"), frozenset("b"), frozenset("c")}

    def test_two_cycle(self):
        g = Dmg.from_edges("x->y; y->z; z->y; z->w")
        assert sccs(g) == {frozenset("x"), frozenset("yz"), frozenset("w")}

    def test_fig1(self):
        g = gallery.fig1()
        assert g.sc("Z0") == {"Z0", "L1", "W"}
        for v in g.nodes - {"Z0", "L1", "W"}:
            assert g.sc(v) == {v}


class TestLoops:
    def test_singleton(self):
        g = Dmg.from_edges("a->b; b->a")
        assert enumerate_loops(g, {"a"}) == [frozenset("a")]

    def test_two_cycle(self):
        g = Dmg.from_edges("y->z; z->y")
        assert enumerate_loops(g, {"y", "z"}) == [frozenset("y"), frozenset("z"), frozenset("yz")]

    def test_three_cycle_with_chord(self):
        g = Dmg.from_edges("a->b; b->c; c->a; b->a")
        got = enumerate_loops(g, {"a", "b", "c"})
        assert set(got) == {frozenset("a"), frozenset("b"), frozenset("c"), frozenset("ab"), frozenset("abc")}

    def test_must_stay_in_one_scc(self):
        g = Dmg.from_edges("a->b")
        with pytest.raises(SccBoundViolation):
            enumerate_loops(g, {"a", "b"})


class TestAncestry:
    def test_chain(self):
        assert ancestors(Dmg.from_edges("a->b; b->c"), {"c"}) == {"a", "b", "c"}

    def test_cycle_members_are_mutual_ancestors(self):
        assert ancestors(Dmg.from_edges("x->y; y->z; z->y"), {"y"}) == {"x", "y", "z"}

    def test_fig1_parents_of_x(self):
        assert extend(gallery.fig1()).parents("X") == {"I_X", "Z0"}

    @given(dmgs())
    def test_ancestor_descendant_duality(self, g):
        for v in g.nodes:
            for w in ancestors(g, {v}):
                assert v in descendants(g, {w})


class TestMarginalize:
    def test_directed_chain(self):
        g = marginalize(Dmg.from_edges("a->m; m->b"), {"m"})
        assert g.directed == {("a", "b")} and not g.bidirected

    def test_latent_fork(self):
        g = marginalize(Dmg.from_edges("m->a; m->b", latents=["m"]), {"m"})
        assert g.bidirected == {frozenset("ab")} and not g.directed

    def test_bidirected_then_directed(self):
        g = marginalize(Dmg.from_edges("a<->m; m->b"), {"m"})
        assert g.bidirected == {frozenset("ab")} and not g.directed

    def test_cycle_through_marginalized_node_leaves_self_loop(self):
        g = marginalize(Dmg.from_edges("a->m; m->a; m->b"), {"m"})
        assert g.directed == {("a", "a"), ("a", "b")}
        assert g.bidirected == {frozenset("ab")}

    def test_cannot_marginalize_input(self):
        with pytest.raises(Exception):
            marginalize(Dmg.from_edges("j->a", inputs=["j"]), {"j"})


class TestInducedDmg:
    def test_no_latents_is_identity(self):
        g = Dmg.from_edges("a->b; b<->c")
        assert induced_dmg(g) == g

    def test_latent_two_children(self):
        g = induced_dmg(Dmg.from_edges("u->v; u->w", latents=["u"]))
        assert g.bidirected == {frozenset("vw")}

    def test_latent_three_children(self):
        g = induced_dmg(Dmg.from_edges("u->v; u->w; u->x", latents=["u"]))
        assert g.bidirected == {frozenset("vw"), frozenset("vx"), frozenset("wx")}


class TestIntervene:
    def test_fig1(self):
        g = intervene(extend(gallery.fig1()), {"X"})
        assert ("I_X", "X") not in g.directed and ("Z0", "X") not in g.directed
        assert g.kind("X") is NodeKind.INPUT

    def test_empty_is_identity(self):
        g = gallery.fig1()
        assert intervene(g, ()) == g

    def test_bow(self):
        g = intervene(Dmg.from_edges("X->Y; X<->Y"), {"Y"})
        assert g.parents("Y") == frozenset() and not g.bidirected

    def test_latent_rejected(self):
        with pytest.raises(InvalidIntervention):
            intervene(Dmg.from_edges("u->a", latents=["u"]), {"u"})


class TestExtend:
    def test_single_node(self):
        g = extend(Dmg({"v": NodeKind.OUTPUT}))
        assert g.directed == {("I_v", "v")} and g.kind("I_v") is NodeKind.INPUT

    def test_fig1_every_output(self):
        g0 = gallery.fig1()
        g = extend(g0)
        assert {("I_" + v, v) for v in g0.outputs} <= g.directed

    def test_then_intervene(self):
        g = intervene(extend(Dmg({"v": NodeKind.OUTPUT})), {"v"})
        assert ("I_v", "v") not in g.directed

    def test_name_collision(self):
        with pytest.raises(NameCollision):
            extend(Dmg.from_edges("I_a->a"))


class TestAcyclify:
    def test_acyclic_unchanged(self):
        g = Dmg.from_edges("a->b; b->c; a<->c")
        assert acyclify(g) == g

    def test_two_cycle(self):
        g = acyclify(Dmg.from_edges("x->y; y->z; z->y"))
        assert g.directed == {("x", "y"), ("x", "z")}
        assert g.bidirected == {frozenset("yz")}

    def test_fig1(self):
        g = acyclify(gallery.fig1())
        for a, b in (("Z0", "L1"), ("Z0", "W"), ("L1", "W")):
            assert g.has_bidirected(a, b)
        assert {("C", "Z0"), ("C", "L1"), ("C", "W")} <= g.directed

    @given(dmgs(max_nodes=5))
    def test_result_is_acyclic(self, g):
        assert acyclify(g).is_acyclic()


class TestTwin:
    def test_empty_intervention(self):
        g = Dmg.from_edges("X->Y")
        assert twin_graph(g, ()) == g

    def test_single_edge(self):
        g = twin_graph(Dmg.from_edges("X->Y"), {"X"})
        assert g.nodes == {"X", "Y", "X'", "Y'"}
        assert {("X", "Y"), ("X'", "Y'")} == g.directed
        assert g.kind("X'") is NodeKind.INPUT

    def test_shared_noise_links_copies(self):
        g = twin_graph(Dmg.from_edges("X->Y"), {"X"})
        assert g.has_bidirected("Y", "Y'")

    def test_conditional_ignorability_backdoor(self):
        g = twin_graph(Dmg.from_edges("Z->X; X->Y; Z->Y"), {"X"})
        assert separated(g, {"Y'"}, {"X"}, {"Z"})

    def test_non_descendants_are_merged(self):
        g = twin_graph(Dmg.from_edges("Z->X; X->Y; Z->Y"), {"X"})
        assert "Z'" not in g.nodes and ("Z", "Y'") in g.directed


class TestInputConfound:
    def test_one_input_identity(self):
        g = Dmg.from_edges("j->a", inputs=["j"])
        assert input_confound(g) == g

    def test_three_inputs(self):
        g = Dmg.from_edges("j1->v; j2->v; j3->v", inputs=["j1", "j2", "j3"])
        assert len(input_confound(g).bidirected) == 3

    def test_collider_between_inputs(self):
        g = input_confound(Dmg.from_edges("j1->v; j2->v", inputs=["j1", "j2"]))
        assert not separated(g, {"j1"}, {"j2"}, {"v"})


@given(dmgs(max_nodes=5), st.data())
def test_induced_subgraph_keeps_only_inner_edges(g, data):
    keep = data.draw(st.sets(st.sampled_from(sorted(g.nodes)), min_size=1))
    h = induced_subgraph(g, keep)
    assert h.nodes == keep
    assert all(a in keep and b in keep for a, b in h.directed)
