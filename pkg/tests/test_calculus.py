import numpy as np
import pytest

from sigmacalc.calculus import (
    Rule,
    RuleQuery,
    check_ignorability,
    check_mechanism_change,
    check_rule,
    extended_graph,
)
from sigmacalc.dmg import Dmg
from sigmacalc.errors import MalformedQuery
from sigmacalc.generators import random_dmg
from sigmacalc.scm import random_discrete_scm

from kernels import kernel

BACKDOOR = Dmg.from_edges("Z->X; X->Y; Z->Y")
BOW = Dmg.from_edges("X->Y; X<->Y")


class TestRules:
    def test_backdoor_rule_two(self):
        v = check_rule(BACKDOOR, RuleQuery(Rule.TWO, x="X", y="Y", z="Z"))
        assert v.applicable
        assert v.conclusion == "P(Y|do(X),Z) = P(Y|X,Z)"

    def test_bow_rule_two(self):
        v = check_rule(BOW, RuleQuery(2, x="X", y="Y"))
        assert not v.applicable and v.conclusion is None

    def test_rule_one_with_empty_x(self):
        v = check_rule(BOW, RuleQuery(1, x=(), y="Y"))
        assert v.applicable
        assert v.conclusion == "P(Y) = P(Y)"

    def test_rule_three_blocked_by_direct_edge(self):
        assert not check_rule(BACKDOOR, RuleQuery(3, x="X", y="Y")).applicable

    def test_rule_three_without_path(self):
        g = Dmg.from_edges("Y->X")
        v = check_rule(g, RuleQuery(3, x="X", y="Y"))
        assert v.applicable and v.conclusion == "P(Y|do(X)) = P(Y)"

    def test_do_w_rendered(self):
        g = Dmg.from_edges("W->X; X->Y")
        v = check_rule(g, RuleQuery(2, x="X", y="Y", w="W"))
        assert v.conclusion == "P(Y|do(X),do(W)) = P(Y|X,do(W))"

    def test_extended_graph_uses_outputs_only(self):
        g = Dmg.from_edges("j->a", inputs=["j"])
        assert extended_graph(g, {"j"}) == extended_graph(g)

    def test_overlap_rejected(self):
        with pytest.raises(MalformedQuery):
            check_rule(BACKDOOR, RuleQuery(1, x="X", y="X"))

    def test_query_on_input_rejected(self):
        g = Dmg.from_edges("j->a", inputs=["j"])
        with pytest.raises(MalformedQuery):
            check_rule(g, RuleQuery(1, x="j", y="a"))

    def test_condition_on_inputs_flag(self):
        g = Dmg.from_edges("W->X; X->Y; W->Y")
        q = RuleQuery(1, x="X", y="Y", w="W")
        a = check_rule(g, q)
        b = check_rule(g, q, condition_on_inputs=True)
        assert "W" not in a.query.c and "W" in b.query.c

    def test_verdict_json(self):
        v = check_rule(BACKDOOR, RuleQuery(2, x="X", y="Y", z="Z"))
        assert v.to_json()["separation"]["b"] == ["I_X"]


class TestMechanismChange:
    def test_empty_i(self):
        g = Dmg.from_edges("j->v", inputs=["j"])
        assert check_mechanism_change(g, {"v"}, (), ())

    def test_isolated_target(self):
        g = Dmg.from_edges("j->v", inputs=["j"], nodes=["w"])
        assert check_mechanism_change(g, {"w"}, (), {"j"})

    def test_path_from_input(self):
        g = Dmg.from_edges("j->v; v->w", inputs=["j"])
        assert not check_mechanism_change(g, {"w"}, (), {"j"})

    def test_i_must_be_inputs(self):
        with pytest.raises(MalformedQuery):
            check_mechanism_change(Dmg.from_edges("a->b"), {"b"}, (), {"a"})


class TestIgnorability:
    def test_backdoor_conditional(self):
        assert check_ignorability(BACKDOOR, "Y", "X", "Z")

    def test_bow_conditional(self):
        assert not check_ignorability(BOW, "Y", "X")

    def test_empty_x(self):
        assert check_ignorability(BOW, "Y", ())

    def test_mediator_conditioning_is_not_ignorable(self):
        # the shared noise of M links M and M', so conditioning on M opens X -> M <-> M' -> Y'
        assert not check_ignorability(Dmg.from_edges("X->M; M->Y"), "Y", "X", "M")

    def test_strong_implies_conditional(self):
        for g in (BACKDOOR, BOW, Dmg.from_edges("X->Y")):
            for z in ((), ("Z",) if "Z" in g.nodes else ()):
                if check_ignorability(g, "Y", "X", z, strong=True):
                    assert check_ignorability(g, "Y", "X", z)


def _rule_identity(m, q):
    y, x, z, w = q.y, q.x, q.z, q.w
    if q.rule is Rule.ONE:
        lhs, rhs = kernel(m, y, x | z, w), kernel(m, y, z, w)
    elif q.rule is Rule.TWO:
        lhs, rhs = kernel(m, y, z, w | x), kernel(m, y, x | z, w)
    else:
        lhs, rhs = kernel(m, y, z, w | x), kernel(m, y, z, w)
    return lhs.max_abs_diff(rhs)


def test_applicable_rules_hold_numerically():
    applicable = differing = 0
    for seed in range(15):
        rng = np.random.default_rng(seed)
        g = random_dmg(rng, int(rng.integers(3, 5)), 0.35, 0.2, n_inputs=int(rng.integers(0, 2)))
        m = random_discrete_scm(rng, g)
        outs = sorted(g.outputs)
        for _ in range(12):
            roles = rng.integers(0, 4, size=len(outs))
            y, x, z, w = (frozenset(v for v, r in zip(outs, roles) if r == k) for k in range(4))
            if not y:
                continue
            for rule in Rule:
                q = RuleQuery(rule, x=x, y=y, z=z, w=w)
                diff = _rule_identity(m, q)
                if check_rule(g, q).applicable:
                    assert diff <= 1e-12, (seed, q)
                    applicable += 1
                elif diff > 1e-6:
                    differing += 1
    # the corpus must exercise both verdicts
    assert applicable >= 100 and differing >= 50
