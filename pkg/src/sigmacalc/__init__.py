"""σ-separation, causal calculus, adjustment and identification for
directed mixed graphs with cycles, plus exact linear and discrete models."""

__version__ = "0.1.0"

from .dmg import (  # noqa: E402
    Dmg,
    NodeKind,
    acyclify,
    ancestors,
    descendants,
    extend,
    indicator,
    induced_dmg,
    intervene,
    marginalize,
    strongly_connected_components,
    twin_graph,
)
from .separation import Notion, SeparationQuery, d_separated, separated, sigma_separated  # noqa: E402
from .calculus import Rule, RuleQuery, check_ignorability, check_mechanism_change, check_rule  # noqa: E402
from .adjustment import (  # noqa: E402
    AdjustmentSpec,
    PartialExternalSpec,
    SpecialCase,
    check_general_adjustment,
    check_partial_external,
    check_selection_without_external,
    check_special_case,
    find_adjustment_sets,
)
from .identify import apt_order, consolidated_district, consolidated_districts, identify, subgraph_for  # noqa: E402
from .estimand import FAIL, evaluate_estimand  # noqa: E402
from .io import graph_from_json, graph_to_json  # noqa: E402

__all__ = [
    "__version__",
    "Dmg",
    "NodeKind",
    "acyclify",
    "ancestors",
    "descendants",
    "extend",
    "indicator",
    "induced_dmg",
    "intervene",
    "marginalize",
    "strongly_connected_components",
    "twin_graph",
    "Notion",
    "SeparationQuery",
    "separated",
    "sigma_separated",
    "d_separated",
    "Rule",
    "RuleQuery",
    "check_rule",
    "check_mechanism_change",
    "check_ignorability",
    "AdjustmentSpec",
    "PartialExternalSpec",
    "SpecialCase",
    "check_general_adjustment",
    "check_special_case",
    "check_selection_without_external",
    "check_partial_external",
    "find_adjustment_sets",
    "apt_order",
    "consolidated_district",
    "consolidated_districts",
    "subgraph_for",
    "identify",
    "FAIL",
    "evaluate_estimand",
    "graph_from_json",
    "graph_to_json",
]
