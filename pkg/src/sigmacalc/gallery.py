"""Small named graphs and models used in examples and tests."""

from __future__ import annotations

import numpy as np

from .dmg import Dmg, NodeKind
from .scm.discrete import DiscreteScm, Mechanism

__all__ = [
    "fig1",
    "FIG1_ROLES",
    "bow",
    "frontdoor",
    "backdoor",
    "crossed_districts",
    "feedback",
    "two_cycle_model",
]

# roles of the adjustment example: Y, X, context C, selection S, Z0, Z+, L
FIG1_ROLES = {
    "y": ["Y"],
    "x": ["X"],
    "c": ["C"],
    "s": ["S"],
    "z0": ["Z0"],
    "zplus": ["Z1", "Z2"],
    "l": ["L1", "L2"],
    "w": [],
}


def fig1() -> Dmg:
    """Induced DMG with a feedback loop ``Z0 -> L1 -> W -> Z0`` and
    selection node ``S``. Indicators are added by :func:`~sigmacalc.dmg.extend`."""
    return Dmg.from_edges(
        "X->Z1; X->Y; Z1->Z2; C->Z0; Z0->X; Z0->L1; L1->W; W->Z0; L1<->Y; Z1->S; L2->Y; L2->Z2"
    )


def bow() -> Dmg:
    return Dmg.from_edges("X->Y; X<->Y")


def frontdoor() -> Dmg:
    return Dmg.from_edges("X->Z; Z->Y; X<->Y")


def backdoor() -> Dmg:
    return Dmg.from_edges("Z->X; X->Y; Z->Y")


def crossed_districts() -> Dmg:
    """Two districts that the order cannot separate into blocks."""
    return Dmg.from_edges("v1->v3; v2->v4; v1<->v4; v2<->v3")


def feedback() -> Dmg:
    """``x -> y`` with the two-cycle ``y <-> z`` (directed both ways)."""
    return Dmg.from_edges("x->y; y->z; z->y")


def two_cycle_model(compatible: bool = True) -> DiscreteScm:
    """Binary two-cycle ``y -> z -> y`` with mechanisms for ``{y}``, ``{z}``
    and ``{y, z}``.

    ``g_y(z) = z`` and ``g_z(y) = 1``. The joint mechanism is ``(1, 1)`` when
    compatible. The incompatible variant uses ``(0, 1)``, which agrees with
    ``g_z`` but not with ``g_y``.
    """
    g = Dmg({"y": NodeKind.OUTPUT, "z": NodeKind.OUTPUT}, [("y", "z"), ("z", "y")])
    gy = Mechanism(("y",), ("z",), [[0], [1]])
    gz = Mechanism(("z",), ("y",), [[1], [1]])
    joint = (1, 1) if compatible else (0, 1)
    gyz = Mechanism(("y", "z"), (), np.array(joint))
    return DiscreteScm(g, {"y": 2, "z": 2}, [gy, gz, gyz], {})
