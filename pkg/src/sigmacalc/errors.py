"""Exception types raised across the package."""


class SigmaCalcError(Exception):
    """Base class for all library errors."""


class UnknownNode(SigmaCalcError, KeyError):
    def __init__(self, nodes):
        self.nodes = sorted(nodes)
        super().__init__(f"unknown node(s): {', '.join(self.nodes)}")

    def __str__(self):
        return self.args[0]


class InvalidGraph(SigmaCalcError, ValueError):
    pass


class NameCollision(SigmaCalcError, ValueError):
    pass


class SccBoundViolation(SigmaCalcError, ValueError):
    pass


class InputMarginalization(SigmaCalcError, ValueError):
    pass


class InvalidIntervention(SigmaCalcError, ValueError):
    pass


class LatentInQuery(SigmaCalcError, ValueError):
    pass


class GraphTooLarge(SigmaCalcError, ValueError):
    pass


class MalformedQuery(SigmaCalcError, ValueError):
    pass


class MalformedSpec(SigmaCalcError, ValueError):
    pass


class CaseMismatch(MalformedSpec):
    pass


class PoolTooLarge(SigmaCalcError, ValueError):
    pass


class EmptyTarget(SigmaCalcError, ValueError):
    pass


class DomainGap(SigmaCalcError, ArithmeticError):
    """Conditioning on an event of probability zero."""


class SingularSystem(SigmaCalcError, ArithmeticError):
    pass


class SingularConditioning(SigmaCalcError, ArithmeticError):
    pass


class MissingSubLoopMechanism(SigmaCalcError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "missing sub-loop mechanism"


class StateSpaceTooLarge(SigmaCalcError, ValueError):
    pass


class NotUniquelySolvable(SigmaCalcError, ValueError):
    pass
