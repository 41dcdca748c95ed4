"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class BCOVError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class ParseError(BCOVError):
    """A model file or scalar string is malformed."""


class AxiomError(BCOVError):
    """A model violates a dGBV axiom; ``axiom`` names it and ``witness`` is a basis tuple."""

    def __init__(self, axiom: str, witness: tuple = (), detail: str = ""):
        self.axiom = axiom
        self.witness = tuple(witness)
        msg = f"axiom {axiom!r} violated at {self.witness}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class KahlerAxiomError(AxiomError):
    """The Hodge data of a model fails the Kähler-surrogate identities."""


class ModelMismatch(BCOVError):
    """Operands belong to different models."""


class TruncationMismatch(BCOVError):
    """Series with different coordinate universes or truncation orders were combined."""


class SingularInnerProduct(BCOVError):
    """The model inner product is not invertible."""


class TooFewLegs(BCOVError):
    """A vertex or tree was requested with fewer than three legs."""


class ShapeMismatch(BCOVError):
    """The number of legs does not match the tree."""


class NonIntegrableGradient(BCOVError):
    """A gradient series is not closed, so no potential exists."""


class ObstructionError(BCOVError):
    """The Maurer-Cartan equation is obstructed at some order."""

    exit_code = 3

    def __init__(self, order: int, witness):
        self.order = order
        self.witness = witness
        super().__init__(f"Maurer-Cartan obstruction at order {order}: {witness}")


class MiniversalityFailure(BCOVError):
    """The derivatives of the J-function do not form a frame."""

    exit_code = 3


class DegenerateMetric(BCOVError):
    """The flat metric is degenerate."""

    exit_code = 3


class MissingBidegree(BCOVError):
    """An operation needs bidegrees but the model does not declare them."""


class UnknownModel(BCOVError):
    """A zoo name that does not exist was requested."""

    exit_code = 4


class ParamError(BCOVError):
    """A pipeline parameter is out of range."""

    exit_code = 4


class StageError(BCOVError):
    """Wraps an error raised inside a pipeline stage, tagging the stage."""

    def __init__(self, stage: str, cause: BCOVError):
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
