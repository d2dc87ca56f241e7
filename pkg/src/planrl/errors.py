"""Exception taxonomy shared across the package."""


class PlanRLError(Exception):
    """Base class for all package errors."""


class ParseError(PlanRLError):
    """Malformed input text; carries a location when one is known."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(PlanRLError):
    """A structural invariant of a loaded artifact is violated."""


class VariantError(PlanRLError):
    """Task variant names a feature the map does not provide."""


class SteppedTerminatedEnv(PlanRLError):
    """step() called on a terminated environment state."""


class EvaluatorError(PlanRLError):
    """Symbolic evaluator references an unknown predicate, object, or region."""


class VocabularyMismatch(PlanRLError):
    """Two symbolic states built over different vocabularies were compared."""


class CycleError(ValidationError):
    """Knowledge edges do not form a tree (cycle, multi-parent, or disconnect)."""


class MultipleRootsError(ValidationError):
    """More than one root candidate in a knowledge tree."""


class UnknownPredicateError(ValidationError):
    """Atom uses a predicate or objects outside the declared vocabulary."""


class NotALeafError(PlanRLError):
    """Operation requires a leaf node."""


class UnknownNodeError(PlanRLError):
    """Node id missing from the tree."""


class BindingTypeError(PlanRLError):
    """Subgoal instantiation binding uses unknown or ill-typed objects."""


class CompileError(PlanRLError):
    """Knowledge tree could not be compiled into a planning problem."""


class UnsupportedFeatureError(PlanRLError):
    """Input uses a construct outside the supported HDDL subset."""


class UnknownMethodError(PlanRLError):
    """Reward ledger has no entry for a method id."""


class UnknownOptionError(PlanRLError):
    """Reward ledger has no entry for an option id."""


class UnreachableTaskError(PlanRLError):
    """Task cannot be refined to primitives in the given domain."""


class NoSolutionError(PlanRLError):
    """Initial task network has no solution."""


class NoApplicableOptionError(PlanRLError):
    """Plan and environment state desynchronized: cursor option cannot start."""


class ShapeError(PlanRLError):
    """Observation does not match what a learner was trained on."""


class LengthMismatchError(PlanRLError):
    """Aggregation over logs of unequal length."""


class IoError(PlanRLError):
    """File emission failed."""
