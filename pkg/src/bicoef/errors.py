"""Exception hierarchy.

Every failure raised by the library derives from :class:`BicoefError`; the
``stage`` class attribute names the pipeline stage so the CLI can report
where a run broke.
"""


class BicoefError(Exception):
    stage = "core"


# series_core
class SeriesError(BicoefError, ArithmeticError):
    stage = "series"


class DivisionByNonUnit(SeriesError):
    pass


class NonZeroConstant(SeriesError):
    pass


class NotInvertible(SeriesError):
    pass


class LogOfZero(SeriesError):
    pass


class RootOfZero(SeriesError):
    pass


class AmbiguousBranch(SeriesError):
    pass


class IndexOutOfOrder(SeriesError, IndexError):
    pass


class PrecisionError(SeriesError):
    """Non-finite value or an operation unavailable in the active precision mode."""


# expr
class ExprError(BicoefError):
    stage = "expr"


class ExprSyntaxError(ExprError, ValueError):
    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        super().__init__(f"{message} at offset {offset}")


class UnboundVariable(ExprError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EvalPole(ExprError, ZeroDivisionError):
    pass


class EvalBranch(ExprError, ValueError):
    pass


class NotAnalyticAtCenter(ExprError):
    pass


# geometry
class GeometryError(BicoefError):
    stage = "geometry"


class NoConvergence(GeometryError):
    pass


class NonSimple(GeometryError):
    pass


class DegenerateChart(GeometryError):
    pass


class ChartRadiusExceeded(GeometryError):
    pass


class CrossCheckFailed(GeometryError):
    pass


class OutOfCone(GeometryError):
    pass


# derived
class DerivedError(BicoefError):
    stage = "derived"


class PhaseLinearTermNonzero(DerivedError):
    pass


class PhaseDegreeChange(DerivedError):
    pass


class AmplitudeIdenticallyZero(DerivedError):
    pass


class OrderTooSmall(DerivedError):
    pass


# canonical
class CanonicalError(BicoefError):
    stage = "canonical"


class DegreeMismatch(CanonicalError):
    pass


class ResidualTooLarge(CanonicalError):
    pass


class ContinuationLost(CanonicalError):
    pass


class NoNearbyRoot(CanonicalError):
    pass


class BranchAmbiguous(CanonicalError):
    pass


# expansion
class ExpansionError(BicoefError):
    stage = "expansion"


class BranchFailure(ExpansionError):
    pass


class SignUndefined(ExpansionError):
    pass


class NotConstantDegree(ExpansionError):
    pass


class NotApplicable(ExpansionError):
    pass


class NonPositiveArgument(ExpansionError, ValueError):
    pass


# oracle
class OracleError(BicoefError):
    stage = "oracle"


class PositivityProbeFailed(OracleError):
    pass


class QuadratureNoConvergence(OracleError):
    pass


class NotAnalyticAtOrigin(OracleError):
    pass


class OracleMissing(OracleError):
    pass


class CacheFormatError(OracleError):
    pass


# cli
class ProblemFileError(BicoefError):
    stage = "input"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateMode(ProblemFileError):
    pass


class GridSpecError(BicoefError):
    stage = "input"
