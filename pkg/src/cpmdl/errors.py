"""Exception hierarchy shared by all cpmdl modules."""


class CpmError(Exception):
    """Base class for all cpmdl errors."""


# -- dataset validation ------------------------------------------------------

class EmptyDataError(CpmError):
    pass


class InconsistentDimensionsError(CpmError):
    pass


class NoUncensoredValuesError(CpmError):
    """The likelihood has no interior anchor points."""


class NonFiniteValueError(CpmError):
    pass


class InternalAssignmentError(CpmError):
    """An observation could not be mapped to any likelihood term."""


# -- likelihood / solver -----------------------------------------------------

class NonIncreasingAlphasError(CpmError):
    pass


class NonFiniteLikelihoodError(CpmError):
    pass


class NotConvergedError(CpmError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularInformationError(CpmError):
    pass


class NonIncreasingAlphasUnrecoverableError(CpmError):
    """Step-halving exhausted without restoring the alpha ordering."""


# -- inference ---------------------------------------------------------------

class NotNestedError(CpmError):
    pass


class MismatchedDataError(CpmError):
    pass


class NonBinaryCovariateError(CpmError):
    pass


# -- derived quantities ------------------------------------------------------

class InvalidProbabilityError(CpmError):
    pass


class UnsupportedLinkError(CpmError):
    pass


# -- comparators -------------------------------------------------------------

class NonPositiveOutcomeError(CpmError):
    pass


class MultipleDLsUnsupportedError(CpmError):
    pass


# -- simulation --------------------------------------------------------------

class UnknownScenarioError(CpmError):
    pass


# -- CLI / IO ----------------------------------------------------------------

class UnknownCensorCodeError(CpmError):
    pass


class CsvParseError(CpmError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownProfileColumnError(CpmError):
    pass
