class EngelFlagError(Exception):
    module = "engelflag"
    exit_code = 1

    def __str__(self):
        return f"[{self.module}] {super().__str__()}"


class ChartMismatchError(EngelFlagError):
    module = "exterior_core"


class DegreeOverflowError(EngelFlagError):
    module = "exterior_core"


class FormDegreeError(EngelFlagError):
    module = "exterior_core"


class EmptyInputError(EngelFlagError):
    module = "distribution_analysis"


class CorankError(EngelFlagError):
    module = "distribution_analysis"
    exit_code = 2


class NoPolynomialAnnihilator(EngelFlagError):
    module = "distribution_analysis"
    exit_code = 2


class CriteriaInputError(EngelFlagError):
    module = "engel_verify"


class DependentFormsError(EngelFlagError):
    module = "engel_verify"
    exit_code = 2


class HypothesisViolation(EngelFlagError):
    module = "moser_stability"
    exit_code = 2

    def __init__(self, msg, stage=None):
        super().__init__(msg)
        self.stage = stage

    def __str__(self):
        base = super().__str__()
        return f"{base} (stage {self.stage})" if self.stage else base


class FlowTruncated(EngelFlagError):
    module = "moser_stability"
    exit_code = 2


class ExpressionSyntaxError(EngelFlagError):
    module = "cli_frontend"

    def __init__(self, msg, line=1, column=1):
        super().__init__(f"{msg} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownIdentifierError(EngelFlagError):
    module = "cli_frontend"


class InputDocumentError(EngelFlagError):
    module = "cli_frontend"
