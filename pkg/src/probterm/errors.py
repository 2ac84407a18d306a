"""Exception hierarchy shared by all analysis phases."""


class ProbTermError(Exception):
    """Base class for every error raised by the analyzer."""


class FrontendError(ProbTermError):
    """Input program could not be turned into a ProgramSpec."""


class ProgramSyntaxError(FrontendError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class UnknownDistribution(ProgramSyntaxError):
    pass


class StructureError(FrontendError):
    """A parsed program violates the structural constraints of the language."""

    def __init__(self, variable, reason):
        self.variable = variable
        self.reason = reason
        super().__init__(f"{variable}: {reason}")


class AnalysisError(ProbTermError):
    """Recoverable analysis failure; degrades the verdict to Maybe."""


class MomentUnavailable(AnalysisError):
    def __init__(self, monomial, dist, order):
        self.monomial = monomial
        self.dist = dist
        self.order = order
        super().__init__(f"moment of order {order} of {dist} unavailable (needed for {monomial})")


class BasisExplosion(AnalysisError):
    pass


class ResonanceAmbiguity(AnalysisError):
    pass


class InternalSoundnessError(ProbTermError):
    """Two proof rules certified contradicting properties. Indicates a bug."""


class UnboundSymbol(ProbTermError):
    def __init__(self, symbols):
        self.symbols = sorted(symbols)
        super().__init__("unbound symbolic constants: " + ", ".join(self.symbols))
