"""Static (non-)termination analysis of polynomial probabilistic loops.

Programs have the shape ``init; while G > 0: body`` where every body
assignment is a polynomial update (possibly a probabilistic choice between
several) or a draw from a built-in distribution.  ``decide`` classifies a
program as (not) almost-surely terminating and (not) positively almost-surely
terminating, or leaves a property undecided.
"""

from .errors import (
    AnalysisError,
    FrontendError,
    InternalSoundnessError,
    ProbTermError,
    ProgramSyntaxError,
    StructureError,
    UnboundSymbol,
    UnknownDistribution,
)
from .frontend import ProgramSpec, load, load_file, parse, pretty, validate
from .rules import Verdict, answer, decide
from .simulator import SimConfig, SimReport, simulate

__version__ = "0.1.0"

__all__ = [
    "AnalysisError", "FrontendError", "InternalSoundnessError", "ProbTermError",
    "ProgramSyntaxError", "StructureError", "UnboundSymbol", "UnknownDistribution",
    "ProgramSpec", "load", "load_file", "parse", "pretty", "validate",
    "Verdict", "answer", "decide", "SimConfig", "SimReport", "simulate",
]
