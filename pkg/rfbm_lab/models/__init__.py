from .common import Convention, FunctionKind, OutputFormat, SuiteName, Verdict
from .reports import McReport, make_report, timed

__all__ = [
    "Convention",
    "FunctionKind",
    "McReport",
    "make_report",
    "timed",
    "OutputFormat",
    "SuiteName",
    "Verdict",
]
