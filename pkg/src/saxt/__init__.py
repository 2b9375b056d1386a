"""Sized-type SAX: a typed concurrent language with arithmetic refinements,
circular recursion and a termination check, run over write-once memory."""

from .arith import ArithContext, entails, query_entails, satisfiable
from .pipeline import FrontEndError, Program, load, load_checked, load_file
from .runtime import RunResult, Status, decode, run
from .syntax import desugar_signature, parse_program, pretty_program
from .typecheck import CheckError, TypeCheckFailure, check_signature
from .validity import Mode, ValidityReport, validate_program

__version__ = "0.1.0"

__all__ = [
    "ArithContext", "CheckError", "FrontEndError", "Mode", "Program", "RunResult",
    "Status", "TypeCheckFailure", "ValidityReport", "check_signature", "decode",
    "desugar_signature", "entails", "load", "load_checked", "load_file",
    "parse_program", "pretty_program", "query_entails", "run", "satisfiable",
    "validate_program",
]
