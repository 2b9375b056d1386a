"""Surface syntax: parsing, printing, desugaring and scope checking."""

from .ast import *  # noqa: F401,F403
from .desugar import desugar, desugar_def, desugar_signature, is_core
from .parser import (
    ParseError, parse_constraint, parse_expr, parse_process, parse_program,
    parse_query, parse_type, tokenize,
)
from .pretty import (
    pretty_program, show_expr, show_process, show_prop, show_type, show_value,
)
from .scopes import Diagnostic, ScopeError, ScopeReport, check_scopes
