"""Exact verification tools for quantum codes under Pauli and exchange errors."""

from qexch.codes import Code, builtin_code, load_code, save_code
from qexch.errors import ErrorOp, ErrorSet, apply_error, exchange, make_error_set, pauli
from qexch.field import ExactScalar
from qexch.klcheck import check_kl, gram_blocks
from qexch.qstate import StateVector

__all__ = [
    "Code",
    "ErrorOp",
    "ErrorSet",
    "ExactScalar",
    "StateVector",
    "apply_error",
    "builtin_code",
    "check_kl",
    "exchange",
    "gram_blocks",
    "load_code",
    "make_error_set",
    "pauli",
    "save_code",
]

__version__ = "0.1.0"
