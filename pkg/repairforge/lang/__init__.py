"""MiniLang: the small imperative language every corpus program is written in."""

from repairforge.lang.ast import Program
from repairforge.lang.parser import parse_expression, parse_program
from repairforge.lang.printer import format_expression, pretty_print

__all__ = [
    "Program",
    "format_expression",
    "parse_expression",
    "parse_program",
    "pretty_print",
]
