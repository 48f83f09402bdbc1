"""Textual node language: parsing and canonical printing."""
from .parser import Diagnostic, SourceUnit, parse_node, parse_program
from .printer import format_expr, pretty_print
