"""Synchronous model kit: typed expressions, mode automata, composition and step semantics."""
from .compose import compose
from .expr import (FALSE, TRUE, Binary, Const, If, Not, Var, add, and_, compile_expr, eq, eval_expr,
                   free_vars, implies, ite, le, lit, mul, not_, or_, rename, type_of, var)
from .interp import node_react, node_reset, node_step, run_sequence, state_valuation
from .node import (Automaton, Contract, Controllable, Decl, Equation, Instance, Memory, Mode, Node,
                   ProgramState, Transition, validate)
from .reach import StateGraph, enumerate_reachable
from .types import BOOL, INT, PEID, BoolType, EnumType, IntType
