"""Recursive-descent parser producing validated synchro nodes."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (DslError, DslSyntaxError, DslTypeError, UnknownFlow, ValidationError)
from ..synchro.expr import FALSE, TRUE, Binary, Const, If, Not, Var, free_vars
from ..synchro.node import (Automaton, Contract, Controllable, Decl, Equation, Instance, Memory, Mode,
                            Node, Transition, validate)
from ..synchro.types import BOOL, BUILTIN_ENUMS, INT, INT_MAX, EnumType
from .lexer import tokenize


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    severity: str = "warning"

    def __str__(self):
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


@dataclass
class SourceUnit:
    text: str
    nodes: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    types: dict = field(default_factory=dict)

    def node(self, name):
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    @property
    def main(self):
        return self.nodes[-1]


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.pos = {}
        self.enums = dict(BUILTIN_ENUMS)
        self.symbols = {s: e for e in self.enums.values() for s in e.symbols}
        self.nodes = {}
        self.unit = SourceUnit(text)

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise DslSyntaxError(msg, tok.line, tok.col)

    def at(self, text, kind=None):
        t = self.tok
        return t.text == text and t.kind in ((kind,) if kind else ("kw", "op"))

    def accept(self, text):
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.at(text):
            shown = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {shown!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what="identifier"):
        t = self.tok
        if t.kind != "id":
            shown = t.text or "end of input"
            self.error(f"expected {what}, found {shown!r}")
        self.i += 1
        return t

    def mark(self, expr, tok):
        self.pos[id(expr)] = (expr, tok.line, tok.col)
        return expr

    def where(self, expr, default=None):
        got = self.pos.get(id(expr))
        if got is None:
            return default or (1, 1)
        return got[1], got[2]

    # program
    def program(self):
        if self.tok.kind == "eof":
            self.error("empty program: expected 'node' or 'type'")
        while self.tok.kind != "eof":
            if self.at("type"):
                self.typedecl()
            elif self.at("node"):
                node = self.node()
                self.unit.nodes.append(node)
                self.nodes[node.name] = node
            else:
                self.error(f"expected 'node' or 'type', found {self.tok.text!r}")
        self.unit.types = {k: v for k, v in self.enums.items() if k not in BUILTIN_ENUMS}
        return self.unit

    def typedecl(self):
        self.expect("type")
        name = self.ident("type name")
        if name.text in self.enums:
            raise DslTypeError(f"type {name.text!r} already declared", name.line, name.col)
        self.expect("=")
        syms = [self.ident("enum symbol")]
        while self.accept("|"):
            syms.append(self.ident("enum symbol"))
        self.accept(";")
        texts = [s.text for s in syms]
        for s in syms:
            if s.text in self.symbols or texts.count(s.text) > 1:
                raise DslTypeError(f"enum symbol {s.text!r} already belongs to an enumeration", s.line, s.col)
        enum = EnumType(name.text, tuple(texts))
        self.enums[name.text] = enum
        for s in texts:
            self.symbols[s] = enum

    def type_(self):
        t = self.tok
        if self.accept("bool"):
            return BOOL
        if self.accept("int"):
            return INT
        if t.kind == "id":
            self.i += 1
            if t.text in self.enums:
                return self.enums[t.text]
            raise DslTypeError(f"unknown type {t.text!r}", t.line, t.col)
        self.error(f"expected a type, found {t.text!r}")

    def decl_group(self, allow_default=False):
        names = [self.ident("flow name")]
        while self.accept(","):
            names.append(self.ident("flow name"))
        self.expect(":")
        typ = self.type_()
        default = None
        if allow_default and self.accept("="):
            default = self.expr()
        return [(n, typ, default) for n in names]

    def decls(self, closer, allow_default=False):
        out = []
        if self.at(closer):
            return out
        out.extend(self.decl_group(allow_default))
        while self.accept(";"):
            if self.at(closer):
                break
            out.extend(self.decl_group(allow_default))
        return out

    def node(self):
        start = self.expect("node")
        name = self.ident("node name")
        if name.text in self.nodes:
            raise DslError(f"node {name.text!r} already defined", name.line, name.col)
        self.expect("(")
        inputs = self.decls(")")
        self.expect(")")
        self.expect("returns")
        self.expect("(")
        outputs = self.decls(")")
        self.expect(")")
        enforce = None
        ctls = []
        if self.accept("contract"):
            enforce, ctls = self.contract()
        locals_ = []
        if self.accept("var"):
            locals_ = self.decls("let")
        self.expect("let")
        body = {"eqs": [], "mems": [], "auts": [], "insts": []}
        while not self.at("tel"):
            if self.tok.kind == "eof":
                self.error("expected 'tel'")
            self.item(body)
            self.accept(";")
        self.expect("tel")
        return self.build(name, inputs, outputs, locals_, enforce, ctls, body)

    def contract(self):
        enforce, ctls = None, []
        seen_with = False
        for _ in range(2):
            if self.at("assume"):
                self.error("'assume' clauses are not supported")
            if enforce is None and self.accept("enforce"):
                enforce = self.expr()
                self.accept(";")
            elif not seen_with and self.accept("with"):
                seen_with = True
                self.expect("(")
                ctls = self.decls(")", allow_default=True)
                self.expect(")")
                self.accept(";")
        if enforce is None:
            self.error("contract needs an 'enforce' clause")
        return enforce, ctls

    def item(self, body):
        if self.accept("automaton"):
            body["auts"].append(self.automaton())
            return
        t = self.tok
        if self.accept("("):
            results = [self.result()]
            while self.accept(","):
                results.append(self.result())
            self.expect(")")
            self.expect("=")
            callee = self.ident("node name")
            if not self.at("("):
                self.error("a tuple of results must be bound to a node call")
            body["insts"].append((t, callee, self.args(), results))
            return
        lhs = self.ident("equation or 'automaton'")
        self.expect("=")
        if self.tok.kind == "id" and self.peek().text == "(" and self.peek().kind == "op":
            callee = self.ident()
            body["insts"].append((lhs, callee, self.args(), [lhs]))
            return
        save = self.i
        lit_tok = self.tok
        lit = self.literal_or_none()
        if lit is not None and self.accept("fby"):
            body["mems"].append((lhs, lit, lit_tok, self.expr()))
            return
        self.i = save
        body["eqs"].append((lhs, self.expr()))

    def result(self):
        t = self.ident("result name")
        return None if t.text == "_" else t

    def args(self):
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.accept(","):
                out.append(self.expr())
        self.expect(")")
        return out

    def literal_or_none(self):
        t = self.tok
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if t.kind == "int" or (t.text == "-" and self.peek().kind == "int"):
            return self.atom()
        if t.kind == "id" and t.text in self.symbols:
            self.i += 1
            return Const(t.text, self.symbols[t.text])
        return None

    def automaton(self):
        modes = []
        if not self.at("state"):
            self.error("expected 'state'")
        while self.accept("state"):
            name = self.ident("state name")
            eqs = []
            if self.tok.kind == "id" and self.tok.text == "do":
                self.i += 1
                while self.tok.kind == "id" and self.peek().text == "=":
                    lhs = self.ident()
                    self.expect("=")
                    eqs.append((lhs, self.expr()))
                    if not self.accept(";"):
                        break
            trans = []
            if self.accept("until"):
                trans.append(self.transition())
                while self.accept("|"):
                    trans.append(self.transition())
            modes.append((name, eqs, trans))
        self.expect("end")
        return modes

    def transition(self):
        guard = self.expr()
        self.expect("then")
        target = self.ident("target state")
        emits = []
        if self.accept("emit"):
            emits.append(self.emission())
            while self.accept(","):
                emits.append(self.emission())
        return guard, target, emits

    def emission(self):
        t = self.ident("emitted flow")
        val = TRUE
        if self.accept("="):
            val = self.expr()
        return t, val

    # expressions, lowest precedence first
    def expr(self):
        t = self.tok
        if self.accept("if"):
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            b = self.expr()
            return self.mark(If(c, a, b), t)
        return self.implies()

    def implies(self):
        t = self.tok
        left = self.disj()
        if self.at("=>"):
            op = self.tok
            self.i += 1
            right = self.implies_rhs()
            return self.mark(Binary("implies", left, right), op)
        return left

    def implies_rhs(self):
        if self.at("if"):
            return self.expr()
        return self.implies()

    def disj(self):
        left = self.conj()
        while self.at("or"):
            op = self.tok
            self.i += 1
            left = self.mark(Binary("or", left, self.conj_rhs()), op)
        return left

    def conj_rhs(self):
        return self.expr() if self.at("if") else self.conj()

    def conj(self):
        left = self.neg()
        while self.at("and"):
            op = self.tok
            self.i += 1
            left = self.mark(Binary("and", left, self.expr() if self.at("if") else self.neg()), op)
        return left

    def neg(self):
        t = self.tok
        if self.accept("not"):
            return self.mark(Not(self.expr() if self.at("if") else self.neg()), t)
        return self.cmp()

    def cmp(self):
        left = self.sum()
        if self.at("=") or self.at("<="):
            op = self.tok
            self.i += 1
            right = self.expr() if self.at("if") else self.sum()
            node = self.mark(Binary("eq" if op.text == "=" else "le", left, right), op)
            if self.at("=") or self.at("<="):
                self.error("comparisons do not chain; add parentheses")
            return node
        return left

    def sum(self):
        left = self.prod()
        while self.at("+"):
            op = self.tok
            self.i += 1
            left = self.mark(Binary("add", left, self.expr() if self.at("if") else self.prod()), op)
        return left

    def prod(self):
        left = self.atom()
        while self.at("*"):
            op = self.tok
            self.i += 1
            left = self.mark(Binary("mul", left, self.expr() if self.at("if") else self.atom()), op)
        return left

    def atom(self):
        t = self.tok
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("true"):
            return self.mark(Const(True, BOOL), t)
        if self.accept("false"):
            return self.mark(Const(False, BOOL), t)
        if t.kind == "int":
            self.i += 1
            v = int(t.text)
            if v > INT_MAX:
                raise DslTypeError(f"integer literal {t.text} is out of range", t.line, t.col)
            return self.mark(Const(v, INT), t)
        if t.text == "-" and t.kind == "op" and self.peek().kind == "int":
            self.i += 1
            n = self.tok
            self.i += 1
            v = -int(n.text)
            if v < -INT_MAX:
                raise DslTypeError(f"integer literal -{n.text} is out of range", t.line, t.col)
            return self.mark(Const(v, INT), t)
        if t.kind == "id":
            self.i += 1
            return self.mark(Var(t.text), t)
        if self.at("if"):
            return self.expr()
        shown = t.text or "end of input"
        self.error(f"expected an expression, found {shown!r}")

    # resolution and type checking
    def resolve(self, expr, scope):
        if isinstance(expr, Var):
            if expr.name in scope:
                return expr
            if expr.name in self.symbols:
                return self.copy_pos(expr, Const(expr.name, self.symbols[expr.name]))
            line, col = self.where(expr)
            raise UnknownFlow(f"unknown flow {expr.name!r}", line, col)
        if isinstance(expr, Const):
            return expr
        if isinstance(expr, Not):
            return self.copy_pos(expr, Not(self.resolve(expr.arg, scope)))
        if isinstance(expr, Binary):
            return self.copy_pos(expr, Binary(expr.op, self.resolve(expr.left, scope),
                                              self.resolve(expr.right, scope)))
        if isinstance(expr, If):
            return self.copy_pos(expr, If(self.resolve(expr.cond, scope), self.resolve(expr.then, scope),
                                          self.resolve(expr.else_, scope)))
        raise TypeError(expr)

    def copy_pos(self, old, new):
        got = self.pos.get(id(old))
        if got is not None:
            self.pos[id(new)] = (new, got[1], got[2])
        return new

    def typecheck(self, expr, scope):
        def fail(msg):
            line, col = self.where(expr)
            raise DslTypeError(msg, line, col)

        if isinstance(expr, Const):
            return expr.type
        if isinstance(expr, Var):
            return scope[expr.name]
        if isinstance(expr, Not):
            if self.typecheck(expr.arg, scope) != BOOL:
                fail("'not' expects a boolean operand")
            return BOOL
        if isinstance(expr, Binary):
            lt = self.typecheck(expr.left, scope)
            rt = self.typecheck(expr.right, scope)
            sym = {"and": "and", "or": "or", "implies": "=>", "add": "+", "mul": "*",
                   "le": "<=", "eq": "="}[expr.op]
            if expr.op in ("and", "or", "implies"):
                if lt != BOOL or rt != BOOL:
                    fail(f"'{sym}' expects boolean operands, got {lt} and {rt}")
                return BOOL
            if expr.op in ("add", "mul", "le"):
                if lt != INT or rt != INT:
                    fail(f"'{sym}' expects integer operands, got {lt} and {rt}")
                return INT if expr.op != "le" else BOOL
            if lt != rt:
                fail(f"'=' compares {lt} with {rt}")
            return BOOL
        ct = self.typecheck(expr.cond, scope)
        if ct != BOOL:
            fail("'if' condition must be boolean")
        tt = self.typecheck(expr.then, scope)
        et = self.typecheck(expr.else_, scope)
        if tt != et:
            fail(f"'if' branches differ: {tt} and {et}")
        return tt

    def checked(self, expr, scope, want, what):
        expr = self.resolve(expr, scope)
        got = self.typecheck(expr, scope)
        if want is not None and got != want:
            line, col = self.where(expr)
            raise DslTypeError(f"{what} has type {got}, expected {want}", line, col)
        return expr

    def build(self, name, inputs, outputs, locals_, enforce, ctls, body):
        scope = {}
        for t, typ, _ in inputs + outputs + locals_ + ctls:
            if t.text in scope:
                raise DslError(f"flow {t.text!r} declared twice", t.line, t.col)
            if t.text in self.symbols:
                raise DslError(f"flow {t.text!r} shadows an enum symbol", t.line, t.col)
            scope[t.text] = typ

        def target_type(t):
            if t.text not in scope:
                raise UnknownFlow(f"unknown flow {t.text!r}", t.line, t.col)
            return scope[t.text]

        equations = []
        for lhs, e in body["eqs"]:
            typ = target_type(lhs)
            equations.append(Equation(lhs.text, self.checked(e, scope, typ, f"equation of {lhs.text!r}")))
        memories = []
        for lhs, init, tok, nxt in body["mems"]:
            typ = target_type(lhs)
            if init.type != typ:
                raise DslTypeError(f"initial value of {lhs.text!r} has type {init.type}, expected {typ}",
                                   tok.line, tok.col)
            memories.append(Memory(lhs.text, init.value, self.checked(nxt, scope, typ, f"memory {lhs.text!r}")))
        automata = []
        for modes in body["auts"]:
            built = []
            for mname, eqs, trans in modes:
                meqs = []
                for lhs, e in eqs:
                    meqs.append((lhs.text, self.checked(e, scope, target_type(lhs), f"equation of {lhs.text!r}")))
                mtrans = []
                for guard, target, emits in trans:
                    em = []
                    for t, v in emits:
                        if target_type(t) != BOOL:
                            raise DslTypeError(f"emitted flow {t.text!r} must be boolean", t.line, t.col)
                        em.append((t.text, self.checked(v, scope, BOOL, f"emission of {t.text!r}")))
                    mtrans.append(Transition(self.checked(guard, scope, BOOL, "guard"), target.text, tuple(em)))
                built.append(Mode(mname.text, tuple(meqs), tuple(mtrans)))
            names = [m.name for m in built]
            for mname, _, trans in modes:
                for _, target, _ in trans:
                    if target.text not in names:
                        raise DslError(f"unknown state {target.text!r}", target.line, target.col)
            automata.append(Automaton(tuple(built)))
        instances = []
        for tok, callee, args, results in body["insts"]:
            sub = self.nodes.get(callee.text)
            if sub is None:
                raise DslError(f"unknown node {callee.text!r}", callee.line, callee.col)
            if len(args) != len(sub.inputs):
                raise DslTypeError(f"{callee.text} expects {len(sub.inputs)} arguments, got {len(args)}",
                                   callee.line, callee.col)
            if len(results) != len(sub.outputs):
                raise DslTypeError(f"{callee.text} returns {len(sub.outputs)} flows, got {len(results)}",
                                   tok.line, tok.col)
            cargs = tuple(self.checked(a, scope, d.type, f"argument {d.name!r} of {callee.text}")
                          for a, d in zip(args, sub.inputs))
            for r, d in zip(results, sub.outputs):
                if r is not None and target_type(r) != d.type:
                    raise DslTypeError(f"result {r.text!r} has type {scope[r.text]}, expected {d.type}",
                                       r.line, r.col)
            instances.append(Instance(sub, cargs, tuple(r.text if r is not None else None for r in results)))
        contract = None
        if enforce is not None:
            cs = []
            for t, typ, default in ctls:
                d = FALSE if default is None else self.checked(default, scope, typ, f"default of {t.text!r}")
                cs.append(Controllable(t.text, typ, d))
            contract = Contract(self.checked(enforce, scope, BOOL, "enforce"), tuple(cs))
        node = Node(name.text,
                    inputs=tuple(Decl(t.text, typ) for t, typ, _ in inputs),
                    outputs=tuple(Decl(t.text, typ) for t, typ, _ in outputs),
                    locals=tuple(Decl(t.text, typ) for t, typ, _ in locals_),
                    equations=tuple(equations), memories=tuple(memories), automata=tuple(automata),
                    instances=tuple(instances), contract=contract)
        try:
            validate(node)
        except ValidationError as exc:
            raise DslError(str(exc), name.line, name.col) from None
        self.warn_unused(node, inputs, name)
        return node

    def warn_unused(self, node, inputs, name):
        flat = node.flat
        used = set()
        for eq in flat.equations:
            used |= free_vars(eq.expr)
        for m in flat.memories:
            used |= free_vars(m.next)
        for a in flat.automata:
            for m in a.modes:
                for _, e in m.equations:
                    used |= free_vars(e)
                for t in m.transitions:
                    used |= free_vars(t.guard)
                    for _, e in t.emits:
                        used |= free_vars(e)
        if flat.contract:
            used |= free_vars(flat.contract.enforce)
        for t, _, _ in inputs:
            if t.text not in used:
                self.unit.diagnostics.append(Diagnostic(t.line, t.col, f"input {t.text!r} of {name.text} is never read"))


def parse_program(text) -> SourceUnit:
    """Parse `text` into a SourceUnit; raise a positioned DslError on the first problem."""
    return _Parser(text).program()


def parse_node(text, name=None):
    unit = parse_program(text)
    return unit.node(name) if name else unit.main
