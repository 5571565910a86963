"""Surface syntax: tokens, AST, recursive-descent parser and printer.

The grammar is given in docs/grammar.md. Every AST node records its source
position ``(line, column)``; positions are ignored by equality so that
``parse(show(parse(text))) == parse(text)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from ..errors import SurfaceSyntaxError
from ..values import format_number

# -- AST --------------------------------------------------------------------------

_POS = dict(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TypeExpr:
    base: str            # Unit, Bool, Num, Str or a type parameter name
    events: bool = True
    pos: object = field(**_POS)


@dataclass(frozen=True)
class NumLit:
    value: Fraction
    pos: object = field(**_POS)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: object = field(**_POS)


@dataclass(frozen=True)
class StrLit:
    value: str
    pos: object = field(**_POS)


@dataclass(frozen=True)
class UnitLit:
    pos: object = field(**_POS)


@dataclass(frozen=True)
class Ident:
    name: str
    pos: object = field(**_POS)


@dataclass(frozen=True)
class OpRef:
    """An operator used as a function argument, as in ``lift(+)``."""
    op: str
    pos: object = field(**_POS)


@dataclass(frozen=True)
class Call:
    func: object
    args: tuple
    pos: object = field(**_POS)


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: object
    right: object
    pos: object = field(**_POS)


@dataclass(frozen=True)
class UnaryOp:
    op: str              # "!" or "-"
    operand: object
    pos: object = field(**_POS)


@dataclass(frozen=True)
class Block:
    defs: tuple
    result: object
    pos: object = field(**_POS)


@dataclass(frozen=True)
class Param:
    name: str
    type: Optional[TypeExpr] = None
    pos: object = field(**_POS)


@dataclass(frozen=True)
class Def:
    name: str
    type_params: tuple
    params: Optional[tuple]      # None: no parameter list at all
    annotation: Optional[TypeExpr]
    body: object
    pos: object = field(**_POS)

    @property
    def is_macro(self) -> bool:
        return self.params is not None or bool(self.type_params)


@dataclass(frozen=True)
class Input:
    name: str
    type: TypeExpr
    pos: object = field(**_POS)


@dataclass(frozen=True)
class Out:
    names: tuple
    pos: object = field(**_POS)


@dataclass(frozen=True)
class Program:
    items: tuple = ()

    @property
    def inputs(self):
        return [i for i in self.items if isinstance(i, Input)]

    @property
    def defs(self):
        return [i for i in self.items if isinstance(i, Def)]

    @property
    def outs(self):
        return [i for i in self.items if isinstance(i, Out)]


# -- lexer -----------------------------------------------------------------------

KEYWORDS = {"in", "def", "out", "true", "false"}
BASE_TYPES = ("Unit", "Bool", "Num", "Int", "Str")

# canonical spellings of infix operators
INFIX = {
    "+": "+", "-": "-", "−": "-", "*": "*", "×": "*", "/": "/", "÷": "/",
    "<": "<", "<=": "<=", "≤": "<=", ">": ">", ">=": ">=", "≥": ">=",
    "=": "==", "==": "==", "≠": "!=", "!=": "!=",
    "∧": "&&", "&&": "&&", "∨": "||", "||": "||",
}
NEGATION = {"!", "¬"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<sym>:=|<=|>=|==|!=|&&|\|\||[-+*/<>=!:,()\[\]{}]|[−×÷≤≥≠∧∨¬])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str       # number, ident, keyword, string, sym, eof
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise SurfaceSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "ident" and s in KEYWORDS:
                kind = "keyword"
            if kind not in ("ws", "comment"):
                tokens.append(Token(kind, s, line, col))
            col += len(s)
        i = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


_ESC = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def _unescape(s: str, tok: Token) -> str:
    out, i = [], 0
    while i < len(s):
        if s[i] == "\\":
            if s[i + 1] not in _ESC:
                raise SurfaceSyntaxError(f"unknown escape \\{s[i + 1]}", tok.line, tok.col)
            out.append(_ESC[s[i + 1]])
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


# -- parser ----------------------------------------------------------------------

_CMP = ("<", "<=", ">", ">=", "==", "!=")


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.open_brackets: List[Token] = []

    # helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("sym", "keyword") and t.text in texts

    def error(self, message, expected=()):
        t = self.tok
        if t.kind == "eof" and self.open_brackets:
            o = self.open_brackets[-1]
            raise SurfaceSyntaxError(f"unclosed {o.text!r}", o.line, o.col, expected)
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise SurfaceSyntaxError(f"{message}, found {found}", t.line, t.col, expected)

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}", [text])
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected a name", ["identifier"])
        return self.advance()

    def open(self, text):
        t = self.expect(text)
        self.open_brackets.append(t)
        return t

    def close(self, text):
        self.expect(text)
        self.open_brackets.pop()

    # items
    def program(self) -> Program:
        items = []
        while self.tok.kind != "eof":
            items.append(self.item())
        return Program(tuple(items))

    def item(self):
        t = self.tok
        if self.at("in"):
            self.advance()
            name = self.ident()
            self.expect(":")
            return Input(name.text, self.type_expr(), t.pos)
        if self.at("def"):
            return self.definition()
        if self.at("out"):
            self.advance()
            names = [self.ident().text]
            while self.at(","):
                self.advance()
                names.append(self.ident().text)
            return Out(tuple(names), t.pos)
        self.error("expected an item", ["in", "def", "out"])

    def definition(self) -> Def:
        start = self.expect("def")
        name = self.ident()
        type_params = ()
        if self.at("["):
            self.open("[")
            type_params = (self.ident().text,)
            self.close("]")
        params = None
        if self.at("("):
            self.open("(")
            params = []
            if not self.at(")"):
                params.append(self.param())
                while self.at(","):
                    self.advance()
                    params.append(self.param())
            self.close(")")
            params = tuple(params)
        annotation = None
        if self.at(":"):
            self.advance()
            annotation = self.type_expr()
        self.expect(":=")
        body = self.expr()
        return Def(name.text, type_params, params, annotation, body, start.pos)

    def param(self) -> Param:
        name = self.ident()
        ty = None
        if self.at(":"):
            self.advance()
            ty = self.type_expr()
        return Param(name.text, ty, name.pos)

    def type_expr(self) -> TypeExpr:
        t = self.ident()
        if t.text == "Events":
            self.open("[")
            base = self.ident()
            self.close("]")
            return TypeExpr(base.text, True, t.pos)
        return TypeExpr(t.text, False, t.pos)

    # expressions, lowest precedence first
    def expr(self):
        return self.or_expr()

    def _left_assoc(self, sub, ops):
        left = sub()
        while self.tok.kind == "sym" and INFIX.get(self.tok.text) in ops:
            op_tok = self.advance()
            right = sub()
            left = BinaryOp(INFIX[op_tok.text], left, right, op_tok.pos)
        return left

    def or_expr(self):
        return self._left_assoc(self.and_expr, ("||",))

    def and_expr(self):
        return self._left_assoc(self.cmp_expr, ("&&",))

    def cmp_expr(self):
        left = self.add_expr()
        if self.tok.kind == "sym" and INFIX.get(self.tok.text) in _CMP:
            op_tok = self.advance()
            right = self.add_expr()
            left = BinaryOp(INFIX[op_tok.text], left, right, op_tok.pos)
        return left

    def add_expr(self):
        return self._left_assoc(self.mul_expr, ("+", "-"))

    def mul_expr(self):
        return self._left_assoc(self.unary, ("*", "/"))

    def unary(self):
        t = self.tok
        if t.kind == "sym" and t.text in NEGATION:
            self.advance()
            return UnaryOp("!", self.unary(), t.pos)
        if t.kind == "sym" and t.text in ("-", "−"):
            self.advance()
            return UnaryOp("-", self.unary(), t.pos)
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while self.at("("):
            start = self.open("(")
            args = []
            if not self.at(")"):
                args.append(self.argument())
                while self.at(","):
                    self.advance()
                    args.append(self.argument())
            self.close(")")
            e = Call(e, tuple(args), start.pos)
        return e

    def argument(self):
        # a bare operator is allowed as an argument: lift(+)(x, y)
        t = self.tok
        if t.kind == "sym" and (t.text in INFIX or t.text in NEGATION):
            nxt = self.tokens[self.i + 1]
            if nxt.kind == "sym" and nxt.text in (")", ","):
                self.advance()
                return OpRef("!" if t.text in NEGATION else INFIX[t.text], t.pos)
        return self.expr()

    def primary(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return NumLit(Fraction(t.text), t.pos)
        if t.kind == "string":
            self.advance()
            return StrLit(_unescape(t.text[1:-1], t), t.pos)
        if self.at("true", "false"):
            self.advance()
            return BoolLit(t.text == "true", t.pos)
        if t.kind == "ident":
            self.advance()
            return Ident(t.text, t.pos)
        if self.at("("):
            self.open("(")
            if self.at(")"):
                self.close(")")
                return UnitLit(t.pos)
            e = self.expr()
            self.close(")")
            return e
        if self.at("{"):
            return self.block()
        self.error("expected an expression", ["identifier", "number", "string", "true", "false", "(", "{"])

    def block(self) -> Block:
        start = self.open("{")
        defs = []
        while self.at("def"):
            defs.append(self.definition())
        result = self.expr()
        self.close("}")
        return Block(tuple(defs), result, start.pos)


def parse(text: str) -> Program:
    """Parse surface text into a :class:`Program`."""
    return Parser(text).program()


# -- printer ---------------------------------------------------------------------

def show_type(t: TypeExpr) -> str:
    return f"Events[{t.base}]" if t.events else t.base


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def show_expr(e) -> str:
    if isinstance(e, NumLit):
        return format_number(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, StrLit):
        return _quote(e.value)
    if isinstance(e, UnitLit):
        return "()"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, OpRef):
        return e.op
    if isinstance(e, Call):
        return f"{show_expr(e.func)}({', '.join(show_expr(a) for a in e.args)})"
    if isinstance(e, BinaryOp):
        return f"({show_expr(e.left)} {e.op} {show_expr(e.right)})"
    if isinstance(e, UnaryOp):
        return f"({e.op}{show_expr(e.operand)})"
    if isinstance(e, Block):
        inner = " ".join(show_def(d) for d in e.defs)
        return "{ " + (inner + " " if inner else "") + show_expr(e.result) + " }"
    raise TypeError(e)


def show_def(d: Def) -> str:
    head = f"def {d.name}"
    if d.type_params:
        head += f"[{d.type_params[0]}]"
    if d.params is not None:
        ps = ", ".join(p.name + (f": {show_type(p.type)}" if p.type else "") for p in d.params)
        head += f"({ps})"
    if d.annotation:
        head += f": {show_type(d.annotation)}"
    return f"{head} := {show_expr(d.body)}"


def show(program: Program) -> str:
    lines = []
    for item in program.items:
        if isinstance(item, Input):
            lines.append(f"in {item.name}: {show_type(item.type)}")
        elif isinstance(item, Def):
            lines.append(show_def(item))
        else:
            lines.append("out " + ", ".join(item.names))
    return "\n".join(lines) + ("\n" if lines else "")
