"""Surface language: typed lambda terms that build circuits.

Defines the type / term / value ASTs, a lexer and recursive-descent parser
for `.pqr` sources, and a printer whose output parses back to the same AST.

The concrete syntax, in brief::

    -- comments run to end of line
    qft :: n -> List[j<n] Qubit -o List[j<n] Qubit     -- optional ascription
    let qft = @n. \\reg :: List[j<n] Qubit . ...        -- index + value lambdas
    let (q, a) = force cnot q a in ...                  -- pair destructuring
    fold(step, [], reg)                                 -- lists: [] and xs:x
    apply(c, w)   box[Qubit] v   lift M   force v   return v
    f @3          -- index application

Application of a non-value is desugared into `let` bindings with fresh
names, so the checker and evaluator only ever see values in operand
position.  A bare value in term position parses as an implicit `return`.

Statements may be separated by optional `;`.  Application chains do not
stop at line breaks, so the printer emits one between the last binding
and a main expression; a top-level `let ... in` (or a destructuring let)
is parsed as the main expression rather than a binding.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .circuits import Bundle, Circuit, WireType
from .indices import (
    BoundedMax,
    BoundedPar,
    BoundedSum,
    Empty,
    IndexTerm,
    Max,
    Minus,
    NatLit,
    Par,
    Plus,
    Times,
    Var,
    WireOp,
    pretty_index,
)

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TUnit:
    pass


@dataclass(frozen=True)
class TWire:
    wire: WireType
    ann: Optional[IndexTerm] = None


@dataclass(frozen=True)
class TBang:
    effect: IndexTerm
    inner: "Type"


@dataclass(frozen=True)
class TTensor:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TArrow:
    dom: "Type"
    cod: "Type"
    effect: IndexTerm
    capture: "Type"  # bundle-shaped; rendered as its size


@dataclass(frozen=True)
class TList:
    binder: str
    length: IndexTerm
    elem: "Type"


@dataclass(frozen=True)
class TCirc:
    size: IndexTerm
    local_vars: tuple
    in_t: "Type"
    out_t: "Type"


@dataclass(frozen=True)
class TIndexAll:
    binder: str
    effect: IndexTerm
    body: "Type"


Type = Union[TUnit, TWire, TBang, TTensor, TArrow, TList, TCirc, TIndexAll]


def is_bundle_type(t: Type) -> bool:
    """Wire bundles: the unit/wire/tensor/list sublanguage."""
    if isinstance(t, TUnit):
        return True
    if isinstance(t, TWire):
        return True
    if isinstance(t, TTensor):
        return is_bundle_type(t.left) and is_bundle_type(t.right)
    if isinstance(t, TList):
        return is_bundle_type(t.elem)
    return False


def bundle_size(t: Type) -> IndexTerm:
    """The size index of a bundle type (unit is literally zero)."""
    if isinstance(t, TUnit):
        return NatLit(0)
    if isinstance(t, TWire):
        return WireOp(t.wire)
    if isinstance(t, TTensor):
        return Par(bundle_size(t.left), bundle_size(t.right))
    if isinstance(t, TList):
        return BoundedPar(t.binder, t.length, bundle_size(t.elem))
    raise ValueError(f"not a bundle type: {t!r}")


# ---------------------------------------------------------------------------
# Terms and values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VUnit:
    pass


@dataclass(frozen=True)
class VVar:
    name: str


@dataclass(frozen=True)
class VLabel:
    label: str
    wire: WireType


@dataclass(frozen=True)
class VAbs:
    var: str
    ann: Type
    body: "Term"


@dataclass(frozen=True)
class VLift:
    body: "Term"


@dataclass(frozen=True)
class VBoxed:
    in_bundle: Bundle
    circuit: Circuit
    out_bundle: Bundle


@dataclass(frozen=True)
class VPair:
    left: "Value"
    right: "Value"


@dataclass(frozen=True)
class VNil:
    pass


@dataclass(frozen=True)
class VRCons:
    init: "Value"
    last: "Value"


@dataclass(frozen=True)
class VIndexAbs:
    binder: str
    body: "Term"


Value = Union[VUnit, VVar, VLabel, VAbs, VLift, VBoxed, VPair, VNil, VRCons, VIndexAbs]


@dataclass(frozen=True)
class App:
    fn: Value
    arg: Value


@dataclass(frozen=True)
class Dest:
    left: str
    right: str
    pair: Value
    body: "Term"


@dataclass(frozen=True)
class Force:
    value: Value


@dataclass(frozen=True)
class ApplyCirc:
    circ: Value
    arg: Value


@dataclass(frozen=True)
class BoxT:
    ann: Type
    value: Value


@dataclass(frozen=True)
class Return:
    value: Value


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Fold:
    step: Value
    acc: Value
    lst: Value


@dataclass(frozen=True)
class IndexApp:
    value: Value
    index: IndexTerm


Term = Union[App, Dest, Force, ApplyCirc, BoxT, Return, Let, Fold, IndexApp]


@dataclass(frozen=True)
class Binding:
    name: str
    body: Term
    ascription: Optional[Type] = None
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    bindings: tuple
    main: Optional[Term] = None


def is_value_term(m: Term) -> Optional[Value]:
    """The value inside an implicit/explicit return, if the term is one."""
    return m.value if isinstance(m, Return) else None


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------


class SurfaceSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        extra = f" (expected one of: {', '.join(self.expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{extra}")


_KEYWORDS = {
    "let", "in", "lift", "force", "box", "apply", "return", "fold",
    "sum", "max", "List", "Circ", "Qubit", "Bit",
}

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>--[^\n]*)
    | (?P<lolli>-o)
    | (?P<arrow>->)
    | (?P<dcolon>::)
    | (?P<nat>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    | (?P<sym>[()\[\]{}.,:;=@*+\-<!\\])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'nat' | 'ident' | keyword text | symbol text | 'eof'
    text: str
    line: int
    col: int


def _lex(source: str) -> list:
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise SurfaceSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        kind = m.lastgroup
        if kind == "ws" or kind == "comment":
            pass
        elif kind == "nat":
            toks.append(_Tok("nat", text, line, col))
        elif kind == "ident":
            k = text if text in _KEYWORDS else "ident"
            toks.append(_Tok(k, text, line, col))
        else:  # lolli/arrow/dcolon/sym carry their own spelling
            toks.append(_Tok(text, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.toks = _lex(source)
        self.pos = 0
        # Fresh names must not collide with identifiers already in the
        # source (its own previous desugarings included), or ANF lets
        # could capture them.
        self.fresh_n = 0
        for t in self.toks:
            if t.kind == "ident":
                m = re.fullmatch(r"_a(\d+)", t.text)
                if m:
                    self.fresh_n = max(self.fresh_n, int(m.group(1)) + 1)

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Tok:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def advance(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            raise SurfaceSyntaxError(
                f"unexpected {t.text or 'end of input'!r}", t.line, t.col, (kind,)
            )
        return self.advance()

    def fail(self, message: str, expected=()):
        t = self.peek()
        raise SurfaceSyntaxError(message, t.line, t.col, expected)

    def fresh(self) -> str:
        name = f"_a{self.fresh_n}"
        self.fresh_n += 1
        return name

    # -- programs ----------------------------------------------------------

    def program(self) -> Program:
        bindings = []
        ascriptions = {}
        main = None
        while not self.at("eof"):
            if self.at(";"):
                # optional statement separator; required by the printer to
                # stop a main expression from extending the previous
                # binding's application chain
                self.advance()
            elif self.at("let") and self.peek(1).kind == "(":
                # bindings bind plain names, so a destructuring let can only
                # open the main expression
                main = self.term()
                if not self.at("eof"):
                    self.fail("trailing input after main expression", ("eof",))
            elif self.at("let"):
                ln = self.peek().line
                self.advance()
                name = self.expect("ident").text
                self.expect("=")
                body = self.term()
                if self.at("in"):
                    # a binding body consumes every `in` it opens, so a
                    # trailing one means this let is the main expression
                    self.advance()
                    main = Let(name, body, self.term())
                    if not self.at("eof"):
                        self.fail(
                            "trailing input after main expression", ("eof",)
                        )
                else:
                    bindings.append(
                        Binding(name, body, ascriptions.pop(name, None), line=ln)
                    )
            elif self.at("ident") and self.peek(1).kind == "::":
                name = self.advance().text
                self.advance()
                ascriptions[name] = self.type_()
            else:
                main = self.term()
                if not self.at("eof"):
                    self.fail("trailing input after main expression", ("eof",))
        if ascriptions:
            name = next(iter(ascriptions))
            self.fail(f"ascription for {name!r} has no matching let binding")
        return Program(tuple(bindings), main)

    # -- terms ---------------------------------------------------------------

    def term(self) -> Term:
        if self.at("let"):
            return self._let()
        if self.at("return"):
            self.advance()
            return Return(self.value())
        if self.at("force"):
            self.advance()
            v, pend = self._operand()
            if self._starts_operand():
                # `force f x y` applies the forced value straight away
                vv, pend = self._anf(pend, Force(v))
                return self._chain_from(vv, pend, applied=True)
            return self._wrap(pend, Force(v))
        if self.at("apply"):
            self.advance()
            self.expect("(")
            c, pend1 = self._operand()
            self.expect(",")
            w, pend2 = self._operand()
            self.expect(")")
            return self._wrap(pend1 + pend2, ApplyCirc(c, w))
        if self.at("box"):
            self.advance()
            self.expect("[")
            ann = self.type_()
            self.expect("]")
            v, pend = self._operand()
            return self._wrap(pend, BoxT(ann, v))
        if self.at("fold"):
            self.advance()
            self.expect("(")
            s, p1 = self._operand()
            self.expect(",")
            a, p2 = self._operand()
            self.expect(",")
            l, p3 = self._operand()
            self.expect(")")
            return self._wrap(p1 + p2 + p3, Fold(s, a, l))
        return self._chain()

    def _let(self) -> Term:
        self.advance()
        if self.at("("):
            self.advance()
            x = self.expect("ident").text
            self.expect(",")
            y = self.expect("ident").text
            self.expect(")")
            self.expect("=")
            bound = self.term()
            self.expect("in")
            body = self.term()
            v = is_value_term(bound)
            if v is not None:
                return Dest(x, y, v, body)
            t = self.fresh()
            return Let(t, bound, Dest(x, y, VVar(t), body))
        x = self.expect("ident").text
        self.expect("=")
        bound = self.term()
        self.expect("in")
        body = self.term()
        return Let(x, bound, body)

    def _chain(self) -> Term:
        """An application spine: operands and `@ I` suffixes, left-assoc."""
        v, pending = self._operand()
        return self._chain_from(v, pending, applied=False)

    def _chain_from(self, v: Value, pending, applied: bool) -> Term:
        while True:
            if self.at("@") and not self._at_index_abs():
                self.advance()
                idx = self.index_atom()
                v, pending = self._anf(pending, IndexApp(v, idx))
                applied = True
            elif self._starts_operand():
                arg, p2 = self._operand()
                v, pending = self._anf(pending + p2, App(v, arg))
                applied = True
            else:
                break
        if applied or (
            len(pending) == 1 and v == VVar(pending[-1][0])
        ):
            # the last computation needn't be named; unwrap it back to a term
            last = pending[-1][1]
            return self._wrap(pending[:-1], last)
        return self._wrap(pending, Return(v))

    def _at_index_abs(self) -> bool:
        return (
            self.at("@")
            and self.peek(1).kind == "ident"
            and self.peek(2).kind == "."
        )

    def _starts_operand(self) -> bool:
        if self.at("ident") and self.peek(1).kind == "::":
            # a top-level ascription line, never an application argument
            return False
        return self.at("ident", "(", "[", "\\", "lift") or self._at_index_abs()

    def _operand(self):
        """Parse a value, ANF-lifting any embedded terms.

        Returns (value, pending) where pending is a list of (name, term)
        lets that must wrap whatever consumes the value.
        """
        if self.at("\\", "lift") or (
            self.at("@") and self.peek(1).kind == "ident" and self.peek(2).kind == "."
        ):
            return self.value(), []
        v, pending = self._rcons_operand()
        return v, pending

    def _rcons_operand(self):
        v, pending = self._atom_operand()
        while self.at(":"):
            self.advance()
            w, p2 = self._atom_operand()
            v, pending = VRCons(v, w), pending + p2
        return v, pending

    def _atom_operand(self):
        v, pending = self._atom_base()
        while self.at("@") and not self._at_index_abs():
            # `f @ I` in operand position, e.g. fold(rotate @m, ..., ...)
            self.advance()
            idx = self.index_atom()
            v, pending = self._anf(pending, IndexApp(v, idx))
        return v, pending

    def _atom_base(self):
        t = self.peek()
        if t.kind == "ident":
            self.advance()
            return VVar(t.text), []
        if t.kind == "[":
            self.advance()
            self.expect("]")
            return VNil(), []
        if t.kind == "(":
            self.advance()
            if self.at(")"):
                self.advance()
                return VUnit(), []
            inner = self.term()
            if self.at(","):
                self.advance()
                left, p1 = self._term_to_value(inner)
                right_t = self.term()
                right, p2 = self._term_to_value(right_t)
                self.expect(")")
                return VPair(left, right), p1 + p2
            self.expect(")")
            return self._term_to_value(inner)
        self.fail("expected a value", ("ident", "(", "[", "\\", "lift", "@"))

    def _term_to_value(self, m: Term):
        v = is_value_term(m)
        if v is not None:
            return v, []
        name = self.fresh()
        return VVar(name), [(name, m)]

    def _anf(self, pending, m: Term):
        name = self.fresh()
        return VVar(name), pending + [(name, m)]

    @staticmethod
    def _wrap(pending, m: Term) -> Term:
        for name, bound in reversed(pending):
            m = Let(name, bound, m)
        return m

    # -- values --------------------------------------------------------------

    def value(self) -> Value:
        if self.at("\\"):
            self.advance()
            return self._lambda_args()
        if self.at("@"):
            self.advance()
            binder = self.expect("ident").text
            self.expect(".")
            return VIndexAbs(binder, self.term())
        if self.at("lift"):
            self.advance()
            return VLift(self.term())
        v, pending = self._rcons_operand()
        if pending:
            name = pending[0][0]
            self.fail(f"expected a value, found a computation (bound as {name})")
        return v

    def _lambda_args(self) -> Value:
        """One or more lambda parameters, then `.` and the body."""
        params = []  # (var, type, pattern or None)
        while True:
            if self.at("ident"):
                x = self.advance().text
                self.expect("::")
                ann = self.type_()
                params.append((x, ann, None))
                self.expect(".")
                break
            self.expect("(")
            x = self.expect("ident").text
            if self.at(","):
                self.advance()
                y = self.expect("ident").text
                self.expect(")")
                self.expect("::")
                ann = self.type_()
                params.append((self.fresh(), ann, (x, y)))
            else:
                self.expect("::")
                ann = self.type_()
                self.expect(")")
                params.append((x, ann, None))
            if self.at("."):
                self.advance()
                break
        body = self.term()
        for x, ann, pat in reversed(params):
            if pat is not None:
                body = Dest(pat[0], pat[1], VVar(x), body)
            body = Return(VAbs(x, ann, body))
        assert isinstance(body, Return)
        return body.value

    # -- types ---------------------------------------------------------------

    def type_(self) -> Type:
        if self.at("ident") and self.peek(1).kind == "->":
            binder = self.advance().text
            self.advance()
            effect = Empty()
            if self.at("["):
                self.advance()
                effect = self.index()
                if self.at(","):
                    self.advance()
                    t = self.peek()
                    cap = self.index()
                    if cap != NatLit(0):
                        raise SurfaceSyntaxError(
                            "index abstractions capture no wires; size must be 0",
                            t.line, t.col,
                        )
                self.expect("]")
            return TIndexAll(binder, effect, self.type_())
        left = self._tensor_type()
        if self.at("-o"):
            self.advance()
            effect: IndexTerm = Empty()
            capture: Type = TUnit()
            if self.at("["):
                self.advance()
                effect = self.index()
                if self.at(","):
                    self.advance()
                    t = self.peek()
                    cap = self.index()
                    if cap != NatLit(0):
                        raise SurfaceSyntaxError(
                            "only capture-free arrows can be written in source",
                            t.line, t.col,
                        )
                self.expect("]")
            return TArrow(left, self.type_(), effect, capture)
        return left

    def _tensor_type(self) -> Type:
        left = self._atom_type()
        if self.at("*"):
            self.advance()
            return TTensor(left, self._tensor_type())
        return left

    def _atom_type(self) -> Type:
        t = self.peek()
        if t.kind == "Qubit" or t.kind == "Bit":
            self.advance()
            wire = WireType.QUBIT if t.kind == "Qubit" else WireType.BIT
            ann = None
            if self.at("{"):
                self.advance()
                ann = self.index()
                self.expect("}")
            return TWire(wire, ann)
        if t.kind == "(":
            self.advance()
            if self.at(")"):
                self.advance()
                return TUnit()
            inner = self.type_()
            self.expect(")")
            return inner
        if t.kind == "!":
            self.advance()
            effect: IndexTerm = Empty()
            if self.at("["):
                self.advance()
                effect = self.index()
                self.expect("]")
            return TBang(effect, self._atom_type())
        if t.kind == "List":
            self.advance()
            self.expect("[")
            binder = self.expect("ident").text
            self.expect("<")
            length = self.index()
            self.expect("]")
            return TList(binder, length, self._atom_type())
        if t.kind == "Circ":
            self.advance()
            self.expect("[")
            size = self.index()
            self.expect("]")
            self.expect("(")
            in_t = self.type_()
            self.expect(",")
            out_t = self.type_()
            self.expect(")")
            return TCirc(size, (), in_t, out_t)
        self.fail("expected a type", ("Qubit", "Bit", "(", "!", "List", "Circ"))

    # -- index terms -----------------------------------------------------------

    def index(self) -> IndexTerm:
        left = self._index_prod()
        while self.at("+", "-"):
            op = self.advance().kind
            right = self._index_prod()
            left = Plus(left, right) if op == "+" else Minus(left, right)
        return left

    def _index_prod(self) -> IndexTerm:
        left = self.index_atom()
        while self.at("*"):
            self.advance()
            left = Times(left, self.index_atom())
        return left

    def index_atom(self) -> IndexTerm:
        t = self.peek()
        if t.kind == "nat":
            self.advance()
            return NatLit(int(t.text))
        if t.kind == "ident":
            self.advance()
            return Var(t.text)
        if t.kind == "max":
            self.advance()
            if self.at("["):
                return self._bounded(BoundedMax)
            self.expect("(")
            a = self.index()
            self.expect(",")
            b = self.index()
            self.expect(")")
            return Max(a, b)
        if t.kind == "sum":
            self.advance()
            return self._bounded(BoundedSum)
        if t.kind == "(":
            self.advance()
            inner = self.index()
            self.expect(")")
            return inner
        self.fail("expected an index term", ("nat", "ident", "max", "sum", "("))

    def _bounded(self, ctor) -> IndexTerm:
        self.expect("[")
        binder = self.expect("ident").text
        self.expect("<")
        bound = self.index()
        self.expect("]")
        return ctor(binder, bound, self.index())


def parse(source: str) -> Program:
    return _Parser(source).program()


def parse_term(source: str) -> Term:
    p = _Parser(source)
    m = p.term()
    p.expect("eof")
    return m


def parse_type(source: str) -> Type:
    p = _Parser(source)
    t = p.type_()
    p.expect("eof")
    return t


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_T_ARROW, _T_TENSOR, _T_ATOM = 0, 1, 2


def _pt(t: Type, prec: int, profile) -> str:
    if isinstance(t, TUnit):
        return "()"
    if isinstance(t, TWire):
        base = t.wire.value
        return f"{base}{{{_index_str(t.ann, profile)}}}" if t.ann is not None else base
    if isinstance(t, TBang):
        if isinstance(t.effect, Empty):
            s = f"!{_pt(t.inner, _T_ATOM, profile)}"
        else:
            s = f"![{_index_str(t.effect, profile)}] {_pt(t.inner, _T_ATOM, profile)}"
        return s
    if isinstance(t, TTensor):
        s = f"{_pt(t.left, _T_ATOM, profile)} * {_pt(t.right, _T_TENSOR, profile)}"
        return f"({s})" if prec > _T_TENSOR else s
    if isinstance(t, TList):
        s = f"List[{t.binder}<{_index_str(t.length, profile)}] {_pt(t.elem, _T_ATOM, profile)}"
        return s
    if isinstance(t, TCirc):
        return (
            f"Circ[{_index_str(t.size, profile)}]"
            f"({_pt(t.in_t, _T_ARROW, profile)}, {_pt(t.out_t, _T_ARROW, profile)})"
        )
    if isinstance(t, TArrow):
        bare = isinstance(t.effect, Empty) and isinstance(t.capture, TUnit)
        if bare and profile is None:
            ann = ""
        else:
            # under a profile every arrow is annotated, so zero cost reads [0,0]
            cap = NatLit(0) if isinstance(t.capture, TUnit) else bundle_size(t.capture)
            ann = f"[{_index_str(t.effect, profile)},{_index_str(cap, profile)}]"
        s = f"{_pt(t.dom, _T_TENSOR, profile)} -o{ann} {_pt(t.cod, _T_ARROW, profile)}"
        return f"({s})" if prec > _T_ARROW else s
    if isinstance(t, TIndexAll):
        if isinstance(t.effect, Empty) and profile is None:
            ann = ""
        else:
            ann = f"[{_index_str(t.effect, profile)},0]"
        s = f"{t.binder} ->{ann} {_pt(t.body, _T_ARROW, profile)}"
        return f"({s})" if prec > _T_ARROW else s
    raise TypeError(f"not a type: {t!r}")


def _index_str(i: IndexTerm, profile) -> str:
    if profile is not None:
        from .indices import simplify

        i = simplify(i, profile)
    return pretty_index(i)


# Printing contexts, loosest to tightest.  Abstractions and lift have
# bodies that extend as far right as the parser will take them, so they
# only print bare in _V_OPEN positions (comma- or delimiter-bounded);
# rcons is left-associative and additionally survives as an rcons init.
_V_OPEN, _V_RCONS, _V_ATOM = 0, 1, 2


def _pv(v: Value, prec: int) -> str:
    if isinstance(v, VUnit):
        return "()"
    if isinstance(v, VVar):
        return v.name
    if isinstance(v, VLabel):
        return f"#{v.label}"
    if isinstance(v, VNil):
        return "[]"
    if isinstance(v, VPair):
        return f"({_pv(v.left, _V_OPEN)}, {_pv(v.right, _V_OPEN)})"
    if isinstance(v, VRCons):
        s = f"{_pv(v.init, _V_RCONS)}:{_pv(v.last, _V_ATOM)}"
        return f"({s})" if prec > _V_RCONS else s
    if isinstance(v, VAbs):
        s = f"\\{v.var} :: {_pt(v.ann, _T_ARROW, None)}. {_pm(v.body)}"
        return f"({s})" if prec > _V_OPEN else s
    if isinstance(v, VLift):
        s = f"lift {_pm(v.body)}"
        return f"({s})" if prec > _V_OPEN else s
    if isinstance(v, VIndexAbs):
        s = f"@{v.binder}. {_pm(v.body)}"
        return f"({s})" if prec > _V_OPEN else s
    if isinstance(v, VBoxed):
        return f"<boxed:{len(v.circuit.gates)} gates>"
    raise TypeError(f"not a value: {v!r}")


def _idx_atom_str(i: IndexTerm) -> str:
    s = pretty_index(i)
    return s if isinstance(i, (NatLit, Var)) else f"({s})"


def _pm(m: Term) -> str:
    if isinstance(m, Return):
        return f"return {_pv(m.value, _V_OPEN)}"
    if isinstance(m, App):
        return f"{_pv(m.fn, _V_ATOM)} {_pv(m.arg, _V_ATOM)}"
    if isinstance(m, IndexApp):
        return f"{_pv(m.value, _V_ATOM)} @{_idx_atom_str(m.index)}"
    if isinstance(m, Force):
        return f"force {_pv(m.value, _V_ATOM)}"
    if isinstance(m, ApplyCirc):
        return f"apply({_pv(m.circ, _V_OPEN)}, {_pv(m.arg, _V_OPEN)})"
    if isinstance(m, BoxT):
        return f"box[{_pt(m.ann, _T_ARROW, None)}] {_pv(m.value, _V_ATOM)}"
    if isinstance(m, Fold):
        return (
            f"fold({_pv(m.step, _V_OPEN)}, {_pv(m.acc, _V_OPEN)}, "
            f"{_pv(m.lst, _V_OPEN)})"
        )
    if isinstance(m, Let):
        return f"let {m.var} = {_pm(m.bound)} in {_pm(m.body)}"
    if isinstance(m, Dest):
        return f"let ({m.left}, {m.right}) = {_pv(m.pair, _V_OPEN)} in {_pm(m.body)}"
    raise TypeError(f"not a term: {m!r}")


def pretty(x, profile=None) -> str:
    """Render a program, type, term, value, or index term as source text.

    With a profile, type annotations are simplified under it before printing
    (arrow captures render as their size).  `parse(pretty(p))` returns an AST
    structurally equal to `p`.
    """
    if isinstance(x, Program):
        parts = []
        for b in x.bindings:
            if b.ascription is not None:
                # ascriptions are the user's own text; never resimplify them
                parts.append(f"{b.name} :: {_pt(b.ascription, _T_ARROW, None)}")
            parts.append(f"let {b.name} = {_pm(b.body)}")
        if x.main is not None:
            if parts:
                # a main expression could otherwise continue the previous
                # binding's application chain across the line break
                parts[-1] += ";"
            parts.append(_pm(x.main))
        return "\n".join(parts) + "\n"
    if isinstance(
        x, (TUnit, TWire, TBang, TTensor, TArrow, TList, TCirc, TIndexAll)
    ):
        return _pt(x, _T_ARROW, profile)
    if isinstance(x, (VUnit, VVar, VLabel, VAbs, VLift, VBoxed, VPair, VNil,
                      VRCons, VIndexAbs)):
        return _pv(x, _V_OPEN)
    if isinstance(x, (App, Dest, Force, ApplyCirc, BoxT, Return, Let, Fold,
                      IndexApp)):
        return _pm(x)
    return pretty_index(x)
