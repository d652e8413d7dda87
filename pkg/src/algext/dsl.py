"""Text format for theory presentations.

::

    // nilpotent endomorphism
    theory N2 {
      sort V;
      op x : V -> V;
      eq x(x(a)) = 0;
    }

Identifiers that are not declared operations are variables.  The context of
an equation lists its variables in order of first occurrence; each variable's
sort is inferred from the argument slots it fills (or, for a bare variable
summand, from the sort of the equation).  When nothing else fixes it, the
sort of an equation is given by a trailing annotation::

    eq a = 2 a : W;
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .theory import (
    Apply,
    Equation,
    LinearTermCombination,
    OperationSymbol,
    SortError,
    TheoryError,
    TheoryPresentation,
    Var,
)


class ParseError(TheoryError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = {"theory", "sort", "op", "eq"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<arrow>->)
  | (?P<punct>[{}();:,=+\-*])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            text = m.group()
            if kind == "ident" and text in KEYWORDS:
                kind = text
            elif kind in ("punct", "arrow"):
                kind = text
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# raw syntax of terms before variables are resolved
@dataclass
class _RawVar:
    name: str
    tok: Token


@dataclass
class _RawApp:
    op: str
    args: list
    tok: Token


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.sorts: list[str] = []
        self.ops: dict[str, OperationSymbol] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, kind: str) -> Token:
        tok = self.tok
        if tok.kind != kind:
            found = tok.text or "end of input"
            self.error(f"expected {kind!r}, found {found!r}")
        self.i += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            self.i += 1
            return self.toks[self.i - 1]
        return None

    def parse(self) -> TheoryPresentation:
        self.expect("theory")
        name = self.expect("ident").text
        self.expect("{")
        equations = []
        while not self.accept("}"):
            if self.accept("sort"):
                tok = self.expect("ident")
                if tok.text in self.sorts:
                    self.error(f"duplicate sort {tok.text}", tok)
                if tok.text in self.ops:
                    self.error(f"sort {tok.text} clashes with an operation", tok)
                self.sorts.append(tok.text)
                self.expect(";")
            elif self.accept("op"):
                self.op_decl()
            elif self.tok.kind == "eq":
                equations.append(self.equation())
            else:
                self.error(f"expected 'sort', 'op', 'eq' or '}}', found {self.tok.text or 'end of input'!r}")
        self.expect("eof")
        if not self.sorts:
            raise ParseError("a theory needs at least one sort", self.toks[0].line, self.toks[0].col)
        return TheoryPresentation(name, tuple(self.sorts), tuple(self.ops.values()), tuple(equations))

    def sort_ref(self) -> str:
        tok = self.expect("ident")
        if tok.text not in self.sorts:
            self.error(f"unknown sort {tok.text}", tok)
        return tok.text

    def op_decl(self):
        tok = self.expect("ident")
        if tok.text in self.ops:
            self.error(f"duplicate operation {tok.text}", tok)
        if tok.text in self.sorts:
            self.error(f"operation {tok.text} clashes with a sort", tok)
        self.expect(":")
        domain = []
        if self.tok.kind != "->":
            domain.append(self.sort_ref())
            while self.accept(","):
                domain.append(self.sort_ref())
        self.expect("->")
        codomain = self.sort_ref()
        self.expect(";")
        self.ops[tok.text] = OperationSymbol(tok.text, tuple(domain), codomain)

    # equations

    def equation(self) -> Equation:
        eq_tok = self.expect("eq")
        lhs = self.lincomb()
        self.expect("=")
        rhs = self.lincomb()
        declared = self.sort_ref() if self.accept(":") else None
        self.expect(";")
        return self.resolve(eq_tok, lhs, rhs, declared)

    def lincomb(self) -> list:
        if self.tok.kind == "int" and self.tok.text == "0" and self.toks[self.i + 1].kind in ("=", ";", ":"):
            self.i += 1
            return []
        summands = [self.summand(sign=-1 if self.accept("-") else 1)]
        while self.tok.kind in ("+", "-"):
            sign = 1 if self.expect(self.tok.kind).kind == "+" else -1
            summands.append(self.summand(sign))
        return summands

    def summand(self, sign: int):
        coeff = 1
        if self.tok.kind == "int":
            coeff = int(self.expect("int").text)
            self.accept("*")
        return sign * coeff, self.term()

    def term(self):
        tok = self.expect("ident")
        if self.accept("("):
            if tok.text not in self.ops:
                self.error(f"unknown operation {tok.text}", tok)
            args = [self.term()]
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            op = self.ops[tok.text]
            if len(args) != op.arity:
                self.error(f"operation {op.name} expects {op.arity} arguments, got {len(args)}", tok)
            return _RawApp(tok.text, args, tok)
        if tok.text in self.ops:
            op = self.ops[tok.text]
            if op.arity:
                self.error(f"operation {op.name} expects {op.arity} arguments, got 0", tok)
            return _RawApp(tok.text, [], tok)
        return _RawVar(tok.text, tok)

    def resolve(self, eq_tok: Token, lhs: list, rhs: list, declared: str | None = None) -> Equation:
        names: list[str] = []
        var_sorts: dict[str, str] = {}

        def collect(raw, expected: str | None):
            if isinstance(raw, _RawVar):
                if raw.name not in names:
                    names.append(raw.name)
                if expected is not None:
                    prev = var_sorts.setdefault(raw.name, expected)
                    if prev != expected:
                        self.error(f"sort mismatch: variable {raw.name} used at sorts {prev} and {expected}", raw.tok)
                return
            op = self.ops[raw.op]
            for arg, want in zip(raw.args, op.domain):
                collect(arg, want)

        def top_sort(raw) -> str | None:
            return self.ops[raw.op].codomain if isinstance(raw, _RawApp) else var_sorts.get(raw.name)

        summands = lhs + rhs
        for _, raw in summands:
            collect(raw, None)
        # sort of the equation: from applications or already-typed variables
        eq_sort = declared
        for _, raw in summands:
            s = top_sort(raw)
            if s is None:
                continue
            if eq_sort is None:
                eq_sort = s
            elif s != eq_sort:
                self.error(f"sort mismatch: equation mixes sorts {eq_sort} and {s}", raw.tok)
        if eq_sort is None:
            if len(self.sorts) == 1:
                eq_sort = self.sorts[0]
            elif summands:
                self.error("cannot infer the sort of this equation", eq_tok)
            else:
                eq_sort = self.sorts[0]
        for _, raw in summands:
            if isinstance(raw, _RawVar):
                collect(raw, eq_sort)
        for n in names:
            if n not in var_sorts:
                self.error(f"cannot infer the sort of variable {n}", eq_tok)
        context = tuple(var_sorts[n] for n in names)
        index = {n: i for i, n in enumerate(names)}

        def build(raw):
            if isinstance(raw, _RawVar):
                return Var(index[raw.name])
            return Apply(raw.op, tuple(build(a) for a in raw.args))

        def comb(side):
            return LinearTermCombination(context, eq_sort, tuple((build(r), c) for c, r in side))

        try:
            return Equation(comb(lhs), comb(rhs))
        except SortError as exc:
            self.error(str(exc), eq_tok)


def parse_theory(source: str) -> TheoryPresentation:
    """Parse a theory presentation; raises :class:`ParseError` with a line:column location."""
    return _Parser(source).parse()


def _var_names(count: int, avoid: set[str]) -> list[str]:
    names = []
    i = 0
    while len(names) < count:
        cand = chr(ord("a") + i) if i < 26 else f"v{i}"
        if cand not in avoid and cand not in KEYWORDS:
            names.append(cand)
        i += 1
    return names


def format_term(t, names: list[str], theory: TheoryPresentation | None = None) -> str:
    if isinstance(t, Var):
        return names[t.index]
    if not t.args:
        return t.op
    return f"{t.op}({', '.join(format_term(a, names) for a in t.args)})"


def format_combination(comb: LinearTermCombination, names: list[str]) -> str:
    if comb.is_zero():
        return "0"
    parts = []
    for k, (t, c) in enumerate(comb.summands):
        body = format_term(t, names)
        mag = abs(c)
        piece = body if mag == 1 else f"{mag} {body}"
        if k == 0:
            parts.append(piece if c > 0 else f"-{piece}")
        else:
            parts.append(f"{'+' if c > 0 else '-'} {piece}")
    return " ".join(parts)


def _needs_sort_annotation(eq: Equation, theory: TheoryPresentation) -> bool:
    if any(isinstance(t, Apply) for comb in (eq.lhs, eq.rhs) for t, _ in comb.summands):
        return False
    return len(theory.sorts) > 1


def print_theory(theory: TheoryPresentation) -> str:
    avoid = set(theory.sorts) | {op.name for op in theory.ops}
    lines = [f"theory {theory.name} {{"]
    for s in theory.sorts:
        lines.append(f"  sort {s};")
    for op in theory.ops:
        lines.append(f"  op {op.name} : {', '.join(op.domain)}{' ' if op.domain else ''}-> {op.codomain};")
    for eq in theory.equations:
        names = _var_names(len(eq.context), avoid)
        text = f"{format_combination(eq.lhs, names)} = {format_combination(eq.rhs, names)}"
        if _needs_sort_annotation(eq, theory):
            text += f" : {eq.sort}"
        lines.append(f"  eq {text};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def equation_text(eq: Equation, theory: TheoryPresentation) -> str:
    names = _var_names(len(eq.context), set(theory.sorts) | {op.name for op in theory.ops})
    return f"{format_combination(eq.lhs, names)} = {format_combination(eq.rhs, names)}"
