"""Sorted signatures, terms, integer-linear combinations of terms and equations.

Sorts are plain strings and a word (a context, or an operation domain) is a
tuple of sort names; the empty tuple is the empty word.  Variables are
positional: ``Var(i)`` refers to the ``i``-th letter of the ambient context.

Linear models turn every operation ``op : s1, ..., sn -> s`` into ``n``
linear maps ``si -> s`` (one per argument slot).  :func:`linearize` expands a
term into sums of *paths* through those slots, which is how equations become
linear relations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

Word = tuple  # tuple[str, ...]
Arrow = tuple  # (op name, argument position)
Path = tuple  # tuple[Arrow, ...], first-applied arrow first


class TheoryError(Exception):
    """Ill-formed signature, term or equation."""


class SortError(TheoryError):
    pass


@dataclass(frozen=True)
class OperationSymbol:
    name: str
    domain: Word
    codomain: str

    @property
    def arity(self) -> int:
        return len(self.domain)


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Apply:
    op: str
    args: tuple = ()


Term = Union[Var, Apply]


def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + max((term_depth(a) for a in t.args), default=0)


def term_vars(t: Term) -> list[int]:
    """Variable indices in left-to-right order of occurrence (with repeats)."""
    if isinstance(t, Var):
        return [t.index]
    return [i for a in t.args for i in term_vars(a)]


def _rename(t: Term, perm: Mapping[int, int]) -> Term:
    if isinstance(t, Var):
        return Var(perm[t.index])
    return Apply(t.op, tuple(_rename(a, perm) for a in t.args))


@dataclass(frozen=True, eq=False)
class LinearTermCombination:
    """A finite integer combination of terms sharing one context and one sort.

    Summands keep first-appearance order (so printing is stable), like terms
    are merged and zero coefficients dropped.  Equality ignores order.
    """

    context: Word
    sort: str
    summands: tuple = ()

    def __post_init__(self):
        merged: dict = {}
        for term, coeff in self.summands:
            merged[term] = merged.get(term, 0) + int(coeff)
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "summands", tuple((t, c) for t, c in merged.items() if c != 0))

    @classmethod
    def of(cls, context: Sequence[str], sort: str, *pairs) -> LinearTermCombination:
        return cls(tuple(context), sort, tuple(pairs))

    @classmethod
    def zero(cls, context: Sequence[str], sort: str) -> LinearTermCombination:
        return cls(tuple(context), sort, ())

    def as_dict(self) -> dict:
        return dict(self.summands)

    def is_zero(self) -> bool:
        return not self.summands

    def __eq__(self, other):
        if not isinstance(other, LinearTermCombination):
            return NotImplemented
        return (self.context, self.sort) == (other.context, other.sort) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.context, self.sort, frozenset(self.summands)))

    def __add__(self, other: LinearTermCombination) -> LinearTermCombination:
        _same_shape(self, other)
        return LinearTermCombination(self.context, self.sort, self.summands + other.summands)

    def scale(self, k: int) -> LinearTermCombination:
        return LinearTermCombination(self.context, self.sort, tuple((t, k * c) for t, c in self.summands))

    def __sub__(self, other: LinearTermCombination) -> LinearTermCombination:
        return self + other.scale(-1)

    def __repr__(self):
        if not self.summands:
            return f"0 : {list(self.context)} -> {self.sort}"
        return " + ".join(f"{c}*{t}" for t, c in self.summands) + f" : {list(self.context)} -> {self.sort}"


def _same_shape(a: LinearTermCombination, b: LinearTermCombination):
    if a.context != b.context or a.sort != b.sort:
        raise SortError(f"combinations live over different contexts/sorts: {a.context}->{a.sort} vs {b.context}->{b.sort}")


@dataclass(frozen=True, eq=False)
class Equation:
    """``lhs = rhs``.  The shared context is normalised to the variables that
    occur, in order of first occurrence (lhs before rhs), which makes
    alpha-equivalent equations structurally equal."""

    lhs: LinearTermCombination
    rhs: LinearTermCombination

    def __post_init__(self):
        _same_shape(self.lhs, self.rhs)
        order: list[int] = []
        for comb in (self.lhs, self.rhs):
            for t, _ in comb.summands:
                for i in term_vars(t):
                    if i not in order:
                        order.append(i)
        if order == list(range(len(self.lhs.context))):
            return
        perm = {old: new for new, old in enumerate(order)}
        ctx = tuple(self.lhs.context[i] for i in order)
        for name in ("lhs", "rhs"):
            comb = getattr(self, name)
            object.__setattr__(
                self,
                name,
                LinearTermCombination(ctx, comb.sort, tuple((_rename(t, perm), c) for t, c in comb.summands)),
            )

    @property
    def context(self) -> Word:
        return self.lhs.context

    @property
    def sort(self) -> str:
        return self.lhs.sort

    def difference(self) -> LinearTermCombination:
        return self.lhs - self.rhs

    def __eq__(self, other):
        if not isinstance(other, Equation):
            return NotImplemented
        return self.lhs == other.lhs and self.rhs == other.rhs

    def __hash__(self):
        return hash((self.lhs, self.rhs))


@dataclass(frozen=True)
class Relation:
    """One linear relation between paths ``source -> target`` (a block of an equation)."""

    source: str
    target: str
    paths: tuple  # tuple[(Path, int)]
    equation: int
    position: int

    @property
    def length(self) -> int:
        return max((len(p) for p, _ in self.paths), default=0)


@dataclass(frozen=True, eq=False)
class TheoryPresentation:
    name: str
    sorts: tuple
    ops: tuple = ()
    equations: tuple = ()
    _op_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "equations", tuple(self.equations))
        if len(set(self.sorts)) != len(self.sorts):
            raise TheoryError("duplicate sort name")
        for s in self.sorts:
            if not s:
                raise TheoryError("empty sort name")
        index = {}
        for op in self.ops:
            if op.name in index:
                raise TheoryError(f"duplicate operation {op.name}")
            if op.name in self.sorts:
                raise TheoryError(f"operation {op.name} clashes with a sort name")
            for s in op.domain + (op.codomain,):
                if s not in self.sorts:
                    raise TheoryError(f"operation {op.name} uses unknown sort {s}")
            index[op.name] = op
        object.__setattr__(self, "_op_index", index)
        for eq in self.equations:
            for comb in (eq.lhs, eq.rhs):
                for s in comb.context + (comb.sort,):
                    if s not in self.sorts:
                        raise TheoryError(f"unknown sort {s} in equation")
                for t, _ in comb.summands:
                    got = well_sorted(self, t, comb.context)
                    if got != comb.sort:
                        raise SortError(f"summand {t} has sort {got}, expected {comb.sort}")

    def __eq__(self, other):
        if not isinstance(other, TheoryPresentation):
            return NotImplemented
        return (self.name, self.sorts, self.ops, self.equations) == (other.name, other.sorts, other.ops, other.equations)

    def __hash__(self):
        return hash((self.name, self.sorts, self.ops, self.equations))

    def op(self, name: str) -> OperationSymbol:
        try:
            return self._op_index[name]
        except KeyError:
            raise TheoryError(f"unknown operation {name}") from None

    def has_op(self, name: str) -> bool:
        return name in self._op_index

    def arrows(self) -> list[Arrow]:
        """Argument slots ``(op, k)``, in declaration order."""
        return [(op.name, k) for op in self.ops for k in range(op.arity)]

    def arrow_source(self, a: Arrow) -> str:
        return self.op(a[0]).domain[a[1]]

    def arrow_target(self, a: Arrow) -> str:
        return self.op(a[0]).codomain

    def arrow_key(self, a: Arrow) -> tuple[int, int]:
        return (self.ops.index(self.op(a[0])), a[1])

    def path_key(self, p: Path) -> tuple:
        return (len(p), tuple(self.arrow_key(a) for a in p))

    def check_word(self, w: Iterable[str]) -> Word:
        w = tuple(w)
        for s in w:
            if s not in self.sorts:
                raise TheoryError(f"unknown sort {s}")
        return w

    def relations(self) -> list[Relation]:
        """Every equation split into one path relation per context position."""
        out = []
        for e, eq in enumerate(self.equations):
            blocks = linearize(self, eq.difference())
            for i, letter in enumerate(eq.context):
                paths = tuple(sorted(blocks.get(i, {}).items(), key=lambda pc: self.path_key(pc[0])))
                if paths:
                    out.append(Relation(letter, eq.sort, paths, e, i))
        return out


def well_sorted(theory: TheoryPresentation, term: Term, context: Sequence[str]) -> str:
    """Sort of ``term`` in ``context``; raises :class:`SortError` on any clash."""
    if isinstance(term, Var):
        if not 0 <= term.index < len(context):
            raise SortError(f"variable index {term.index} out of range for context of length {len(context)}")
        return context[term.index]
    op = theory.op(term.op)
    if len(term.args) != op.arity:
        raise SortError(f"operation {op.name} expects {op.arity} arguments, got {len(term.args)}")
    for k, (arg, want) in enumerate(zip(term.args, op.domain)):
        got = well_sorted(theory, arg, context)
        if got != want:
            raise SortError(f"argument {k + 1} of {op.name} has sort {got}, expected {want}")
    return op.codomain


def substitute_term(term: Term, assignment: Sequence[Term]) -> Term:
    if isinstance(term, Var):
        return assignment[term.index]
    return Apply(term.op, tuple(substitute_term(a, assignment) for a in term.args))


def substitute(
    theory: TheoryPresentation,
    comb: LinearTermCombination,
    assignment: Sequence[Term],
    new_context: Sequence[str],
) -> LinearTermCombination:
    """Simultaneously replace ``Var(i)`` by ``assignment[i]`` (a term over ``new_context``)."""
    new_context = tuple(new_context)
    if len(assignment) != len(comb.context):
        raise SortError(f"assignment has {len(assignment)} terms for a context of length {len(comb.context)}")
    for i, (t, want) in enumerate(zip(assignment, comb.context)):
        got = well_sorted(theory, t, new_context)
        if got != want:
            raise SortError(f"assignment for variable {i} has sort {got}, expected {want}")
    return LinearTermCombination(
        new_context, comb.sort, tuple((substitute_term(t, assignment), c) for t, c in comb.summands)
    )


def linearize_term(theory: TheoryPresentation, term: Term) -> dict[int, dict[Path, int]]:
    """Expand ``term`` into ``{context position: {path: multiplicity}}``.

    Nullary operations contribute nothing: in a linear model they are zero.
    """
    if isinstance(term, Var):
        return {term.index: {(): 1}}
    out: dict[int, dict[Path, int]] = {}
    for k, arg in enumerate(term.args):
        arrow = (term.op, k)
        for pos, paths in linearize_term(theory, arg).items():
            bucket = out.setdefault(pos, {})
            for p, c in paths.items():
                q = p + (arrow,)
                bucket[q] = bucket.get(q, 0) + c
    return out


def linearize(theory: TheoryPresentation, comb: LinearTermCombination) -> dict[int, dict[Path, int]]:
    out: dict[int, dict[Path, int]] = {}
    for term, coeff in comb.summands:
        for pos, paths in linearize_term(theory, term).items():
            bucket = out.setdefault(pos, {})
            for p, c in paths.items():
                bucket[p] = bucket.get(p, 0) + coeff * c
    return {pos: {p: c for p, c in b.items() if c} for pos, b in out.items() if any(b.values())}


def path_source(theory: TheoryPresentation, p: Path, target: str) -> str:
    return theory.arrow_source(p[0]) if p else target


def format_path(theory: TheoryPresentation, p: Path, var: str = "a") -> str:
    """Render a path as a term with one hole; other argument slots print as ``_``."""
    out = var
    for op_name, k in p:
        op = theory.op(op_name)
        args = ["_"] * op.arity
        args[k] = out
        out = f"{op_name}({', '.join(args)})"
    return out
