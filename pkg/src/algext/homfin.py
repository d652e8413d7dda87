"""Hom-spaces of the linearised theory and cofree models.

In a linear model every operation splits into one linear map per argument
slot (an *arrow*), so a term in one variable is a linear combination of
paths of arrows, and the equations become linear relations between paths.
``Hom(s, t)`` is the span of paths ``s -> t`` modulo the two-sided ideal
generated by those relations.  We compute it by truncating at path length
``L`` (term depth ``L + 1``) and raising ``L`` until the quotient stops
changing.

The cofree model on a family ``W`` indexed by words is

    R(W)(s) = (+)_{w in I} (+)_{j} Hom(Hom(s, w_j), W_w)

with operations acting by precomposition.  This is the direction for which
``Hom(forget(F), W) = Hom(F, R(W))``; the basis of ``R(W)(s)`` is
(hom-basis element of ``Hom(s, w_j)``) x (basis vector of ``W_w``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

from .linalg import Field, Matrix, _rref_lists, block_diag, hstack
from .models import IndexedFamily, Model, ModelError, ModelMorphism, check_index
from .theory import Path, TheoryPresentation, format_path

DEFAULT_DEPTH_BOUND = 8


class NotStabilized(Exception):
    """The truncated hom-spaces kept changing up to the depth bound."""

    def __init__(self, depth_bound: int, growth: Sequence[tuple[int, int]], what: str = ""):
        self.depth_bound = depth_bound
        self.growth = list(growth)
        table = ", ".join(f"{d}:{n}" for d, n in self.growth)
        super().__init__(f"hom-space {what} did not stabilize within depth {depth_bound} (depth:dim {table})".replace("  ", " "))


def _backward_closure(theory: TheoryPresentation, sorts) -> frozenset:
    out = set(sorts)
    changed = True
    while changed:
        changed = False
        for a in theory.arrows():
            if theory.arrow_target(a) in out and theory.arrow_source(a) not in out:
                out.add(theory.arrow_source(a))
                changed = True
    return frozenset(out)


@lru_cache(maxsize=None)
def _paths_ending(theory: TheoryPresentation, target: str, length: int) -> tuple:
    """All paths of exactly ``length`` arrows ending at ``target``, as (source, path)."""
    if length == 0:
        return ((target, ()),)
    out = []
    for src, p in _paths_ending(theory, target, length - 1):
        for a in theory.arrows():
            if theory.arrow_target(a) == src:
                out.append((theory.arrow_source(a), (a,) + p))
    return tuple(out)


@dataclass
class _Quotient:
    """Paths ``source -> target`` of length <= level modulo the truncated ideal."""

    level: int
    std: list  # standard (non-leading) paths, ascending order
    reducer: dict  # leading path -> {standard path: coefficient}; path == -sum(...)

    def reduce(self, vec: Mapping[Path, object], field: Field) -> list:
        """Coordinates of a path combination in the standard paths."""
        out = {p: field.zero for p in self.std}
        for p, c in vec.items():
            if p in out:
                out[p] = field.add(out[p], c)
            elif p in self.reducer:
                for q, x in self.reducer[p].items():
                    out[q] = field.sub(out[q], field.mul(c, x))
            else:
                raise ValueError(f"path of length {len(p)} beyond truncation level {self.level}")
        return [out[p] for p in self.std]


@lru_cache(maxsize=None)
def _quotient(theory: TheoryPresentation, field: Field, source: str, target: str, level: int) -> _Quotient:
    key = theory.path_key
    paths = [p for n in range(level + 1) for s, p in _paths_ending(theory, target, n) if s == source]
    paths.sort(key=key, reverse=True)  # leading columns = largest paths
    col = {p: i for i, p in enumerate(paths)}
    rows = []
    for rel in theory.relations():
        room = level - rel.length
        if room < 0:
            continue
        for n_suffix in range(room + 1):
            for mid, suffix in _paths_ending(theory, target, n_suffix):
                if mid != rel.target:
                    continue
                for n_prefix in range(room - n_suffix + 1):
                    for s, prefix in _paths_ending(theory, rel.source, n_prefix):
                        if s != source:
                            continue
                        row = [field.zero] * len(paths)
                        for p, c in rel.paths:
                            k = col[prefix + p + suffix]
                            row[k] = field.add(row[k], field(c))
                        rows.append(row)
    red, pivots = _rref_lists(field, rows, len(paths)) if rows else ([], ())
    pivset = set(pivots)
    reducer = {}
    for i, pc in enumerate(pivots):
        reducer[paths[pc]] = {paths[j]: red[i][j] for j in range(len(paths)) if j not in pivset}
    std = sorted((paths[j] for j in range(len(paths)) if j not in pivset), key=key)
    return _Quotient(level, std, reducer)


@dataclass
class HomData:
    """Stabilised ``Hom(s, target)`` for every ``s`` in ``sources``."""

    theory: TheoryPresentation
    field: Field
    target: str
    sources: frozenset
    depth_used: int
    quotients: dict  # source -> _Quotient at level depth_used (one above the stable level)
    growth: list

    def basis(self, source: str) -> list:
        q = self.quotients.get(source)
        return list(q.std) if q else []

    def dim(self, source: str) -> int:
        return len(self.basis(source))

    def coords(self, source: str, vec: Mapping[Path, object]) -> list:
        return self.quotients[source].reduce(vec, self.field)

    @property
    def identity(self) -> list:
        """Coordinates of the empty path in ``Hom(target, target)``."""
        return self.coords(self.target, {(): self.field.one})

    def action(self, arrow) -> Matrix:
        """Precomposition with ``arrow``: ``Hom(tgt, target) -> Hom(src, target)``.

        Column ``b`` holds the coordinates of ``b`` after ``arrow``.
        """
        return _action(self, arrow)


def _action(data: HomData, arrow) -> Matrix:
    th, f = data.theory, data.field
    src, tgt = th.arrow_source(arrow), th.arrow_target(arrow)
    cols = [data.coords(src, {(arrow,) + b: f.one}) for b in data.basis(tgt)]
    n = data.dim(src)
    return Matrix(f, n, len(cols), tuple(tuple(c[i] for c in cols) for i in range(n)))


def _relations_act_trivially(data: HomData) -> bool:
    th, f = data.theory, data.field
    actions = {a: data.action(a) for a in th.arrows() if th.arrow_target(a) in data.sources}
    for rel in th.relations():
        if rel.target not in data.sources:
            continue
        n = data.dim(rel.target)
        total = Matrix.zeros(f, data.dim(rel.source), n)
        for p, c in rel.paths:
            m = Matrix.identity(f, n)
            for a in reversed(p):
                m = actions[a] @ m
            total = total + m.scale(c)
        if not total.is_zero():
            return False
    return True


@lru_cache(maxsize=None)
def hom_data(
    theory: TheoryPresentation, field: Field, target: str, sources: frozenset, depth_bound: int = DEFAULT_DEPTH_BOUND
) -> HomData:
    if depth_bound < 1:
        raise ValueError("depth_bound must be at least 1")
    theory.check_word([target, *sources])
    sources = _backward_closure(theory, sources)
    growth = []

    def dims_at(level):
        return {s: len(_quotient(theory, field, s, target, level).std) for s in sources}

    for depth in range(1, depth_bound + 1):
        level = depth - 1
        here = dims_at(level)
        growth.append((depth, sum(here.values())))
        above = {s: _quotient(theory, field, s, target, level + 1) for s in sources}
        stable = all(len(above[s].std) == here[s] and all(len(p) <= level for p in above[s].std) for s in sources)
        if stable:
            data = HomData(theory, field, target, sources, depth, above, growth)
            if _relations_act_trivially(data):
                return data
    growth.append((depth_bound + 1, sum(dims_at(depth_bound).values())))
    raise NotStabilized(depth_bound, growth, f"into {target}")


@dataclass(frozen=True)
class HomBasisElement:
    position: int  # context position the path starts from
    path: tuple

    def render(self, theory: TheoryPresentation, names: Sequence[str] | None = None) -> str:
        name = names[self.position] if names else f"x{self.position}"
        return format_path(theory, self.path, name)


@dataclass
class LinHomSpace:
    context: tuple
    sort: str
    basis: list
    depth_used: int
    stabilized: bool
    growth: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.basis)


def hom_basis(
    theory: TheoryPresentation,
    context: Sequence[str],
    sort: str,
    depth_bound: int = DEFAULT_DEPTH_BOUND,
    field: Field | None = None,
) -> LinHomSpace:
    """Basis of ``Hom(context, sort)`` = (+)_i ``Hom(context[i], sort)``.

    Basis elements are standard paths (a term with one hole per path), listed by
    context position, then path length, then declaration order of the arrows.
    Raises :class:`NotStabilized` when no depth up to ``depth_bound`` is stable.
    """
    from .linalg import QQ

    field = field or QQ
    context = theory.check_word(context)
    theory.check_word([sort])
    if not context:
        return LinHomSpace(context, sort, [], 1, True, [(1, 0)])
    try:
        data = hom_data(theory, field, sort, frozenset(context), depth_bound)
    except NotStabilized as exc:
        raise NotStabilized(depth_bound, exc.growth, f"{list(context)} -> {sort}") from None
    basis = [HomBasisElement(i, p) for i, s in enumerate(context) for p in data.basis(s)]
    growth = [(d, sum(len(_quotient(theory, field, s, sort, d - 1).std) for s in context)) for d, _ in data.growth]
    return LinHomSpace(context, sort, basis, data.depth_used, True, growth)


# cofree models


@dataclass(frozen=True)
class _Block:
    word: tuple
    position: int
    letter: str
    hom_dim: int
    space_dim: int
    offset: int

    @property
    def size(self) -> int:
        return self.hom_dim * self.space_dim


@dataclass
class CofreeModel:
    base: IndexedFamily
    model: Model
    homs: dict  # letter -> HomData
    blocks: dict  # sort -> list[_Block]
    depth_bound: int

    @property
    def theory(self) -> TheoryPresentation:
        return self.model.theory

    @property
    def field(self) -> Field:
        return self.model.field

    def counit(self) -> dict:
        """``forget(R(W)) -> W`` word by word."""
        from .models import identity_morphism

        return adjunction_untranspose(self, identity_morphism(self.model))


def cofree_model(
    theory: TheoryPresentation,
    W: IndexedFamily,
    field: Field,
    depth_bound: int = DEFAULT_DEPTH_BOUND,
) -> CofreeModel:
    index = check_index(theory, W.index)
    if not W.covers_sorts(theory):
        raise ModelError("the index must contain every sort as a one-letter word")
    letters = sorted({s for w in index for s in w}, key=theory.sorts.index)
    all_sorts = frozenset(theory.sorts)
    homs = {t: hom_data(theory, field, t, all_sorts, depth_bound) for t in letters}
    blocks = {}
    carrier = {}
    for s in theory.sorts:
        off = 0
        bl = []
        for w in index:
            for j, t in enumerate(w):
                b = _Block(w, j, t, homs[t].dim(s), W.dims[w], off)
                bl.append(b)
                off += b.size
        blocks[s] = bl
        carrier[s] = off
    ops = {}
    for op in theory.ops:
        cols = []
        for k, s_k in enumerate(op.domain):
            arrow = (op.name, k)
            parts = []
            for b_out, b_in in zip(blocks[op.codomain], blocks[s_k]):
                act = homs[b_out.letter].action(arrow)  # dim Hom(s_k, t) x dim Hom(s, t)
                parts.append(_kron_identity(field, act.T, b_out.space_dim))
            cols.append(block_diag(field, parts))
        ops[op.name] = hstack(field, cols, nrows=carrier[op.codomain])
    model = Model(theory, field, carrier, ops)
    return CofreeModel(W, model, homs, blocks, depth_bound)


def _kron_identity(field: Field, m: Matrix, n: int) -> Matrix:
    """``m (x) I_n`` with row index ``i * n + e``."""
    rows = []
    for i in range(m.nrows):
        for e in range(n):
            row = [field.zero] * (m.ncols * n)
            for j in range(m.ncols):
                row[j * n + e] = m.rows[i][j]
            rows.append(tuple(row))
    return Matrix(field, m.nrows * n, m.ncols * n, tuple(rows))


def _word_blocks(F: Model, w: tuple) -> list:
    offsets = []
    off = 0
    for s in w:
        offsets.append((off, F.carrier[s]))
        off += F.carrier[s]
    return offsets


def adjunction_transpose(F: Model, cofree: CofreeModel, phi: Mapping[tuple, Matrix]) -> ModelMorphism:
    """Turn word-wise maps ``forget(F)(w) -> W_w`` into a model morphism ``F -> R(W)``."""
    F.same_kind(cofree.model)
    f = F.field
    W = cofree.base
    for w in W.index:
        m = phi[w]
        if m.shape != (W.dims[w], F.dim(w)):
            raise ModelError(f"map on word {w} should be {W.dims[w]}x{F.dim(w)}, got {m.nrows}x{m.ncols}")
    comps = {}
    for s in cofree.theory.sorts:
        rows = []
        for b in cofree.blocks[s]:
            off, width = _word_blocks(F, b.word)[b.position]
            piece = phi[b.word].submatrix(range(W.dims[b.word]), range(off, off + width))
            for path in cofree.homs[b.letter].basis(s):
                rows.extend((piece @ F.path_matrix(path, s)).rows)
        comps[s] = Matrix(f, len(rows), F.carrier[s], tuple(rows))
    return ModelMorphism(F, cofree.model, comps)


def adjunction_untranspose(cofree: CofreeModel, psi: ModelMorphism) -> dict:
    """Inverse of :func:`adjunction_transpose`: evaluate at the identity paths."""
    F = psi.source
    f = F.field
    W = cofree.base
    out = {}
    for w in W.index:
        pieces = []
        for j, t in enumerate(w):
            blk = next(b for b in cofree.blocks[t] if b.word == w and b.position == j)
            idc = cofree.homs[t].identity
            comp = psi.components[t]
            acc = Matrix.zeros(f, blk.space_dim, F.carrier[t])
            for bi, c in enumerate(idc):
                if c == f.zero:
                    continue
                start = blk.offset + bi * blk.space_dim
                acc = acc + comp.submatrix(range(start, start + blk.space_dim), range(F.carrier[t])).scale(c)
            pieces.append(acc)
        out[w] = hstack(f, pieces, nrows=W.dims[w])
    return out


def unit(F: Model, index: Sequence[Sequence[str]], depth_bound: int = DEFAULT_DEPTH_BOUND) -> tuple[CofreeModel, ModelMorphism]:
    """The cofree model on ``forget(F)`` and the unit ``F -> R(forget(F))``."""
    from .models import forget

    fam = forget(F, index)
    cofree = cofree_model(F.theory, fam, F.field, depth_bound)
    ident = {w: Matrix.identity(F.field, F.dim(w)) for w in fam.index}
    return cofree, adjunction_transpose(F, cofree, ident)


def cofree_map(source: CofreeModel, target: CofreeModel, g: Mapping[tuple, Matrix]) -> ModelMorphism:
    """``R(g) : R(W1) -> R(W2)`` for word-wise maps ``g[w] : W1_w -> W2_w``."""
    if source.base.index != target.base.index:
        raise ModelError("cofree models over different index sets")
    f = source.field
    comps = {}
    for s in source.theory.sorts:
        parts = []
        for b1, b2 in zip(source.blocks[s], target.blocks[s]):
            gw = g[b1.word]
            if gw.shape != (b2.space_dim, b1.space_dim):
                raise ModelError(f"map on word {b1.word} has the wrong shape")
            parts.append(block_diag(f, [gw] * b1.hom_dim))
        comps[s] = block_diag(f, parts)
    return ModelMorphism(source.model, target.model, comps)
