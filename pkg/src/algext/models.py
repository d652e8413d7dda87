"""Linear models of a theory and the morphisms between them.

A model assigns a dimension to every sort and, to every operation
``op : s1, ..., sn -> s``, a matrix from ``V(s1) (+) ... (+) V(sn)`` to
``V(s)``.  The value on a word is the direct sum of the values on its
letters.  Kernels, cokernels and images are computed sort by sort and the
operations on the result are induced by a canonical solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .linalg import (
    Field,
    Matrix,
    NoSolution,
    ShapeError,
    biproduct,
    block_diag,
    cokernel_projection,
    epi_mono_factorization,
    kernel_basis,
    solve_right,
    vstack,
)
from .theory import (
    Arrow,
    Equation,
    LinearTermCombination,
    Path,
    TheoryError,
    TheoryPresentation,
    Var,
)


class ModelError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class Model:
    theory: TheoryPresentation
    field: Field
    carrier: Mapping[str, int]
    ops: Mapping[str, Matrix]

    def __post_init__(self):
        carrier = {s: int(self.carrier.get(s, 0)) for s in self.theory.sorts}
        extra = set(self.carrier) - set(self.theory.sorts)
        if extra:
            raise ModelError(f"carrier mentions unknown sorts {sorted(extra)}")
        if any(d < 0 for d in carrier.values()):
            raise ModelError("negative dimension")
        object.__setattr__(self, "carrier", carrier)
        extra = set(self.ops) - {op.name for op in self.theory.ops}
        if extra:
            raise ModelError(f"matrices given for unknown operations {sorted(extra)}")
        ops = {}
        for op in self.theory.ops:
            shape = (carrier[op.codomain], self.dim(op.domain))
            m = self.ops.get(op.name)
            if m is None:
                if 0 not in shape:
                    raise ModelError(f"missing matrix for operation {op.name}")
                m = Matrix.zeros(self.field, *shape)
            if m.field != self.field:
                raise ShapeError(f"operation {op.name}: matrix over {m.field}, model over {self.field}")
            if m.shape != shape:
                raise ShapeError(f"operation {op.name}: expected a {shape[0]}x{shape[1]} matrix, got {m.nrows}x{m.ncols}")
            ops[op.name] = m
        object.__setattr__(self, "ops", ops)

    def dim(self, word: Sequence[str] | str) -> int:
        if isinstance(word, str):
            return self.carrier[word]
        return sum(self.carrier[s] for s in word)

    def total_dim(self) -> int:
        return sum(self.carrier.values())

    def arrow_matrix(self, arrow: Arrow) -> Matrix:
        """The block of ``op`` belonging to one argument slot."""
        name, k = arrow
        op = self.theory.op(name)
        start = self.dim(op.domain[:k])
        return self.ops[name].submatrix(range(self.ops[name].nrows), range(start, start + self.carrier[op.domain[k]]))

    def path_matrix(self, path: Path, source: str) -> Matrix:
        m = Matrix.identity(self.field, self.carrier[source])
        for a in path:
            m = self.arrow_matrix(a) @ m
        return m

    def same_kind(self, other: Model):
        if self.theory != other.theory:
            raise ModelError(f"models of different theories ({self.theory.name} vs {other.theory.name})")
        if self.field != other.field:
            raise ModelError(f"models over different fields ({self.field} vs {other.field})")

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.theory == other.theory
            and self.field == other.field
            and self.carrier == other.carrier
            and self.ops == other.ops
        )

    def __hash__(self):
        return hash((self.theory, self.field, tuple(sorted(self.carrier.items()))))

    def __repr__(self):
        return f"Model({self.theory.name}, {self.field}, {self.carrier})"


def zero_model(theory: TheoryPresentation, field: Field) -> Model:
    return Model(theory, field, {s: 0 for s in theory.sorts}, {})


@dataclass(frozen=True, eq=False)
class ModelMorphism:
    source: Model
    target: Model
    components: Mapping[str, Matrix]

    def __post_init__(self):
        self.source.same_kind(self.target)
        comps = {}
        for s in self.source.theory.sorts:
            shape = (self.target.carrier[s], self.source.carrier[s])
            m = self.components.get(s)
            if m is None:
                if 0 not in shape:
                    raise ModelError(f"missing component for sort {s}")
                m = Matrix.zeros(self.source.field, *shape)
            if m.shape != shape:
                raise ShapeError(f"component {s}: expected {shape[0]}x{shape[1]}, got {m.nrows}x{m.ncols}")
            comps[s] = m
        object.__setattr__(self, "components", comps)

    @property
    def field(self) -> Field:
        return self.source.field

    @property
    def theory(self) -> TheoryPresentation:
        return self.source.theory

    def on_word(self, word: Sequence[str]) -> Matrix:
        return block_diag(self.field, [self.components[s] for s in word])

    def naturality_failures(self) -> list[str]:
        """Operations whose square does not commute."""
        bad = []
        for op in self.theory.ops:
            lhs = self.components[op.codomain] @ self.source.ops[op.name]
            rhs = self.target.ops[op.name] @ self.on_word(op.domain)
            if lhs != rhs:
                bad.append(op.name)
        return bad

    def is_valid(self) -> bool:
        return not self.naturality_failures()

    def compose(self, first: ModelMorphism) -> ModelMorphism:
        """``self`` after ``first``."""
        if first.target is not self.source and first.target != self.source:
            raise ModelError("morphisms are not composable")
        return ModelMorphism(first.source, self.target, {s: self.components[s] @ first.components[s] for s in self.theory.sorts})

    def __add__(self, other: ModelMorphism) -> ModelMorphism:
        return ModelMorphism(self.source, self.target, {s: self.components[s] + other.components[s] for s in self.theory.sorts})

    def __sub__(self, other: ModelMorphism) -> ModelMorphism:
        return ModelMorphism(self.source, self.target, {s: self.components[s] - other.components[s] for s in self.theory.sorts})

    def scale(self, c) -> ModelMorphism:
        return ModelMorphism(self.source, self.target, {s: m.scale(c) for s, m in self.components.items()})

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.components.values())

    def is_mono(self) -> bool:
        return all(m.rank() == m.ncols for m in self.components.values())

    def is_epi(self) -> bool:
        return all(m.rank() == m.nrows for m in self.components.values())

    def is_iso(self) -> bool:
        return self.is_mono() and self.is_epi()

    def flat(self) -> list:
        return [x for s in self.theory.sorts for x in self.components[s].flatten()]

    def __eq__(self, other):
        if not isinstance(other, ModelMorphism):
            return NotImplemented
        return self.source == other.source and self.target == other.target and self.components == other.components

    __hash__ = None


def identity_morphism(model: Model) -> ModelMorphism:
    return ModelMorphism(model, model, {s: Matrix.identity(model.field, d) for s, d in model.carrier.items()})


def zero_morphism(source: Model, target: Model) -> ModelMorphism:
    f = source.field
    comps = {s: Matrix.zeros(f, target.carrier[s], source.carrier[s]) for s in source.theory.sorts}
    return ModelMorphism(source, target, comps)


# evaluation


def eval_term(term, context: Sequence[str], model: Model) -> Matrix:
    """Matrix of a term ``context -> sort``: variables are projections out of
    the context's direct sum, applications stack their arguments."""
    f = model.field
    dims = [model.carrier[s] for s in context]
    _, projections = biproduct(f, dims)

    def go(t) -> Matrix:
        if isinstance(t, Var):
            if not 0 <= t.index < len(context):
                raise TheoryError(f"variable index {t.index} out of range")
            return projections[t.index]
        op = model.theory.op(t.op)
        if len(t.args) != op.arity:
            raise TheoryError(f"operation {op.name} expects {op.arity} arguments")
        args = [go(a) for a in t.args]
        for a, s in zip(args, op.domain):
            if a.nrows != model.carrier[s]:
                raise TheoryError(f"argument of {op.name} has the wrong sort")
        return model.ops[op.name] @ vstack(f, args, ncols=sum(dims))

    return go(term)


def eval_combination(comb: LinearTermCombination, model: Model) -> Matrix:
    f = model.field
    for s in comb.context + (comb.sort,):
        if s not in model.theory.sorts:
            raise TheoryError(f"sort {s} is not part of theory {model.theory.name}")
    out = Matrix.zeros(f, model.carrier[comb.sort], model.dim(comb.context))
    for term, coeff in comb.summands:
        out = out + eval_term(term, comb.context, model).scale(coeff)
    return out


@dataclass
class EquationFailure:
    index: int
    equation: Equation
    lhs: Matrix
    rhs: Matrix


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.valid


def validate_model(model: Model) -> ValidationReport:
    report = ValidationReport()
    for i, eq in enumerate(model.theory.equations):
        lhs = eval_combination(eq.lhs, model)
        rhs = eval_combination(eq.rhs, model)
        if lhs != rhs:
            report.failures.append(EquationFailure(i, eq, lhs, rhs))
    constants = [op.name for op in model.theory.ops if op.arity == 0]
    if constants:
        report.notes.append(
            "constants " + ", ".join(constants) + " act as zero maps (the empty direct sum is the zero space)"
        )
    return report


# hom-spaces


def _naturality_system(F: Model, G: Model) -> tuple[Matrix, list[tuple[str, int, int, int]]]:
    """Coefficient matrix of the commuting-square conditions in the unknown
    component entries, plus the layout ``(sort, offset, rows, cols)`` of the unknowns."""
    f = F.field
    layout = []
    offset = 0
    for s in F.theory.sorts:
        layout.append((s, offset, G.carrier[s], F.carrier[s]))
        offset += G.carrier[s] * F.carrier[s]
    where = {s: (o, r, c) for s, o, r, c in layout}
    nunk = offset
    rows = []
    for arrow in F.theory.arrows():
        src = F.theory.arrow_source(arrow)
        tgt = F.theory.arrow_target(arrow)
        a_f = F.arrow_matrix(arrow)  # F(tgt) x F(src)
        a_g = G.arrow_matrix(arrow)  # G(tgt) x G(src)
        o_t, _, c_t = where[tgt]
        o_s, _, c_s = where[src]
        # h_tgt @ a_f - a_g @ h_src, entry (i, j)
        for i in range(G.carrier[tgt]):
            for j in range(F.carrier[src]):
                row = [f.zero] * nunk
                for l in range(F.carrier[tgt]):
                    x = a_f.rows[l][j]
                    if x != f.zero:
                        k = o_t + i * c_t + l
                        row[k] = f.add(row[k], x)
                for l in range(G.carrier[src]):
                    x = a_g.rows[i][l]
                    if x != f.zero:
                        k = o_s + l * c_s + j
                        row[k] = f.sub(row[k], x)
                rows.append(tuple(row))
    return Matrix(f, len(rows), nunk, tuple(rows)), layout


def morphism_from_flat(F: Model, G: Model, vec: Sequence) -> ModelMorphism:
    comps = {}
    offset = 0
    for s in F.theory.sorts:
        r, c = G.carrier[s], F.carrier[s]
        comps[s] = Matrix.from_flat(F.field, r, c, list(vec[offset : offset + r * c]))
        offset += r * c
    return ModelMorphism(F, G, comps)


def hom_space(F: Model, G: Model) -> list[ModelMorphism]:
    """Basis of the space of model morphisms ``F -> G`` (empty list: only zero)."""
    F.same_kind(G)
    system, _ = _naturality_system(F, G)
    basis = kernel_basis(system).basis
    return [morphism_from_flat(F, G, [basis.rows[i][j] for i in range(basis.nrows)]) for j in range(basis.ncols)]


def hom_coordinates(basis: Sequence[ModelMorphism], phi: ModelMorphism) -> list:
    """Coordinates of ``phi`` in a hom-space basis; raises NoSolution if outside the span."""
    f = phi.field
    n = len(phi.flat())
    mat = Matrix(f, n, len(basis), tuple(tuple(b.flat()[i] for b in basis) for i in range(n))) if basis else Matrix.zeros(f, n, 0)
    x = solve_right(mat, Matrix.column(f, phi.flat()))
    return [r[0] for r in x.rows]


# abelian structure, computed sort by sort


@dataclass
class KernelResult:
    sub: Model
    inclusion: ModelMorphism


def _induce_sub(G: Model, monos: Mapping[str, Matrix]) -> Model:
    """Operations on a family of subspaces ``monos[s]`` of ``G`` closed under the operations."""
    ops = {}
    for op in G.theory.ops:
        restricted = G.ops[op.name] @ block_diag(G.field, [monos[s] for s in op.domain])
        try:
            ops[op.name] = solve_right(monos[op.codomain], restricted)
        except NoSolution:
            raise AssertionError(f"subspaces are not closed under {op.name}") from None
    return Model(G.theory, G.field, {s: m.ncols for s, m in monos.items()}, ops)


def _induce_quotient(G: Model, epis: Mapping[str, Matrix]) -> Model:
    """Operations on quotients ``epis[s] : G(s) -> Q(s)`` compatible with the operations."""
    ops = {}
    for op in G.theory.ops:
        dom = block_diag(G.field, [epis[s] for s in op.domain])
        target = epis[op.codomain] @ G.ops[op.name]
        try:
            ops[op.name] = solve_right(dom.T, target.T).T
        except NoSolution:
            raise AssertionError(f"quotient is not compatible with {op.name}") from None
    return Model(G.theory, G.field, {s: m.nrows for s, m in epis.items()}, ops)


def kernel_model(phi: ModelMorphism) -> KernelResult:
    incl = {s: kernel_basis(m).basis for s, m in phi.components.items()}
    sub = _induce_sub(phi.source, incl)
    return KernelResult(sub, ModelMorphism(sub, phi.source, incl))


def cokernel_model(phi: ModelMorphism) -> tuple[Model, ModelMorphism]:
    proj = {s: cokernel_projection(m) for s, m in phi.components.items()}
    quot = _induce_quotient(phi.target, proj)
    return quot, ModelMorphism(phi.target, quot, proj)


def image_factorization(phi: ModelMorphism) -> tuple[ModelMorphism, ModelMorphism]:
    """``(epi, mono)`` with ``mono.compose(epi) == phi``."""
    parts = {s: epi_mono_factorization(m) for s, m in phi.components.items()}
    monos = {s: p[1] for s, p in parts.items()}
    middle = _induce_sub(phi.target, monos)
    epi = ModelMorphism(phi.source, middle, {s: p[0] for s, p in parts.items()})
    return epi, ModelMorphism(middle, phi.target, monos)


def factor_through_mono(mono: ModelMorphism, psi: ModelMorphism) -> ModelMorphism:
    """The unique ``u`` with ``mono.compose(u) == psi``; raises NoSolution if none exists."""
    comps = {s: solve_right(mono.components[s], psi.components[s]) for s in psi.theory.sorts}
    return ModelMorphism(psi.source, mono.source, comps)


def factor_through_epi(epi: ModelMorphism, psi: ModelMorphism) -> ModelMorphism:
    """The unique ``u`` with ``u.compose(epi) == psi``; raises NoSolution if none exists."""
    comps = {s: solve_right(epi.components[s].T, psi.components[s].T).T for s in psi.theory.sorts}
    return ModelMorphism(epi.target, psi.target, comps)


@dataclass
class DirectSum:
    model: Model
    injections: list
    projections: list


def direct_sum(models: Sequence[Model] | Model, *more: Model) -> DirectSum:
    """Direct sum with its injections and projections.

    Accepts either a sequence of models or the summands as positional arguments.
    """
    summands = list(models) if isinstance(models, (list, tuple)) else [models, *more]
    if not summands:
        raise ModelError("direct sum of nothing: pass at least one model")
    first = summands[0]
    for m in summands[1:]:
        first.same_kind(m)
    f, theory = first.field, first.theory
    carrier = {s: sum(m.carrier[s] for m in summands) for s in theory.sorts}
    ops = {}
    for op in theory.ops:
        # the sum's domain is ordered argument-major, then summand
        col_offset = {}
        off = 0
        for k, s in enumerate(op.domain):
            for mi, m in enumerate(summands):
                col_offset[(k, mi)] = off
                off += m.carrier[s]
        rows = [[f.zero] * off for _ in range(carrier[op.codomain])]
        r0 = 0
        for mi, m in enumerate(summands):
            mat = m.ops[op.name]
            c_local = 0
            for k, s in enumerate(op.domain):
                width = m.carrier[s]
                c0 = col_offset[(k, mi)]
                for i in range(mat.nrows):
                    rows[r0 + i][c0 : c0 + width] = mat.rows[i][c_local : c_local + width]
                c_local += width
            r0 += mat.nrows
        ops[op.name] = Matrix(f, carrier[op.codomain], off, tuple(tuple(r) for r in rows))
    total = Model(theory, f, carrier, ops)
    per_sort = {s: biproduct(f, [m.carrier[s] for m in summands]) for s in theory.sorts}
    injections = [
        ModelMorphism(m, total, {s: per_sort[s][0][i] for s in theory.sorts}) for i, m in enumerate(summands)
    ]
    projections = [
        ModelMorphism(total, m, {s: per_sort[s][1][i] for s in theory.sorts}) for i, m in enumerate(summands)
    ]
    return DirectSum(total, injections, projections)


def morphism_sum(phis: Sequence[ModelMorphism]) -> ModelMorphism:
    out = phis[0]
    for p in phis[1:]:
        out = out + p
    return out


def conjugate(model: Model, changes: Mapping[str, Matrix]) -> tuple[Model, ModelMorphism]:
    """Transport ``model`` along invertible per-sort base changes; returns the new model and the isomorphism."""
    f = model.field
    inverses = {s: m.inverse() for s, m in changes.items()}
    ops = {
        op.name: changes[op.codomain] @ model.ops[op.name] @ block_diag(f, [inverses[s] for s in op.domain])
        for op in model.theory.ops
    }
    new = Model(model.theory, f, dict(model.carrier), ops)
    return new, ModelMorphism(model, new, dict(changes))


# the underlying-family functor


@dataclass(frozen=True)
class IndexedFamily:
    """A finite family of spaces indexed by words; ``dims`` maps word -> dimension."""

    index: tuple
    dims: Mapping

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(tuple(w) for w in self.index))
        if len(set(self.index)) != len(self.index):
            raise ModelError("index words must be distinct")
        d = {tuple(w): int(v) for w, v in self.dims.items()}
        for w in self.index:
            d.setdefault(w, 0)
        if set(d) != set(self.index):
            raise ModelError("dimension given for a word outside the index")
        object.__setattr__(self, "dims", d)

    def covers_sorts(self, theory: TheoryPresentation) -> bool:
        return all((s,) in self.index for s in theory.sorts)


def sorts_index(theory: TheoryPresentation) -> tuple:
    return tuple((s,) for s in theory.sorts)


def check_index(theory: TheoryPresentation, index: Sequence[Sequence[str]]) -> tuple:
    out = []
    for w in index:
        out.append(theory.check_word(w))
    if len(set(out)) != len(out):
        raise ModelError("index words must be distinct")
    return tuple(out)


def value_on_word(model: Model, word: Sequence[str]) -> tuple[int, list[Matrix]]:
    word = model.theory.check_word(word)
    dims = [model.carrier[s] for s in word]
    _, projections = biproduct(model.field, dims)
    return sum(dims), projections


def forget(model: Model, index: Sequence[Sequence[str]]) -> IndexedFamily:
    index = check_index(model.theory, index)
    return IndexedFamily(index, {w: model.dim(w) for w in index})


def forget_morphism(phi: ModelMorphism, index: Sequence[Sequence[str]]) -> dict:
    index = check_index(phi.theory, index)
    return {w: phi.on_word(w) for w in index}
