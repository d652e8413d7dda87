"""Extensions of models and relative Ext.

An extension ``0 -> F -> E -> G -> 0`` that splits on underlying spaces can be
written with ``E(s) = F(s) (+) G(s)`` and every operation block upper
triangular::

    op_E = [[op_F, c_op],
            [0,    op_G]]

The equations of the theory are linear conditions on the off-diagonal blocks
``c`` (cocycles); changing the splitting by ``h : G -> F`` adds a coboundary.
``Ext^1(G, F)`` is cocycles modulo coboundaries.  Higher degrees come from a
cofree coresolution of ``F`` and the cohomology of ``Hom(G, -)`` applied to it;
in degree one both routes must give the same dimension.

Convention: ``ext1(G, F)`` and ``ext_n(G, F, n)`` both classify extensions of
``G`` by ``F`` (``F`` is the sub-model, ``G`` the quotient).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .homfin import DEFAULT_DEPTH_BOUND, CofreeModel, adjunction_transpose, adjunction_untranspose, unit
from .linalg import (
    Matrix,
    NoSolution,
    block_diag,
    complement_basis,
    hstack,
    kernel_basis,
    solve_right,
)
from .models import (
    Model,
    ModelError,
    ModelMorphism,
    cokernel_model,
    eval_combination,
    sorts_index,
)


class CocycleError(ModelError):
    pass


def _layout(G: Model, F: Model) -> list[tuple[str, int, int, int]]:
    """``(op, offset, rows, cols)`` of each off-diagonal block in a flat cocycle vector."""
    out = []
    off = 0
    for op in F.theory.ops:
        r, c = F.carrier[op.codomain], G.dim(op.domain)
        out.append((op.name, off, r, c))
        off += r * c
    return out


@dataclass(frozen=True, eq=False)
class Cocycle:
    """Off-diagonal operation blocks of an extension of ``G`` by ``F``."""

    F: Model
    G: Model
    c: Mapping[str, Matrix]

    def __post_init__(self):
        self.F.same_kind(self.G)
        blocks = {}
        for name, _, r, cols in _layout(self.G, self.F):
            m = self.c.get(name)
            if m is None:
                m = Matrix.zeros(self.F.field, r, cols)
            if m.shape != (r, cols):
                raise CocycleError(f"block for {name} should be {r}x{cols}, got {m.nrows}x{m.ncols}")
            blocks[name] = m
        object.__setattr__(self, "c", blocks)

    @classmethod
    def from_flat(cls, G: Model, F: Model, vec: Sequence) -> Cocycle:
        blocks = {}
        for name, off, r, cols in _layout(G, F):
            blocks[name] = Matrix.from_flat(F.field, r, cols, list(vec[off : off + r * cols]))
        return cls(F, G, blocks)

    @classmethod
    def zero(cls, G: Model, F: Model) -> Cocycle:
        return cls(F, G, {})

    def flat(self) -> list:
        return [x for op in self.F.theory.ops for x in self.c[op.name].flatten()]

    def _check_pair(self, other: Cocycle):
        if self.F != other.F or self.G != other.G:
            raise CocycleError("cocycles belong to different model pairs")

    def __add__(self, other: Cocycle) -> Cocycle:
        self._check_pair(other)
        return Cocycle(self.F, self.G, {k: self.c[k] + other.c[k] for k in self.c})

    def __sub__(self, other: Cocycle) -> Cocycle:
        self._check_pair(other)
        return Cocycle(self.F, self.G, {k: self.c[k] - other.c[k] for k in self.c})

    def scale(self, k) -> Cocycle:
        return Cocycle(self.F, self.G, {n: m.scale(k) for n, m in self.c.items()})

    def __neg__(self) -> Cocycle:
        return self.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, Cocycle):
            return NotImplemented
        return self.F == other.F and self.G == other.G and self.c == other.c

    __hash__ = None


def _extension_ops(F: Model, G: Model, c: Mapping[str, Matrix]) -> dict:
    """Operation matrices of ``E(s) = F(s) (+) G(s)`` (F first) with blocks ``c``."""
    f = F.field
    ops = {}
    for op in F.theory.ops:
        rows_f, rows_g = F.carrier[op.codomain], G.carrier[op.codomain]
        width = sum(F.carrier[s] + G.carrier[s] for s in op.domain)
        out = [[f.zero] * width for _ in range(rows_f + rows_g)]
        col = 0
        cf = cg = 0  # running column offsets inside op_F / c (and op_G)
        mf, mg, mc = F.ops[op.name], G.ops[op.name], c[op.name]
        for s in op.domain:
            df, dg = F.carrier[s], G.carrier[s]
            for i in range(rows_f):
                out[i][col : col + df] = mf.rows[i][cf : cf + df]
                out[i][col + df : col + df + dg] = mc.rows[i][cg : cg + dg]
            for i in range(rows_g):
                out[rows_f + i][col + df : col + df + dg] = mg.rows[i][cg : cg + dg]
            col += df + dg
            cf += df
            cg += dg
        ops[op.name] = Matrix(f, rows_f + rows_g, width, tuple(tuple(r) for r in out))
    return ops


def _extension_model(z: Cocycle) -> Model:
    F, G = z.F, z.G
    return Model(F.theory, F.field, {s: F.carrier[s] + G.carrier[s] for s in F.theory.sorts}, _extension_ops(F, G, z.c))


def _off_diagonal_defects(z: Cocycle) -> list:
    """Flat off-diagonal block of ``lhs - rhs`` for every equation, evaluated in the block model."""
    E = _extension_model(z)
    F, G = z.F, z.G
    out = []
    for eq in F.theory.equations:
        diff = eval_combination(eq.lhs, E) - eval_combination(eq.rhs, E)
        rows = range(F.carrier[eq.sort])
        cols = []
        off = 0
        for s in eq.context:
            cols.extend(range(off + F.carrier[s], off + F.carrier[s] + G.carrier[s]))
            off += F.carrier[s] + G.carrier[s]
        out.extend(diff.submatrix(rows, cols).flatten())
    return out


def cocycle_constraints(G: Model, F: Model) -> Matrix:
    """Matrix of the (linear) cocycle conditions on flat cocycle vectors.

    The off-diagonal block of a product of block-triangular matrices is
    linear in the off-diagonal inputs, so the conditions are read off column
    by column from unit cocycles.
    """
    F.same_kind(G)
    f = F.field
    n = sum(r * c for _, _, r, c in _layout(G, F))
    cols = []
    for j in range(n):
        e = [f.zero] * n
        e[j] = f.one
        cols.append(_off_diagonal_defects(Cocycle.from_flat(G, F, e)))
    m = len(_off_diagonal_defects(Cocycle.zero(G, F)))
    return Matrix(f, m, n, tuple(tuple(col[i] for col in cols) for i in range(m)))


def is_cocycle(z: Cocycle) -> bool:
    return all(x == z.F.field.zero for x in _off_diagonal_defects(z))


def cocycle_space(G: Model, F: Model) -> list[Cocycle]:
    basis = kernel_basis(cocycle_constraints(G, F)).basis
    return [Cocycle.from_flat(G, F, [r[j] for r in basis.rows]) for j in range(basis.ncols)]


def coboundary(G: Model, F: Model, h: Mapping[str, Matrix]) -> Cocycle:
    """``delta(h)_op = op_F . diag(h over the domain) - h_codomain . op_G`` for ``h_s : G(s) -> F(s)``."""
    f = F.field
    c = {}
    for op in F.theory.ops:
        c[op.name] = F.ops[op.name] @ block_diag(f, [h[s] for s in op.domain]) - h[op.codomain] @ G.ops[op.name]
    return Cocycle(F, G, c)


def _h_layout(G: Model, F: Model) -> list[tuple[str, int, int, int]]:
    out, off = [], 0
    for s in F.theory.sorts:
        out.append((s, off, F.carrier[s], G.carrier[s]))
        off += F.carrier[s] * G.carrier[s]
    return out


def coboundary_map(G: Model, F: Model) -> Matrix:
    """Matrix of ``delta`` from flat ``h`` vectors to flat cocycle vectors."""
    f = F.field
    lay = _h_layout(G, F)
    n = sum(r * c for _, _, r, c in lay)
    cols = []
    for j in range(n):
        h = {}
        for s, off, r, c in lay:
            h[s] = Matrix.from_flat(f, r, c, [f.one if off + k == j else f.zero for k in range(r * c)])
        cols.append(coboundary(G, F, h).flat())
    m = len(Cocycle.zero(G, F).flat())
    return Matrix(f, m, n, tuple(tuple(col[i] for col in cols) for i in range(m)))


def coboundary_space(G: Model, F: Model) -> list[Cocycle]:
    """Basis of the coboundaries (canonical: pivot columns of the RREF-reduced image)."""
    delta = coboundary_map(G, F)
    red, pivots = delta.T.rref()
    return [Cocycle.from_flat(G, F, list(red.rows[i])) for i in range(len(pivots))]


@dataclass
class ExtGroup:
    n: int
    F: Model
    G: Model
    dimension: int
    representatives: list = field(default_factory=list)
    method: str = "cocycle"
    cocycle_basis: list = field(default_factory=list)
    coboundary_basis: list = field(default_factory=list)

    def class_of(self, z: Cocycle) -> list:
        """Coordinates of the class of ``z`` in the representatives (degree one, cocycle method)."""
        if self.method != "cocycle":
            raise ValueError("class coordinates are only available for the cocycle description")
        f = self.F.field
        vecs = [r.flat() for r in self.representatives] + [b.flat() for b in self.coboundary_basis]
        n = len(z.flat())
        mat = Matrix(f, n, len(vecs), tuple(tuple(v[i] for v in vecs) for i in range(n))) if vecs else Matrix.zeros(f, n, 0)
        try:
            x = solve_right(mat, Matrix.column(f, z.flat()))
        except NoSolution:
            raise CocycleError("not a cocycle") from None
        return [x.rows[i][0] for i in range(len(self.representatives))]

    def same_class(self, z1: Cocycle, z2: Cocycle) -> bool:
        return is_coboundary(z1 - z2)


def is_coboundary(z: Cocycle) -> bool:
    f = z.F.field
    try:
        solve_right(coboundary_map(z.G, z.F), Matrix.column(f, z.flat()))
    except NoSolution:
        return False
    return True


def ext1(G: Model, F: Model) -> ExtGroup:
    """Extensions of ``G`` by ``F`` up to equivalence, as cocycles modulo coboundaries."""
    Z = cocycle_space(G, F)
    B = coboundary_space(G, F)
    f = F.field
    n = len(Cocycle.zero(G, F).flat())
    reps = complement_basis(f, n, [b.flat() for b in B], [z.flat() for z in Z])
    return ExtGroup(
        1,
        F,
        G,
        len(Z) - len(B),
        [Cocycle.from_flat(G, F, v) for v in reps],
        "cocycle",
        Z,
        B,
    )


@dataclass
class Extension:
    E: Model
    inclusion: ModelMorphism  # F -> E
    projection: ModelMorphism  # E -> G


def build_extension(z: Cocycle) -> Extension:
    if not is_cocycle(z):
        raise CocycleError("the blocks do not satisfy the cocycle conditions")
    F, G, f = z.F, z.G, z.F.field
    E = _extension_model(z)
    inc = {}
    proj = {}
    for s in F.theory.sorts:
        df, dg = F.carrier[s], G.carrier[s]
        eye = Matrix.identity(f, df + dg)
        inc[s] = eye.submatrix(range(df + dg), range(df))
        proj[s] = eye.submatrix(range(df, df + dg), range(df + dg))
    return Extension(E, ModelMorphism(F, E, inc), ModelMorphism(E, G, proj))


def extension_class(inclusion: ModelMorphism, projection: ModelMorphism) -> tuple[Cocycle, ModelMorphism]:
    """Cocycle of a short exact sequence ``F -> E -> G`` and an isomorphism from
    the block model of that cocycle to ``E`` compatible with both maps."""
    F, E, G = inclusion.source, inclusion.target, projection.target
    f = F.field
    if not projection.compose(inclusion).is_zero():
        raise ModelError("the composite F -> E -> G is not zero")
    sections, retractions, frames = {}, {}, {}
    for s in F.theory.sorts:
        i, p = inclusion.components[s], projection.components[s]
        if i.rank() != i.ncols or p.rank() != p.nrows or i.ncols + p.nrows != E.carrier[s]:
            raise ModelError(f"the sequence is not short exact at sort {s}")
        sec = solve_right(p, Matrix.identity(f, G.carrier[s]))
        frame = hstack(f, [i, sec])
        inv = frame.inverse()
        sections[s] = sec
        retractions[s] = inv.submatrix(range(F.carrier[s]), range(E.carrier[s]))
        frames[s] = frame
    c = {}
    for op in F.theory.ops:
        c[op.name] = retractions[op.codomain] @ E.ops[op.name] @ block_diag(f, [sections[s] for s in op.domain])
    z = Cocycle(F, G, c)
    block = _extension_model(z)
    return z, ModelMorphism(block, E, frames)


def baer_sum(z1: Cocycle, z2: Cocycle) -> Cocycle:
    return z1 + z2


def ext_pullback(z: Cocycle, gamma: ModelMorphism) -> Cocycle:
    """Pull an extension of ``G`` back along ``gamma : G' -> G``."""
    if gamma.target != z.G:
        raise CocycleError("gamma must end at the quotient model of the extension")
    f = z.F.field
    c = {op.name: z.c[op.name] @ block_diag(f, [gamma.components[s] for s in op.domain]) for op in z.F.theory.ops}
    return Cocycle(z.F, gamma.source, c)


def ext_pushout(z: Cocycle, phi: ModelMorphism) -> Cocycle:
    """Push an extension by ``F`` out along ``phi : F -> F'``."""
    if phi.source != z.F:
        raise CocycleError("phi must start at the sub-model of the extension")
    c = {op.name: phi.components[op.codomain] @ z.c[op.name] for op in z.F.theory.ops}
    return Cocycle(phi.target, z.G, c)


# coresolutions


@dataclass
class Coresolution:
    start: Model
    objects: list  # CofreeModel per stage
    maps: list  # ModelMorphism objects[i] -> objects[i+1]
    augmentation: ModelMorphism
    index: tuple

    def models(self) -> list[Model]:
        return [c.model for c in self.objects]

    def exactness_failures(self) -> list[str]:
        """Empty when ``0 -> start -> beta^0 -> beta^1 -> ...`` is exact at every computed stage."""
        bad = []
        chain = [self.augmentation] + list(self.maps)
        if not self.augmentation.is_mono():
            bad.append("augmentation is not a monomorphism")
        for i in range(1, len(chain)):
            prev, nxt = chain[i - 1], chain[i]
            if not nxt.compose(prev).is_zero():
                bad.append(f"composite into stage {i} is not zero")
                continue
            for s, m in nxt.components.items():
                if m.ncols - m.rank() != prev.components[s].rank():
                    bad.append(f"not exact at stage {i - 1}, sort {s}")
        return bad


def coresolve(
    F: Model,
    length: int,
    index: Sequence[Sequence[str]] | None = None,
    depth_bound: int = DEFAULT_DEPTH_BOUND,
) -> Coresolution:
    """Cofree coresolution ``F -> beta^0 -> ... -> beta^length``."""
    if length < 0:
        raise ValueError("length must be non-negative")
    index = tuple(tuple(w) for w in index) if index is not None else sorts_index(F.theory)
    beta0, aug = unit(F, index, depth_bound)
    objects, maps = [beta0], []
    prev = aug
    for _ in range(length):
        quotient, proj = cokernel_model(prev)
        nxt, eta = unit(quotient, index, depth_bound)
        d = eta.compose(proj)
        objects.append(nxt)
        maps.append(d)
        prev = d
    return Coresolution(F, objects, maps, aug, index)


def _cofree_hom_basis(G: Model, cofree: CofreeModel) -> list[ModelMorphism]:
    """Basis of ``Hom(G, R(W))``: transposes of the elementary word-wise maps ``G(w) -> W_w``."""
    f = G.field
    W = cofree.base
    out = []
    for w in W.index:
        for i in range(W.dims[w]):
            for j in range(G.dim(w)):
                maps = {v: Matrix.zeros(f, W.dims[v], G.dim(v)) for v in W.index}
                rows = [list(r) for r in maps[w].rows]
                rows[i][j] = f.one
                maps[w] = Matrix(f, W.dims[w], G.dim(w), tuple(tuple(r) for r in rows))
                out.append(adjunction_transpose(G, cofree, maps))
    return out


def _cofree_coordinates(cofree: CofreeModel, psi: ModelMorphism) -> list:
    maps = adjunction_untranspose(cofree, psi)
    return [x for w in cofree.base.index for x in maps[w].flatten()]


def _postcompose_matrix(G: Model, d: ModelMorphism, src_basis: list, target: CofreeModel) -> Matrix:
    """Matrix of ``psi -> d . psi`` in the elementary bases of the two cofree hom-spaces."""
    n = sum(target.base.dims[w] * G.dim(w) for w in target.base.index)
    cols = [_cofree_coordinates(target, d.compose(psi)) for psi in src_basis]
    return Matrix(d.field, n, len(cols), tuple(tuple(c[i] for c in cols) for i in range(n)))


def ext_n(
    G: Model,
    F: Model,
    n: int,
    index: Sequence[Sequence[str]] | None = None,
    depth_bound: int = DEFAULT_DEPTH_BOUND,
    coresolution: Coresolution | None = None,
) -> ExtGroup:
    """``H^n`` of ``Hom(G, beta^*)`` for a cofree coresolution ``beta^*`` of ``F``."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    G.same_kind(F)
    res = coresolution or coresolve(F, n + 1, index, depth_bound)
    if len(res.maps) < n + 1:
        raise ValueError(f"coresolution too short for degree {n}")
    # Hom(G, R(W)) = Hom(forget(G), W), so each cochain group has an elementary basis
    homs = [_cofree_hom_basis(G, res.objects[i]) for i in range(n + 1)]
    d_out = _postcompose_matrix(G, res.maps[n], homs[n], res.objects[n + 1])
    ker = kernel_basis(d_out).basis
    if n > 0:
        d_in = _postcompose_matrix(G, res.maps[n - 1], homs[n - 1], res.objects[n])
        img_rank = d_in.rank()
        img_cols = [[d_in.rows[i][j] for i in range(d_in.nrows)] for j in range(d_in.ncols)]
    else:
        img_rank, img_cols = 0, []
    dim = ker.ncols - img_rank
    f = F.field
    ker_cols = [[ker.rows[i][j] for i in range(ker.nrows)] for j in range(ker.ncols)]
    reps_coords = complement_basis(f, len(homs[n]), img_cols, ker_cols)
    reps = []
    for coords in reps_coords:
        acc = None
        for c, b in zip(coords, homs[n]):
            term = b.scale(c)
            acc = term if acc is None else acc + term
        reps.append(acc)
    return ExtGroup(n, F, G, dim, reps, "coresolution")
