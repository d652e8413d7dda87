"""Exact dense linear algebra over the rationals and prime fields.

Matrices act on column vectors, so ``a @ b`` means "apply ``b`` first, then
``a``".  Every basis-producing routine goes through the reduced row echelon
form, which is unique, so outputs do not depend on pivoting choices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class LinAlgError(Exception):
    pass


class ShapeError(LinAlgError):
    pass


class NoSolution(LinAlgError):
    """Raised by :func:`solve_right` when the right-hand side is not in the column space."""


class Field:
    name: str

    def __call__(self, value) -> object:
        raise NotImplementedError

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def parse(self, text) -> object:
        raise NotImplementedError

    def format(self, value) -> object:
        raise NotImplementedError

    def random_element(self, rng: random.Random, bound: int = 3):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Field) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return self.name


class Rationals(Field):
    name = "Q"

    def __call__(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            raise TypeError("floats are not exact; pass ints, Fractions or strings")
        return Fraction(value)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("division by zero in Q")
        return 1 / a

    def parse(self, text):
        if isinstance(text, int):
            return Fraction(text)
        return Fraction(str(text).strip())

    def format(self, value):
        return f"{value.numerator}/{value.denominator}"

    def random_element(self, rng, bound=3):
        num = rng.randint(-bound, bound)
        den = rng.choice([1, 1, 1, 2, 3])
        return Fraction(num, den)


class PrimeField(Field):
    def __init__(self, p: int):
        if p < 2 or p >= 2**31 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not a prime below 2^31")
        self.p = p
        self.name = f"Fp:{p}"

    def __call__(self, value):
        if isinstance(value, Fraction):
            return self.mul(value.numerator % self.p, self.inv(value.denominator % self.p))
        if isinstance(value, float):
            raise TypeError("floats are not exact")
        return int(value) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError(f"division by zero in F_{self.p}")
        return pow(a, self.p - 2, self.p)

    def parse(self, text):
        if isinstance(text, int):
            return text % self.p
        text = str(text).strip()
        if "/" in text:
            return self(Fraction(text))
        return int(text) % self.p

    def format(self, value):
        return value

    def random_element(self, rng, bound=3):
        return rng.randrange(self.p)


QQ = Rationals()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


def field_from_tag(tag: str) -> Field:
    """Parse ``"Q"`` or ``"Fp:<p>"`` (case-insensitive)."""
    t = tag.strip()
    if t.upper() in ("Q", "QQ"):
        return QQ
    if t.lower().startswith("fp:"):
        return PrimeField(int(t[3:]))
    raise ValueError(f"unknown field tag {tag!r}; expected 'Q' or 'Fp:<p>'")


@dataclass(frozen=True, eq=False)
class Matrix:
    field: Field
    nrows: int
    ncols: int
    rows: tuple

    def __post_init__(self):
        if len(self.rows) != self.nrows or any(len(r) != self.ncols for r in self.rows):
            raise ShapeError(f"entry count does not match shape {self.nrows}x{self.ncols}")

    # construction

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], ncols: int | None = None) -> Matrix:
        rows = [tuple(field(x) for x in r) for r in rows]
        if ncols is None:
            if not rows:
                raise ShapeError("cannot infer column count of an empty row list")
            ncols = len(rows[0])
        return cls(field, len(rows), ncols, tuple(rows))

    @classmethod
    def zeros(cls, field: Field, nrows: int, ncols: int) -> Matrix:
        z = field.zero
        return cls(field, nrows, ncols, tuple((z,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, field: Field, n: int) -> Matrix:
        z, o = field.zero, field.one
        return cls(field, n, n, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def column(cls, field: Field, entries: Sequence) -> Matrix:
        return cls(field, len(entries), 1, tuple((field(x),) for x in entries))

    @classmethod
    def random(cls, field: Field, nrows: int, ncols: int, rng: random.Random, bound: int = 3) -> Matrix:
        return cls(
            field,
            nrows,
            ncols,
            tuple(tuple(field.random_element(rng, bound) for _ in range(ncols)) for _ in range(nrows)),
        )

    @classmethod
    def random_invertible(cls, field: Field, n: int, rng: random.Random) -> Matrix:
        while True:
            m = cls.random(field, n, n, rng)
            if m.rank() == n:
                return m

    # basic structure

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.field == other.field and self.rows == other.rows

    def __hash__(self):
        return hash((self.field, self.shape, self.rows))

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self.rows)
        return f"Matrix<{self.field}>({self.nrows}x{self.ncols})[{body}]"

    def _check_same(self, other: Matrix):
        if self.field != other.field:
            raise ShapeError(f"field mismatch: {self.field} vs {other.field}")
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: Matrix) -> Matrix:
        self._check_same(other)
        add = self.field.add
        return Matrix(
            self.field,
            self.nrows,
            self.ncols,
            tuple(tuple(add(a, b) for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
        )

    def __sub__(self, other: Matrix) -> Matrix:
        self._check_same(other)
        sub = self.field.sub
        return Matrix(
            self.field,
            self.nrows,
            self.ncols,
            tuple(tuple(sub(a, b) for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
        )

    def __neg__(self) -> Matrix:
        return self.scale(self.field.neg(self.field.one))

    def scale(self, c) -> Matrix:
        c = self.field(c)
        mul = self.field.mul
        return Matrix(self.field, self.nrows, self.ncols, tuple(tuple(mul(c, a) for a in r) for r in self.rows))

    def __matmul__(self, other: Matrix) -> Matrix:
        if self.field != other.field:
            raise ShapeError(f"field mismatch: {self.field} vs {other.field}")
        if self.ncols != other.nrows:
            raise ShapeError(f"cannot compose {self.shape} after {other.shape}")
        f = self.field
        n = other.ncols
        brows = other.rows
        # row-times-matrix with zero entries skipped: most matrices here are sparse
        out = []
        for r in self.rows:
            acc = [0] * n
            for a, brow in zip(r, brows):
                if a:
                    for j, b in enumerate(brow):
                        if b:
                            acc[j] += a * b
            if isinstance(f, PrimeField):
                out.append(tuple(x % f.p for x in acc))
            else:
                out.append(tuple(x if type(x) is Fraction else Fraction(x) for x in acc))
        return Matrix(f, self.nrows, n, tuple(out))

    @property
    def T(self) -> Matrix:
        if not self.nrows:
            return Matrix(self.field, self.ncols, 0, ((),) * self.ncols)
        return Matrix(self.field, self.ncols, self.nrows, tuple(zip(*self.rows)))

    def is_zero(self) -> bool:
        z = self.field.zero
        return all(x == z for r in self.rows for x in r)

    def submatrix(self, rows: Iterable[int] | slice, cols: Iterable[int] | slice) -> Matrix:
        ri = range(self.nrows)[rows] if isinstance(rows, slice) else list(rows)
        ci = range(self.ncols)[cols] if isinstance(cols, slice) else list(cols)
        return Matrix(self.field, len(ri), len(ci), tuple(tuple(self.rows[i][j] for j in ci) for i in ri))

    def flatten(self) -> list:
        return [x for r in self.rows for x in r]

    @classmethod
    def from_flat(cls, field: Field, nrows: int, ncols: int, entries: Sequence) -> Matrix:
        if len(entries) != nrows * ncols:
            raise ShapeError("entry count does not match shape")
        return cls(field, nrows, ncols, tuple(tuple(entries[i * ncols : (i + 1) * ncols]) for i in range(nrows)))

    def inverse(self) -> Matrix:
        if self.nrows != self.ncols:
            raise ShapeError("only square matrices are invertible")
        return solve_right(self, Matrix.identity(self.field, self.nrows))

    # elimination

    def rref(self) -> tuple[Matrix, tuple[int, ...]]:
        rows, pivots = _rref_lists(self.field, [list(r) for r in self.rows], self.ncols)
        return Matrix(self.field, self.nrows, self.ncols, tuple(tuple(r) for r in rows)), pivots

    def rank(self) -> int:
        return len(_rref_lists(self.field, [list(r) for r in self.rows], self.ncols)[1])

    def to_literal(self) -> list[list]:
        fmt = self.field.format
        return [[fmt(x) for x in r] for r in self.rows]


def _rref_lists(field: Field, rows: list[list], ncols: int) -> tuple[list[list], tuple[int, ...]]:
    """In-place reduced row echelon form; returns (rows, pivot columns)."""
    nrows = len(rows)
    pivots = []
    r = 0
    if isinstance(field, PrimeField):
        p = field.p
        for c in range(ncols):
            if r == nrows:
                break
            piv = next((i for i in range(r, nrows) if rows[i][c] % p), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = pow(rows[r][c], p - 2, p)
            rows[r] = [(x * inv) % p for x in rows[r]]
            pr = rows[r]
            for i in range(nrows):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [(x - f * y) % p for x, y in zip(rows[i], pr)]
            pivots.append(c)
            r += 1
    else:
        for c in range(ncols):
            if r == nrows:
                break
            piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = 1 / rows[r][c]
            rows[r] = [x * inv for x in rows[r]]
            pr = rows[r]
            for i in range(nrows):
                if i != r and rows[i][c] != 0:
                    f = rows[i][c]
                    rows[i] = [x - f * y for x, y in zip(rows[i], pr)]
            pivots.append(c)
            r += 1
    return rows, tuple(pivots)


@dataclass(frozen=True)
class Subspace:
    """A subspace of ``field^ambient_dim`` given by independent basis columns."""

    ambient_dim: int
    basis: Matrix

    def __post_init__(self):
        if self.basis.nrows != self.ambient_dim:
            raise ShapeError("basis rows must equal the ambient dimension")
        if self.basis.rank() != self.basis.ncols:
            raise LinAlgError("basis columns are not independent")

    @property
    def dim(self) -> int:
        return self.basis.ncols

    def contains(self, v: Matrix) -> bool:
        try:
            solve_right(self.basis, v)
        except NoSolution:
            return False
        return True


def kernel_basis(m: Matrix) -> Subspace:
    """Null space of ``m``; one basis vector per free column of the RREF."""
    f = m.field
    red, pivots = m.rref()
    pivset = set(pivots)
    free = [c for c in range(m.ncols) if c not in pivset]
    cols = []
    for fc in free:
        v = [f.zero] * m.ncols
        v[fc] = f.one
        for i, pc in enumerate(pivots):
            v[pc] = f.neg(red.rows[i][fc])
        cols.append(v)
    basis = Matrix(f, m.ncols, len(cols), tuple(tuple(c[i] for c in cols) for i in range(m.ncols)))
    return Subspace(m.ncols, basis)


def cokernel_projection(m: Matrix) -> Matrix:
    """A surjection ``q`` with ``q @ m == 0`` through which every such map factors."""
    return kernel_basis(m.T).basis.T


def column_space(m: Matrix) -> Matrix:
    """Independent columns of ``m`` (the pivot columns) spanning its image."""
    _, pivots = m.rref()
    return m.submatrix(range(m.nrows), pivots)


def epi_mono_factorization(m: Matrix) -> tuple[Matrix, Matrix]:
    """Return ``(epi, mono)`` with ``mono @ epi == m`` through a space of dimension ``rank(m)``."""
    red, pivots = m.rref()
    mono = m.submatrix(range(m.nrows), pivots)
    epi = red.submatrix(range(len(pivots)), range(m.ncols))
    return epi, mono


def solve_right(a: Matrix, b: Matrix) -> Matrix:
    """Canonical ``x`` with ``a @ x == b``: free variables are set to zero."""
    if a.field != b.field:
        raise ShapeError("field mismatch")
    if a.nrows != b.nrows:
        raise ShapeError(f"row mismatch: {a.shape} vs {b.shape}")
    f = a.field
    aug = [list(ra) + list(rb) for ra, rb in zip(a.rows, b.rows)]
    rows, pivots = _rref_lists(f, aug, a.ncols + b.ncols)
    if pivots and pivots[-1] >= a.ncols:
        raise NoSolution("right-hand side is outside the column space")
    x = [[f.zero] * b.ncols for _ in range(a.ncols)]
    for i, pc in enumerate(pivots):
        x[pc] = rows[i][a.ncols :]
    return Matrix(f, a.ncols, b.ncols, tuple(tuple(r) for r in x))


def hstack(field: Field, mats: Sequence[Matrix], nrows: int | None = None) -> Matrix:
    if not mats:
        if nrows is None:
            raise ShapeError("empty hstack needs an explicit row count")
        return Matrix.zeros(field, nrows, 0)
    n = mats[0].nrows
    if any(m.nrows != n for m in mats):
        raise ShapeError("hstack row mismatch")
    rows = tuple(sum((m.rows[i] for m in mats), ()) for i in range(n))
    return Matrix(field, n, sum(m.ncols for m in mats), rows)


def vstack(field: Field, mats: Sequence[Matrix], ncols: int | None = None) -> Matrix:
    if not mats:
        if ncols is None:
            raise ShapeError("empty vstack needs an explicit column count")
        return Matrix.zeros(field, 0, ncols)
    n = mats[0].ncols
    if any(m.ncols != n for m in mats):
        raise ShapeError("vstack column mismatch")
    return Matrix(field, sum(m.nrows for m in mats), n, tuple(r for m in mats for r in m.rows))


def block_diag(field: Field, mats: Sequence[Matrix]) -> Matrix:
    nr = sum(m.nrows for m in mats)
    nc = sum(m.ncols for m in mats)
    out = [[field.zero] * nc for _ in range(nr)]
    r0 = c0 = 0
    for m in mats:
        for i, row in enumerate(m.rows):
            out[r0 + i][c0 : c0 + m.ncols] = row
        r0 += m.nrows
        c0 += m.ncols
    return Matrix(field, nr, nc, tuple(tuple(r) for r in out))


def biproduct(field: Field, dims: Sequence[int]) -> tuple[list[Matrix], list[Matrix]]:
    """Block injections and projections of ``field^d1 (+) ... (+) field^dn``."""
    total = sum(dims)
    injections, projections = [], []
    offset = 0
    for d in dims:
        inj = [[field.zero] * d for _ in range(total)]
        for k in range(d):
            inj[offset + k][k] = field.one
        i = Matrix(field, total, d, tuple(tuple(r) for r in inj))
        injections.append(i)
        projections.append(i.T)
        offset += d
    return injections, projections


def span_coordinates(basis_vectors: Sequence[Sequence], field: Field, length: int) -> Matrix:
    """Columns are the given flat vectors; helper for expressing vectors in a basis."""
    return Matrix(field, length, len(basis_vectors), tuple(tuple(v[i] for v in basis_vectors) for i in range(length)))


def complement_basis(field: Field, length: int, sub: Sequence[Sequence], ambient: Sequence[Sequence]) -> list[list]:
    """Vectors from ``ambient`` (in order) extending a basis of ``span(sub)`` to ``span(sub + ambient)``."""
    current = [list(v) for v in sub]
    rank = Matrix(field, len(current), length, tuple(tuple(v) for v in current)).rank() if current else 0
    out = []
    for v in ambient:
        trial = current + [list(v)]
        r = Matrix(field, len(trial), length, tuple(tuple(x) for x in trial)).rank()
        if r > rank:
            current = trial
            rank = r
            out.append(list(v))
    return out
