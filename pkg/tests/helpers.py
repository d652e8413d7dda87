"""Model builders, random generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random

from algext import fixtures
from algext.ext import build_extension, cocycle_space
from algext.linalg import Field, Matrix
from algext.models import Model, ModelMorphism, conjugate, direct_sum, hom_space, validate_model, zero_morphism

THEORIES = {name: fixtures.theory(name) for name in fixtures.THEORIES}


def mk(theory, field: Field, carrier: dict, ops: dict | None = None) -> Model:
    """Build a model from nested-list matrices (shapes inferred from the carrier)."""
    if isinstance(theory, str):
        theory = THEORIES[theory]
    full = {s: carrier.get(s, 0) for s in theory.sorts}
    mats = {}
    for name, rows in (ops or {}).items():
        op = theory.op(name)
        mats[name] = Matrix(
            field,
            full[op.codomain],
            sum(full[s] for s in op.domain),
            tuple(tuple(field(x) for x in r) for r in rows),
        )
    return Model(theory, field, full, mats)


def seeds(name: str, field: Field) -> list[Model]:
    if name == "noop":
        return [mk(name, field, {"V": 1})]
    if name == "n2":
        return [mk(name, field, {"V": 1}, {"x": [[0]]}), mk(name, field, {"V": 2}, {"x": [[0, 1], [0, 0]]})]
    if name == "idem":
        return [mk(name, field, {"V": 1}, {"x": [[0]]}), mk(name, field, {"V": 1}, {"x": [[1]]})]
    if name == "free_unary":
        return [
            mk(name, field, {"V": 1}, {"x": [[0]]}),
            mk(name, field, {"V": 1}, {"x": [[2]]}),
            mk(name, field, {"V": 2}, {"x": [[1, 1], [0, 1]]}),
        ]
    if name == "map":
        return [
            mk(name, field, {"V": 1, "W": 0}),
            mk(name, field, {"V": 0, "W": 1}),
            mk(name, field, {"V": 1, "W": 1}, {"f": [[1]]}),
        ]
    if name == "monoid":
        return [mk(name, field, {"M": 1}, {"m": [[1, 1]]})]
    if name == "act":
        return [
            mk(name, field, {"V": 1, "W": 0}, {"g": [[1, 1]]}),
            mk(name, field, {"V": 1, "W": 0}, {"g": [[1, 0]]}),
            mk(name, field, {"V": 1, "W": 1}, {"g": [[1, 0]], "act": [[1, 0]]}),
            mk(name, field, {"V": 0, "W": 1}, {"act": [[1]]}),
        ]
    raise KeyError(name)


def _fits(model: Model, max_dim: int) -> bool:
    return all(d <= max_dim for d in model.carrier.values())


def random_model(name: str, field: Field, rng: random.Random, max_dim: int = 3, allow_zero: bool = False) -> Model:
    """A random valid model: a direct sum of seeds, possibly twisted by a random
    extension, then transported along random invertible base changes."""
    pool = seeds(name, field)
    theory = THEORIES[name]
    while True:
        count = rng.randint(0 if allow_zero else 1, 3)
        parts = [rng.choice(pool) for _ in range(count)]
        if not parts:
            return Model(theory, field, {s: 0 for s in theory.sorts}, {})
        if len(parts) >= 2 and rng.random() < 0.5:
            G = parts.pop()
            F = direct_sum(parts).model
            Z = cocycle_space(G, F)
            z = None
            for b in Z:
                term = b.scale(field.random_element(rng))
                z = term if z is None else z + term
            model = build_extension(z).E if z is not None else direct_sum(F, G).model
        else:
            model = direct_sum(parts).model
        if _fits(model, max_dim):
            break
    changes = {s: Matrix.random_invertible(field, d, rng) for s, d in model.carrier.items()}
    out, _ = conjugate(model, changes)
    assert validate_model(out).valid
    return out


def random_morphism(F: Model, G: Model, rng: random.Random) -> ModelMorphism:
    basis = hom_space(F, G)
    out = zero_morphism(F, G)
    for b in basis:
        out = out + b.scale(F.field.random_element(rng))
    return out


# brute-force oracles (small prime fields only)


def all_matrices(field, nrows: int, ncols: int):
    for entries in itertools.product(range(field.p), repeat=nrows * ncols):
        yield Matrix.from_flat(field, nrows, ncols, list(entries))


def brute_force_hom_count(F: Model, G: Model) -> int:
    """Number of families of matrices commuting with every operation."""
    sorts = F.theory.sorts
    choices = [list(all_matrices(F.field, G.carrier[s], F.carrier[s])) for s in sorts]
    count = 0
    for combo in itertools.product(*choices):
        if ModelMorphism(F, G, dict(zip(sorts, combo))).is_valid():
            count += 1
    return count


def brute_force_extension_classes(G: Model, F: Model) -> int:
    """Count equivalence classes of block-triangular extension models of ``G`` by ``F``.

    Every choice of off-diagonal blocks is tried and kept when the block model
    satisfies the equations; two are identified when a shear
    ``[[1, h], [0, 1]]`` is a model isomorphism between them.
    """
    from algext.ext import Cocycle, _extension_model

    f = F.field
    n = len(Cocycle.zero(G, F).flat())
    valid = []
    for entries in itertools.product(range(f.p), repeat=n):
        z = Cocycle.from_flat(G, F, list(entries))
        E = _extension_model(z)
        if validate_model(E).valid:
            valid.append(E)
    sorts = F.theory.sorts
    shears = []
    for combo in itertools.product(*[list(all_matrices(f, F.carrier[s], G.carrier[s])) for s in sorts]):
        shear = {}
        for s, h in zip(sorts, combo):
            df, dg = F.carrier[s], G.carrier[s]
            rows = []
            for i in range(df + dg):
                row = [1 if i == j else 0 for j in range(df + dg)]
                if i < df:
                    for j in range(dg):
                        row[df + j] = h.rows[i][j]
                rows.append(row)
            shear[s] = Matrix.from_rows(f, rows, ncols=df + dg)
        shears.append(shear)
    parent = list(range(len(valid)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, Ei in enumerate(valid):
        for j in range(i + 1, len(valid)):
            if find(i) == find(j):
                continue
            if any(ModelMorphism(Ei, valid[j], sh).is_valid() for sh in shears):
                parent[find(j)] = find(i)
    return len({find(i) for i in range(len(valid))})
