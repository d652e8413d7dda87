import random

import pytest

from algext import fixtures
from algext.homfin import (
    NotStabilized,
    adjunction_transpose,
    adjunction_untranspose,
    cofree_map,
    cofree_model,
    hom_basis,
    unit,
)
from algext.linalg import GF, QQ, Matrix
from algext.models import (
    IndexedFamily,
    ModelError,
    ModelMorphism,
    forget,
    forget_morphism,
    hom_space,
    identity_morphism,
    validate_model,
)

from helpers import THEORIES, mk, random_model, random_morphism

HOM_FINITE = list(fixtures.HOM_FINITE)


def indices(theory):
    """A few index sets containing every sort."""
    base = [(s,) for s in theory.sorts]
    return [base, base + [tuple(theory.sorts) + (theory.sorts[0],)], base + [()]]


def random_family(theory, index, rng, max_dim=2):
    return IndexedFamily(index, {w: rng.randint(0, max_dim) for w in index})


def random_word_maps(F, W, rng):
    f = F.field
    return {w: Matrix.random(f, W.dims[w], F.dim(w), rng) for w in W.index}


def adjoint_hom_dim(F, W):
    return sum(W.dims[w] * F.dim(w) for w in W.index)


class TestHomBasis:
    def test_noop(self):
        hb = hom_basis(THEORIES["noop"], ["V"], "V")
        assert hb.dim == 1 and hb.stabilized and hb.depth_used == 1
        assert [b.render(THEORIES["noop"], ["a"]) for b in hb.basis] == ["a"]

    def test_n2(self):
        th = THEORIES["n2"]
        hb = hom_basis(th, ["V"], "V")
        assert hb.dim == 2 and hb.stabilized
        assert [b.render(th, ["a"]) for b in hb.basis] == ["a", "x(a)"]

    def test_idem(self):
        th = THEORIES["idem"]
        hb = hom_basis(th, ["V"], "V")
        assert [b.render(th, ["a"]) for b in hb.basis] == ["a", "x(a)"]

    def test_monoid_collapses(self):
        th = THEORIES["monoid"]
        assert hom_basis(th, ["M"], "M").dim == 1
        assert hom_basis(th, ["M", "M"], "M").dim == 2

    def test_map(self):
        th = THEORIES["map"]
        assert hom_basis(th, ["V"], "W").dim == 1
        assert hom_basis(th, ["W"], "V").dim == 0
        assert hom_basis(th, ["V", "W"], "W").dim == 2
        assert hom_basis(th, [], "W").dim == 0

    def test_context_is_direct_sum(self):
        th = THEORIES["n2"]
        assert hom_basis(th, ["V", "V", "V"], "V").dim == 6

    def test_free_unary_fails(self):
        with pytest.raises(NotStabilized) as info:
            hom_basis(THEORIES["free_unary"], ["V"], "V", depth_bound=6)
        dims = [d for _, d in info.value.growth]
        assert dims[:6] == [1, 2, 3, 4, 5, 6]
        assert info.value.depth_bound == 6

    @pytest.mark.parametrize("bound", range(1, 13))
    def test_free_unary_every_bound(self, bound):
        with pytest.raises(NotStabilized) as info:
            hom_basis(THEORIES["free_unary"], ["V"], "V", depth_bound=bound)
        dims = [d for _, d in info.value.growth]
        assert all(a < b for a, b in zip(dims, dims[1:]))

    def test_bad_bound(self):
        with pytest.raises(ValueError):
            hom_basis(THEORIES["n2"], ["V"], "V", depth_bound=0)

    @pytest.mark.parametrize("name", HOM_FINITE)
    def test_field_independent(self, name):
        th = THEORIES[name]
        for s in th.sorts:
            for t in th.sorts:
                assert hom_basis(th, [s], t).dim == hom_basis(th, [s], t, field=GF(5)).dim


class TestCofree:
    def test_noop_is_identity_like(self, field):
        th = THEORIES["noop"]
        c = cofree_model(th, IndexedFamily([("V",)], {("V",): 1}), field)
        assert c.model.carrier == {"V": 1}

    def test_n2_shift(self, field):
        th = THEORIES["n2"]
        c = cofree_model(th, IndexedFamily([("V",)], {("V",): 1}), field)
        assert c.model.ops["x"] == Matrix.from_rows(field, [[0, 1], [0, 0]])

    def test_idem(self, field):
        th = THEORIES["idem"]
        c = cofree_model(th, IndexedFamily([("V",)], {("V",): 1}), field)
        x = c.model.ops["x"]
        assert c.model.carrier == {"V": 2}
        assert x @ x == x and x.rank() == 1

    def test_map(self, field):
        th = THEORIES["map"]
        c = cofree_model(th, IndexedFamily([("V",), ("W",)], {("V",): 0, ("W",): 1}), field)
        # R(W)(V) = Hom(Hom(V, W), k), R(W)(W) = Hom(Hom(W, W), k)
        assert c.model.carrier == {"V": 1, "W": 1}
        assert c.model.ops["f"] == Matrix.identity(field, 1)

    def test_needs_sorts(self, field):
        th = THEORIES["map"]
        with pytest.raises(ModelError):
            cofree_model(th, IndexedFamily([("V",)], {("V",): 1}), field)

    def test_free_unary(self, field):
        th = THEORIES["free_unary"]
        with pytest.raises(NotStabilized):
            cofree_model(th, IndexedFamily([("V",)], {("V",): 1}), field, depth_bound=5)

    @pytest.mark.parametrize("name", HOM_FINITE)
    def test_valid(self, name, field):
        rng = random.Random(f"cofree-{name}")
        th = THEORIES[name]
        for index in indices(th):
            c = cofree_model(th, random_family(th, index, rng), field)
            assert validate_model(c.model).valid


@pytest.mark.parametrize("name", HOM_FINITE)
class TestAdjunction:
    def test_dimensions(self, name, field):
        rng = random.Random(f"adj-dim-{name}")
        th = THEORIES[name]
        for index in indices(th):
            for _ in range(3):
                F = random_model(name, field, rng)
                W = random_family(th, index, rng)
                c = cofree_model(th, W, field)
                assert len(hom_space(F, c.model)) == adjoint_hom_dim(F, W)

    def test_bijection(self, name, field):
        rng = random.Random(f"adj-bij-{name}")
        th = THEORIES[name]
        for index in indices(th):
            F = random_model(name, field, rng)
            W = random_family(th, index, rng)
            c = cofree_model(th, W, field)
            phi = random_word_maps(F, W, rng)
            psi = adjunction_transpose(F, c, phi)
            assert psi.is_valid()
            assert adjunction_untranspose(c, psi) == phi
            for b in hom_space(F, c.model):
                assert adjunction_transpose(F, c, adjunction_untranspose(c, b)) == b

    def test_zero_and_linearity(self, name, field):
        rng = random.Random(f"adj-lin-{name}")
        th = THEORIES[name]
        index = indices(th)[1]
        F = random_model(name, field, rng)
        W = random_family(th, index, rng)
        c = cofree_model(th, W, field)
        zero = {w: Matrix.zeros(field, W.dims[w], F.dim(w)) for w in index}
        assert adjunction_transpose(F, c, zero).is_zero()
        p, q = random_word_maps(F, W, rng), random_word_maps(F, W, rng)
        both = {w: p[w] + q[w] for w in index}
        assert adjunction_transpose(F, c, both) == adjunction_transpose(F, c, p) + adjunction_transpose(F, c, q)

    def test_natural_in_source(self, name, field):
        rng = random.Random(f"adj-nat-{name}")
        th = THEORIES[name]
        index = indices(th)[1]
        F, G = random_model(name, field, rng), random_model(name, field, rng)
        h = random_morphism(G, F, rng)
        W = random_family(th, index, rng)
        c = cofree_model(th, W, field)
        phi = random_word_maps(F, W, rng)
        hw = forget_morphism(h, index)
        pulled = {w: phi[w] @ hw[w] for w in index}
        assert adjunction_transpose(G, c, pulled) == adjunction_transpose(F, c, phi).compose(h)

    def test_triangle_identities(self, name, field):
        rng = random.Random(f"adj-tri-{name}")
        th = THEORIES[name]
        for index in indices(th):
            F = random_model(name, field, rng)
            # counit at forget(F) after forget(unit at F) = identity
            cF, eta = unit(F, index)
            eps = cF.counit()
            under = forget_morphism(eta, index)
            for w in index:
                assert eps[w] @ under[w] == Matrix.identity(field, F.dim(w))
            # R(counit at W) after unit at R(W) = identity
            W = random_family(th, index, rng)
            R = cofree_model(th, W, field)
            RR, eta_R = unit(R.model, index)
            back = cofree_map(RR, R, R.counit())
            assert back.compose(eta_R) == identity_morphism(R.model)

    def test_unit_is_mono(self, name, field):
        rng = random.Random(f"adj-mono-{name}")
        th = THEORIES[name]
        for index in indices(th):
            F = random_model(name, field, rng)
            _, eta = unit(F, index)
            assert eta.is_valid() and eta.is_mono()


def test_n2_adjunction_example():
    th = THEORIES["n2"]
    F = mk("n2", QQ, {"V": 1}, {"x": [[0]]})
    W = IndexedFamily([("V",)], {("V",): 1})
    assert adjoint_hom_dim(F, W) == 1 == len(hom_space(F, cofree_model(th, W, QQ).model))


def test_identity_transposes_to_unit(field):
    F = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
    index = [("V",)]
    c, eta = unit(F, index)
    assert adjunction_untranspose(c, eta) == {("V",): Matrix.identity(field, 2)}
    assert forget(c.model, index).dims[("V",)] == 4


def test_transpose_shape_check(field):
    F = mk("n2", field, {"V": 1}, {"x": [[0]]})
    c = cofree_model(THEORIES["n2"], IndexedFamily([("V",)], {("V",): 1}), field)
    with pytest.raises(ModelError):
        adjunction_transpose(F, c, {("V",): Matrix.zeros(field, 2, 1)})


def test_cofree_map_functorial(field, rng):
    th = THEORIES["n2"]
    index = [("V",), ("V", "V")]
    A, B, C = (random_family(th, index, rng) for _ in range(3))
    RA, RB, RC = (cofree_model(th, X, field) for X in (A, B, C))
    g = {w: Matrix.random(field, B.dims[w], A.dims[w], rng) for w in index}
    h = {w: Matrix.random(field, C.dims[w], B.dims[w], rng) for w in index}
    Rg, Rh = cofree_map(RA, RB, g), cofree_map(RB, RC, h)
    assert Rg.is_valid() and Rh.is_valid()
    assert cofree_map(RA, RC, {w: h[w] @ g[w] for w in index}) == Rh.compose(Rg)
    assert cofree_map(RA, RA, {w: Matrix.identity(field, A.dims[w]) for w in index}) == identity_morphism(RA.model)
    assert isinstance(Rg, ModelMorphism)


def test_act_hom_dimensions():
    th = THEORIES["act"]
    dims = {(s, t): hom_basis(th, [s], t).dim for s in th.sorts for t in th.sorts}
    assert dims == {("V", "V"): 4, ("V", "W"): 2, ("W", "V"): 0, ("W", "W"): 2}
    rendered = [b.render(th, ["a"]) for b in hom_basis(th, ["V"], "W").basis]
    assert rendered == ["act(a, _)", "act(g(_, a), _)"]
