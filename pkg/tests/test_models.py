import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algext.linalg import GF, QQ, Matrix, block_diag, kernel_basis
from algext.models import (
    Model,
    ModelError,
    ModelMorphism,
    cokernel_model,
    conjugate,
    direct_sum,
    eval_combination,
    factor_through_epi,
    factor_through_mono,
    forget,
    forget_morphism,
    hom_coordinates,
    hom_space,
    identity_morphism,
    image_factorization,
    kernel_model,
    morphism_sum,
    validate_model,
    value_on_word,
    zero_morphism,
)
from algext.theory import Apply, LinearTermCombination, Var

from helpers import THEORIES, brute_force_hom_count, mk, random_model, random_morphism

F2 = GF(2)
ALL = sorted(THEORIES)


def comb(*pairs, context=("V",), sort="V"):
    return LinearTermCombination.of(context, sort, *pairs)


def annihilated(phi: ModelMorphism, H: Model, rng) -> ModelMorphism:
    """A random psi: H -> phi.source with phi . psi = 0, found by linear algebra on hom_space(H, source)."""
    basis = hom_space(H, phi.source)
    f = H.field
    if not basis:
        return zero_morphism(H, phi.source)
    cols = [phi.compose(b).flat() for b in basis]
    length = len(cols[0])
    m = Matrix(f, length, len(basis), tuple(tuple(c[i] for c in cols) for i in range(length)))
    k = kernel_basis(m).basis
    out = zero_morphism(H, phi.source)
    for j in range(k.ncols):
        coeff = f.random_element(rng)
        for i, b in enumerate(basis):
            out = out + b.scale(f.mul(coeff, k[i, j]))
    return out


def coannihilated(phi: ModelMorphism, H: Model, rng) -> ModelMorphism:
    """A random psi: phi.target -> H with psi . phi = 0."""
    basis = hom_space(phi.target, H)
    f = H.field
    if not basis:
        return zero_morphism(phi.target, H)
    cols = [b.compose(phi).flat() for b in basis]
    length = len(cols[0])
    m = Matrix(f, length, len(basis), tuple(tuple(c[i] for c in cols) for i in range(length)))
    k = kernel_basis(m).basis
    out = zero_morphism(phi.target, H)
    for j in range(k.ncols):
        coeff = f.random_element(rng)
        for i, b in enumerate(basis):
            out = out + b.scale(f.mul(coeff, k[i, j]))
    return out


class TestEvaluation:
    def test_variable_is_identity(self, field):
        F = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        assert eval_combination(comb((Var(0), 1)), F) == Matrix.identity(field, 2)

    def test_empty_combination(self, field):
        F = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        assert eval_combination(comb(context=("V", "V")), F) == Matrix.zeros(field, 2, 4)

    def test_square_of_zero(self, field):
        F = mk("n2", field, {"V": 1}, {"x": [[0]]})
        assert eval_combination(comb((Apply("x", (Apply("x", (Var(0),)),)), 1)), F) == Matrix.zeros(field, 1, 1)

    def test_binary_with_repeated_variable(self):
        F = mk("monoid", QQ, {"M": 1}, {"m": [[2, 3]]})
        t = Apply("m", (Var(0), Var(0)))
        assert eval_combination(comb((t, 1), context=("M",), sort="M"), F) == Matrix.from_rows(QQ, [[5]])

    def test_binary_projections(self):
        F = mk("monoid", QQ, {"M": 1}, {"m": [[2, 3]]})
        t = Apply("m", (Var(1), Var(0)))
        assert eval_combination(comb((t, 1), context=("M", "M"), sort="M"), F) == Matrix.from_rows(QQ, [[3, 2]])


class TestValidate:
    def test_n2_zero(self, field):
        assert validate_model(mk("n2", field, {"V": 1}, {"x": [[0]]})).valid

    def test_n2_identity_fails(self, field):
        report = validate_model(mk("n2", field, {"V": 1}, {"x": [[1]]}))
        assert not report.valid
        (fail,) = report.failures
        assert fail.lhs == Matrix.identity(field, 1) and fail.rhs == Matrix.zeros(field, 1, 1)

    def test_idem_projection(self, field):
        assert validate_model(mk("idem", field, {"V": 2}, {"x": [[1, 0], [0, 0]]})).valid

    def test_monoid_constants_noted(self):
        report = validate_model(mk("monoid", QQ, {"M": 1}, {"m": [[1, 1]]}))
        assert report.valid and any("zero" in n for n in report.notes)

    def test_monoid_collapse(self):
        # the unit laws force m = [1 1]
        assert not validate_model(mk("monoid", QQ, {"M": 1}, {"m": [[1, 2]]})).valid

    def test_shape_errors(self):
        with pytest.raises(Exception):
            mk("n2", QQ, {"V": 2}, {"x": [[0]]})
        with pytest.raises(ModelError):
            mk("n2", QQ, {"V": 1})
        with pytest.raises(ModelError):
            Model(THEORIES["n2"], QQ, {"W": 1}, {})


class TestHomSpace:
    def test_contains_identity(self, field, rng):
        for name in ALL:
            F = random_model(name, field, rng)
            basis = hom_space(F, F)
            hom_coordinates(basis, identity_morphism(F))

    def test_noop(self, field):
        F = mk("noop", field, {"V": 1})
        assert len(hom_space(F, F)) == 1

    def test_idem_one_to_zero(self, field):
        F = mk("idem", field, {"V": 1}, {"x": [[1]]})
        G = mk("idem", field, {"V": 1}, {"x": [[0]]})
        assert hom_space(F, G) == []

    def test_n2_jordan_endomorphisms(self, field):
        J = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        assert len(hom_space(J, J)) == 2

    def test_basis_is_natural(self, field, rng):
        for name in ALL:
            F, G = random_model(name, field, rng), random_model(name, field, rng)
            assert all(b.is_valid() for b in hom_space(F, G))

    @pytest.mark.parametrize("name", ["noop", "n2", "idem", "free_unary", "map", "monoid"])
    def test_against_enumeration(self, name):
        rng = random.Random(7)
        for _ in range(4):
            F = random_model(name, F2, rng, max_dim=2)
            G = random_model(name, F2, rng, max_dim=2)
            if sum(F.carrier[s] * G.carrier[s] for s in F.theory.sorts) > 8:
                continue
            assert brute_force_hom_count(F, G) == 2 ** len(hom_space(F, G))


class TestKernel:
    def test_of_identity(self, field):
        J = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        res = kernel_model(identity_morphism(J))
        assert res.sub.carrier == {"V": 0}

    def test_of_zero(self, field):
        J = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        K = mk("n2", field, {"V": 1}, {"x": [[0]]})
        res = kernel_model(zero_morphism(J, K))
        assert res.sub == J
        assert res.inclusion.components["V"] == Matrix.identity(field, 2)

    def test_n2_projection(self, field):
        J = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        K = mk("n2", field, {"V": 1}, {"x": [[0]]})
        phi = ModelMorphism(J, K, {"V": Matrix.from_rows(field, [[0, 1]])})
        assert phi.is_valid()
        res = kernel_model(phi)
        assert res.sub.carrier == {"V": 1}
        assert res.sub.ops["x"] == Matrix.zeros(field, 1, 1)
        assert res.inclusion.components["V"] == Matrix.from_rows(field, [[1], [0]])
        quot, _ = cokernel_model(phi)
        assert quot.carrier == {"V": 0}

    def test_non_natural_component_rejected(self, field):
        J = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        K = mk("n2", field, {"V": 1}, {"x": [[0]]})
        assert not ModelMorphism(J, K, {"V": Matrix.from_rows(field, [[1, 0]])}).is_valid()

    @pytest.mark.parametrize("name", ALL)
    def test_objectwise_and_universal(self, name, field):
        rng = random.Random(f"{name}-1000")
        for _ in range(5):
            F, G, H = (random_model(name, field, rng) for _ in range(3))
            phi = random_morphism(F, G, rng)
            res = kernel_model(phi)
            assert validate_model(res.sub).valid
            assert res.inclusion.is_valid() and res.inclusion.is_mono()
            assert phi.compose(res.inclusion).is_zero()
            for s in F.theory.sorts:
                assert res.sub.carrier[s] == F.carrier[s] - phi.components[s].rank()
            psi = annihilated(phi, H, rng)
            assert phi.compose(psi).is_zero()
            u = factor_through_mono(res.inclusion, psi)
            assert u.is_valid() and res.inclusion.compose(u) == psi


class TestCokernel:
    def test_of_identity(self, field):
        J = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        quot, _ = cokernel_model(identity_morphism(J))
        assert quot.carrier == {"V": 0}

    def test_of_zero(self, field):
        J = mk("n2", field, {"V": 2}, {"x": [[0, 1], [0, 0]]})
        K = mk("n2", field, {"V": 1}, {"x": [[0]]})
        quot, proj = cokernel_model(zero_morphism(K, J))
        assert quot == J and proj.components["V"] == Matrix.identity(field, 2)

    @pytest.mark.parametrize("name", ALL)
    def test_universal(self, name, field):
        rng = random.Random(f"{name}-997")
        for _ in range(5):
            F, G, H = (random_model(name, field, rng) for _ in range(3))
            phi = random_morphism(F, G, rng)
            quot, proj = cokernel_model(phi)
            assert validate_model(quot).valid
            assert proj.is_valid() and proj.is_epi()
            assert proj.compose(phi).is_zero()
            psi = coannihilated(phi, H, rng)
            u = factor_through_epi(proj, psi)
            assert u.is_valid() and u.compose(proj) == psi


class TestImage:
    @pytest.mark.parametrize("name", ALL)
    def test_factorization(self, name, field):
        rng = random.Random(f"{name}-991")
        for _ in range(5):
            F, G = random_model(name, field, rng), random_model(name, field, rng)
            phi = random_morphism(F, G, rng)
            epi, mono = image_factorization(phi)
            assert validate_model(epi.target).valid
            assert epi.is_valid() and mono.is_valid()
            assert epi.is_epi() and mono.is_mono()
            assert mono.compose(epi) == phi
            # image = kernel of the cokernel
            _, proj = cokernel_model(phi)
            assert kernel_model(proj).sub.carrier == epi.target.carrier


class TestDirectSum:
    @pytest.mark.parametrize("name", ALL)
    def test_biproduct_identities(self, name, field):
        rng = random.Random(f"{name}-983")
        for count in (1, 2, 3):
            parts = [random_model(name, field, rng, allow_zero=True) for _ in range(count)]
            ds = direct_sum(parts)
            assert validate_model(ds.model).valid
            total = identity_morphism(ds.model)
            acc = zero_morphism(ds.model, ds.model)
            for i, (inj, proj) in enumerate(zip(ds.injections, ds.projections)):
                assert inj.is_valid() and proj.is_valid()
                assert proj.compose(inj) == identity_morphism(parts[i])
                for j, other in enumerate(ds.injections):
                    if j != i:
                        assert proj.compose(other).is_zero()
                acc = acc + inj.compose(proj)
            assert acc == total

    def test_operations_block_diagonal(self):
        a = mk("monoid", QQ, {"M": 1}, {"m": [[1, 1]]})
        ds = direct_sum(a, a)
        # domain of m on the sum is (M+M) + (M+M), argument-major
        assert ds.model.ops["m"] == Matrix.from_rows(QQ, [[1, 0, 1, 0], [0, 1, 0, 1]])

    def test_universal_maps(self, field, rng):
        F, G = random_model("n2", field, rng), random_model("n2", field, rng)
        H = random_model("n2", field, rng)
        f, g = random_morphism(H, F, rng), random_morphism(H, G, rng)
        ds = direct_sum(F, G)
        pair = morphism_sum([ds.injections[0].compose(f), ds.injections[1].compose(g)])
        assert ds.projections[0].compose(pair) == f and ds.projections[1].compose(pair) == g

    def test_empty_rejected(self):
        with pytest.raises(ModelError):
            direct_sum([])


class TestForget:
    def test_value_on_word(self, field):
        F = mk("map", field, {"V": 2, "W": 1}, {"f": [[1, 0]]})
        assert value_on_word(F, ())[0] == 0
        dim, projs = value_on_word(F, ("V", "W", "V"))
        assert dim == 5 and [p.shape for p in projs] == [(2, 5), (1, 5), (2, 5)]

    def test_family(self, field):
        F = mk("map", field, {"V": 2, "W": 1}, {"f": [[1, 0]]})
        fam = forget(F, [("V",), ("W",), ("V", "W"), ()])
        assert fam.dims == {("V",): 2, ("W",): 1, ("V", "W"): 3, (): 0}
        assert fam.covers_sorts(F.theory)

    def test_unknown_sort(self, field):
        F = mk("map", field, {"V": 2, "W": 1}, {"f": [[1, 0]]})
        with pytest.raises(Exception):
            forget(F, [("U",)])

    @pytest.mark.parametrize("name", ALL)
    def test_word_components_are_block_diagonal(self, name, field):
        rng = random.Random(f"{name}-977")
        th = THEORIES[name]
        words = list(dict.fromkeys([(), *[(s,) for s in th.sorts], tuple(th.sorts) * 2, (th.sorts[-1], th.sorts[0])]))
        for _ in range(4):
            F, G = random_model(name, field, rng), random_model(name, field, rng)
            phi = random_morphism(F, G, rng)
            images = forget_morphism(phi, words)
            for w in words:
                assert images[w] == block_diag(field, [phi.components[s] for s in w])

    @pytest.mark.parametrize("name", ALL)
    def test_faithful(self, name, field):
        rng = random.Random(f"{name}-971")
        th = THEORIES[name]
        index = [(s,) for s in th.sorts] + [tuple(th.sorts) + (th.sorts[0],)]
        for _ in range(4):
            F, G = random_model(name, field, rng), random_model(name, field, rng)
            basis = hom_space(F, G)
            if not basis:
                continue
            columns = []
            for b in basis:
                images = forget_morphism(b, index)
                columns.append([x for w in index for x in images[w].flatten()])
            m = Matrix(field, len(columns[0]), len(columns), tuple(zip(*columns)))
            assert m.rank() == len(basis)


class TestConjugate:
    def test_iso(self, field, rng):
        F = random_model("idem", field, rng)
        changes = {s: Matrix.random_invertible(field, d, rng) for s, d in F.carrier.items()}
        G, iso = conjugate(F, changes)
        assert iso.is_valid() and iso.is_iso()
        assert validate_model(G).valid


@given(st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_morphism_algebra(seed):
    rng = random.Random(seed)
    F, G, H = (random_model("n2", QQ, rng) for _ in range(3))
    a, b = random_morphism(F, G, rng), random_morphism(F, G, rng)
    c = random_morphism(G, H, rng)
    assert (a + b).is_valid() and (a - b).is_valid()
    assert c.compose(a + b) == c.compose(a) + c.compose(b)
    assert identity_morphism(G).compose(a) == a == a.compose(identity_morphism(F))
