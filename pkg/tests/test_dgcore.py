"""Dg validation, cohomology, and both splitting constructions."""

import math
from fractions import Fraction

import numpy as np
import pytest

from homotrace.dgcore import (
    build_splitting_hodge,
    build_splitting_projector,
    check_splitting,
    cohomology,
    endomorphism_bundle,
    euler_characteristic,
    validate_bundle,
)
from homotrace.errors import ShapeError
from homotrace.glinalg import (
    GradedMap,
    GradedVectorSpace,
    compose,
    matrix_from_rows,
    supercommutator,
)
from homotrace.scalars import EXACT
from homotrace.transfer import _to_float


def t1_space_q():
    v = GradedVectorSpace.make({0: 2, 1: 1}, {0: ["e1", "e2"], 1: ["f"]})
    q = GradedMap.build(v, v, 1, {0: matrix_from_rows([[1, 0]], EXACT)}, EXACT)
    return v, q


def test_validate_t1_endomorphism_bundle(t1):
    rep = validate_bundle(t1.bundle)
    assert rep.ok, [c.name for c in rep.failures()]


def test_validate_catches_broken_q():
    v = GradedVectorSpace.make({0: 1, 1: 1, 2: 1}, {0: ["e1"], 1: ["f"], 2: ["g"]})
    q = GradedMap.build(v, v, 1, {
        0: matrix_from_rows([[1]], EXACT),
        1: matrix_from_rows([[1]], EXACT),
    }, EXACT)
    bundle = endomorphism_bundle(v, q, EXACT)
    rep = validate_bundle(bundle)
    failed = {c.name: c for c in rep.failures()}
    assert "Q-squared" in failed
    assert failed["Q-squared"].witness == "e1"


def test_validate_catches_broken_unit(t1):
    import dataclasses
    a = t1.bundle.algebra
    bad_unit = np.array(a.unit, copy=True)
    diag = a.flat_by_name("E[e1<-e1]")
    assert bad_unit[diag] == 1
    bad_unit[diag] = Fraction(0)
    bad_alg = dataclasses.replace(a, unit=bad_unit)
    bad = dataclasses.replace(t1.bundle, algebra=bad_alg)
    rep = validate_bundle(bad)
    assert not rep.ok
    assert any(c.name == "unit" for c in rep.failures())


def test_cohomology_t1():
    v, q = t1_space_q()
    coh = cohomology(v, q)
    assert coh.dims() == {0: 1}
    assert coh.euler == 1
    # representative is the class of e2
    rep = coh.include.block(0)
    assert list(rep.ravel()) == [0, 1]


def test_cohomology_zero_differential():
    v = GradedVectorSpace.make({0: 2, 1: 3})
    q = GradedMap.zero(v, v, 1, EXACT)
    coh = cohomology(v, q)
    assert coh.dims() == {0: 2, 1: 3}
    assert coh.euler == -1


def test_cohomology_rejects_non_square_zero():
    v = GradedVectorSpace.make({0: 1, 1: 1, 2: 1})
    q = GradedMap.build(v, v, 1, {
        0: matrix_from_rows([[1]], EXACT),
        1: matrix_from_rows([[1]], EXACT),
    }, EXACT)
    with pytest.raises(ShapeError):
        cohomology(v, q)


def test_euler_characteristic_variants():
    v, q = t1_space_q()
    assert euler_characteristic(v) == 1
    assert euler_characteristic(v, q) == 1
    assert euler_characteristic(GradedVectorSpace.make({})) == 0
    assert euler_characteristic(GradedVectorSpace.make({1: 3})) == -3


def test_projector_splitting_t1():
    v, q = t1_space_q()
    s = build_splitting_projector(v, q)
    assert check_splitting(v, q, s).ok
    # pi0 projects onto e2, kappa(f) = e1
    assert list(s.pi0.block(0).ravel()) == [0, 0, 0, 1]
    assert list(s.kappa.block(1).ravel()) == [1, 0]
    # kappa Q restricted to degree 0 equals pi1 restricted to degree 0
    kq = compose(s.kappa, q)
    assert (kq.block(0) == s.pi1.block(0)).all()
    assert supercommutator(q, s.kappa).equals(s.pi1)


def test_projector_splitting_zero_differential():
    v = GradedVectorSpace.make({0: 2})
    q = GradedMap.zero(v, v, 1, EXACT)
    s = build_splitting_projector(v, q)
    assert s.pi0.equals(GradedMap.identity(v, EXACT))
    assert s.pi1.is_zero() and s.kappa.is_zero()


def test_projector_splitting_acyclic():
    """Invertible 1-dim Q: pi0 = 0 and {Q, kappa} = id."""
    v = GradedVectorSpace.make({0: 1, 1: 1})
    q = GradedMap.build(v, v, 1, {0: matrix_from_rows([[2]], EXACT)}, EXACT)
    s = build_splitting_projector(v, q)
    assert s.pi0.is_zero()
    assert supercommutator(q, s.kappa).equals(GradedMap.identity(v, EXACT))


def test_sheared_splittings_differ_and_validate():
    v, q = t1_space_q()
    base = build_splitting_projector(v, q)
    seen = []
    for seed in (1, 2, 3):
        s = build_splitting_projector(v, q, shear_seed=seed)
        assert check_splitting(v, q, s).ok
        seen.append(s)
    distinct = {tuple(map(str, (s.pi0.block(0).tolist(),
                                s.kappa.block(1).tolist()))) for s in seen}
    assert len(distinct) >= 2


def test_hodge_splitting_t1():
    v, q = t1_space_q()
    qf = _to_float(q)
    s = build_splitting_hodge(v, qf)
    assert check_splitting(v, qf, s, tol=1e-10).ok
    # Laplacian acts as the identity on span(e1, f), kernel is e2
    assert abs(s.lambda1 - 1.0) < 1e-12
    d0 = s.delta.block(0)
    assert np.allclose(d0, np.diag([1.0, 0.0]))


def test_hodge_green_homotopy_reduces_to_projector_mode():
    v, q = t1_space_q()
    qf = _to_float(q)
    s = build_splitting_hodge(v, qf)
    h = s.homotopy
    assert supercommutator(qf, h).equals(s.pi1, 1e-12)
    assert compose(h, h).is_zero(1e-12)
    assert compose(h, s.pi0).is_zero(1e-12)
    assert compose(s.pi0, h).is_zero(1e-12)


def test_heat_decay_bound(torus1):
    """exp(-t Delta) restricted to the acyclic part contracts at rate lambda1."""
    s = torus1.splitting
    space = torus1.bundle.space
    for t in (1.0, 10.0):
        for d in space.degrees():
            vals, vecs = np.linalg.eigh(np.asarray(s.delta.block(d)))
            et = vecs @ np.diag(np.exp(-t * np.clip(vals, 0, None))) @ vecs.conj().T
            p1 = np.asarray(s.pi1.block(d))
            norm = np.linalg.norm(et @ p1, 2)
            assert norm <= math.exp(-t * s.lambda1) + 1e-10
