"""Deterministic generators of validated bundle + splitting test instances.

Three families:
* matrix instances: End(M) acting on a small graded complex (preset T1);
* torus instances: the truncated Fourier model of the del-bar complex on a
  flat complex torus, with the commutative algebra of Fourier multipliers
  generated by the constant-coefficient operators up to the order cap;
* random instances: seeded exact bundles with a random square-zero
  differential and a random unital operator subalgebra closed under
  product and differential.

Every generator validates the dg axioms and the splitting invariants
before returning.
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from homotrace.dgcore import (
    DgModuleBundle,
    Splitting,
    build_splitting_hodge,
    build_splitting_projector,
    check_splitting,
    endomorphism_bundle,
    make_algebra,
    validate_bundle,
)
from homotrace.errors import CapError, ClosureError, InputError, ShapeError
from homotrace.glinalg import (
    GradedMap,
    GradedVectorSpace,
    compose,
    invert_exact,
    rref,
    zeros_matrix,
)
from homotrace.scalars import DEFAULT_TOL, EXACT, FLOAT, one_scalar

MAX_TOTAL_DIM = 64
MAX_RANDOM_DIM = 12
DEFAULT_ORDER_CAP = 2
DEFAULT_CLOSURE_BOUND = 48


@dataclass(frozen=True)
class InstanceSpec:
    """Parameters for the CLI generator; bounds validated on construction."""

    kind: str  # "matrix" | "torus" | "random"
    scalar: str = EXACT
    dims: tuple[tuple[int, int], ...] = ()
    preset: str | None = None
    truncation: int = 1
    tau: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))
    seed: int = 0
    order_cap: int = DEFAULT_ORDER_CAP
    nilpotency: int = 2

    def __post_init__(self):
        if self.kind not in ("matrix", "torus", "random"):
            raise InputError(f"unknown instance kind {self.kind!r}")
        if self.kind == "torus":
            total = 2 * (2 * self.truncation + 1) ** 2
            if self.truncation < 1:
                raise InputError("truncation must be >= 1")
        elif self.kind == "random":
            total = sum(n for _, n in self.dims)
            if total > MAX_RANDOM_DIM:
                raise InputError(
                    f"random instances are capped at total dimension "
                    f"{MAX_RANDOM_DIM}, got {total}")
        else:
            total = sum(n for _, n in self.dims)
        if total > MAX_TOTAL_DIM:
            raise InputError(
                f"total dimension {total} exceeds the cap {MAX_TOTAL_DIM}")


@dataclass
class Instance:
    """A validated bundle with its splitting and user-facing named elements."""

    bundle: DgModuleBundle
    splitting: Splitting
    elements: dict[str, tuple[int, np.ndarray]]  # name -> (degree, flat coeffs)
    meta: dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        return self.bundle.mode

    def element(self, name: str) -> tuple[int, np.ndarray]:
        got = self.elements.get(name)
        if got is not None:
            return got
        flat = self.bundle.algebra.flat_by_name(name)
        if flat is None:
            raise InputError(f"unknown operator {name!r}")
        vec = self.bundle.algebra._zero_vec()
        vec[flat] = one_scalar(self.mode)
        return self.bundle.algebra.basis_degree(flat), vec


def _validated(bundle: DgModuleBundle, splitting: Splitting,
               elements: dict, meta: dict,
               tol: float | None = None) -> Instance:
    rep = validate_bundle(bundle, tol)
    if not rep.ok:
        names = ", ".join(c.name for c in rep.failures())
        raise ShapeError(f"generated instance fails validation: {names}")
    srep = check_splitting(bundle.space, bundle.q, splitting, tol)
    if not srep.ok:
        names = ", ".join(c.name for c in srep.failures())
        raise ShapeError(f"generated splitting fails validation: {names}")
    return Instance(bundle=bundle, splitting=splitting, elements=elements,
                    meta=meta)


def _identity_element(bundle: DgModuleBundle) -> dict:
    return {"Id": (0, bundle.algebra.unit)}


def matrix_instance(dims: dict[int, int],
                    q_entries: list[tuple[str, str, object]] | None = None,
                    labels: dict[int, list[str]] | None = None,
                    shear_seed: int | None = None) -> Instance:
    """End(M) acting on the complex M with the given differential entries."""
    total = sum(dims.values())
    if total > 8:
        raise InputError("matrix instances are capped at module dimension 8")
    space = GradedVectorSpace.make(dims, labels)
    blocks: dict[int, np.ndarray] = {
        d: zeros_matrix(space.dim(d + 1), space.dim(d), EXACT)
        for d in space.degrees() if space.dim(d + 1)
    }
    pos = {}
    for d in space.degrees():
        for i, lbl in enumerate(space.labels_in(d)):
            pos[lbl] = (d, i)
    for src, dst, val in (q_entries or []):
        if src not in pos or dst not in pos:
            raise InputError(f"unknown basis label in Q entry {src}->{dst}")
        (ds, i), (dt, j) = pos[src], pos[dst]
        if dt != ds + 1:
            raise InputError(f"Q entry {src}->{dst} is not degree +1")
        blocks[ds][j, i] = Fraction(val) if not isinstance(val, Fraction) else val
    q = GradedMap.build(space, space, 1, blocks, EXACT)
    if not compose(q, q).is_zero():
        raise InputError("provided differential does not square to zero")
    bundle = endomorphism_bundle(space, q, EXACT)
    splitting = build_splitting_projector(space, q, shear_seed)
    return _validated(bundle, splitting, _identity_element(bundle),
                      {"kind": "matrix", "dims": dict(dims)})


def t1_instance(shear_seed: int | None = None) -> Instance:
    """The canonical 3-dimensional example: e1, e2 in degree 0, f in degree 1,
    Q e1 = f."""
    inst = matrix_instance({0: 2, 1: 1},
                           q_entries=[("e1", "f", Fraction(1))],
                           labels={0: ["e1", "e2"], 1: ["f"]},
                           shear_seed=shear_seed)
    inst.meta["preset"] = "T1"
    return inst


def torus_instance(truncation: int, tau: complex | tuple = 1j,
                   order_cap: int = DEFAULT_ORDER_CAP,
                   tol: float = DEFAULT_TOL) -> Instance:
    """Truncated Fourier model of the flat-torus del-bar complex.

    Modes phi_{m,n} with |m|,|n| <= truncation in degrees 0 and 1; the
    differential acts diagonally by the del-bar multiplier.  The algebra
    is the commutative multiplier algebra spanned by the mode projectors
    (the closure of the constant-coefficient operators, which act
    diagonally and preserve the truncation exactly).  Named elements give
    the constant-coefficient derivative powers up to the order cap.
    """
    spec = InstanceSpec(kind="torus", scalar=FLOAT, truncation=truncation,
                        order_cap=order_cap)
    n_side = 2 * truncation + 1
    if isinstance(tau, tuple):
        tau = complex(float(tau[0]), float(tau[1]))
    tau = complex(tau)
    if tau.imag == 0:
        raise InputError("torus modulus must have nonzero imaginary part")
    modes = [(m, n) for m in range(-truncation, truncation + 1)
             for n in range(-truncation, truncation + 1)]
    n_modes = len(modes)
    denom = tau - tau.conjugate()
    # d/dz and d/dzbar multipliers on exp(2 pi i (m u + n v)), z = u + tau v
    lam = {mn: 2j * cmath.pi * (-tau.conjugate() * mn[0] + mn[1]) / denom
           for mn in modes}
    mubar = {mn: 2j * cmath.pi * (tau * mn[0] - mn[1]) / denom for mn in modes}

    labels = {0: [f"phi({m},{n})" for m, n in modes],
              1: [f"phi({m},{n})dzb" for m, n in modes]}
    space = GradedVectorSpace.make({0: n_modes, 1: n_modes}, labels)
    qblock = np.zeros((n_modes, n_modes), dtype=complex)
    for i, mn in enumerate(modes):
        qblock[i, i] = mubar[mn]
    q = GradedMap.build(space, space, 1, {0: qblock}, FLOAT)

    aspace = GradedVectorSpace.make(
        {0: n_modes}, {0: [f"P({m},{n})" for m, n in modes]})
    maps = []
    for i in range(n_modes):
        blocks = {}
        for d in (0, 1):
            m = np.zeros((n_modes, n_modes), dtype=complex)
            m[i, i] = 1.0
            blocks[d] = m
        maps.append(GradedMap.build(space, space, 0, blocks, FLOAT))
    mul_table = []
    for i in range(n_modes):
        row = []
        for j in range(n_modes):
            v = np.zeros(n_modes, dtype=complex)
            if i == j:
                v[i] = 1.0
            row.append(v)
        mul_table.append(row)
    unit = np.ones(n_modes, dtype=complex)
    differential = GradedMap.zero(aspace, aspace, 1, FLOAT)
    algebra = make_algebra(aspace, differential, mul_table, unit, FLOAT)
    bundle = DgModuleBundle(algebra=algebra, space=space, q=q,
                            rho=tuple(maps), mode=FLOAT)
    splitting = build_splitting_hodge(space, q, tol=tol)

    elements = {"Id": (0, unit.copy())}
    for order in range(1, order_cap + 1):
        vec = np.array([lam[mn] ** order for mn in modes], dtype=complex)
        name = "ddz" if order == 1 else f"ddz{order}"
        elements[name] = (0, vec)
    if order_cap < 1:
        raise CapError("order cap below 1 leaves no derivative operators")
    meta = {"kind": "torus", "truncation": truncation,
            "tau": [tau.real, tau.imag], "order_cap": order_cap,
            "modes_per_degree": n_modes}
    return _validated(bundle, splitting, elements, meta, tol)


def torus_element(instance: Instance, order: int) -> tuple[int, np.ndarray]:
    """Constant-coefficient derivative of the given order; errors above cap."""
    cap = instance.meta.get("order_cap", DEFAULT_ORDER_CAP)
    if order > cap:
        raise CapError(f"operator order {order} exceeds the instance cap {cap}")
    name = "Id" if order == 0 else ("ddz" if order == 1 else f"ddz{order}")
    return instance.element(name)


# ---------------------------------------------------------------------------
# Random exact instances


def _random_square_zero(rng: random.Random, space: GradedVectorSpace,
                        levels: int) -> GradedMap:
    """Q from a random two-role basis split (sources map to targets only),
    conjugated by a random rational change of basis."""
    role = {d: [rng.random() < 0.5 for _ in range(n)] for d, n in space.dims}
    blocks = {}
    for d, n in space.dims:
        m = space.dim(d + 1)
        if m == 0:
            continue
        b = zeros_matrix(m, n, EXACT)
        targets = [i for i in range(m) if not role[d + 1][i]]
        for j in range(n):
            if role[d][j]:
                for i in targets:
                    b[i, j] = Fraction(rng.randint(-2, 2))
        blocks[d] = b
    q = GradedMap.build(space, space, 1, blocks, EXACT)
    s_blocks, si_blocks = {}, {}
    for d, n in space.dims:
        while True:
            s = zeros_matrix(n, n, EXACT)
            for i in range(n):
                for j in range(n):
                    s[i, j] = Fraction(rng.randint(-1, 1))
            try:
                si = invert_exact(s)
                break
            except ShapeError:
                continue
        s_blocks[d], si_blocks[d] = s, si
    smap = GradedMap.build(space, space, 0, s_blocks, EXACT)
    simap = GradedMap.build(space, space, 0, si_blocks, EXACT)
    return compose(smap, compose(q, simap))


def _flatten(space: GradedVectorSpace, m: GradedMap) -> np.ndarray:
    cells = []
    for d in space.degrees():
        for td in space.degrees():
            blk = m.block(d) if td == d + m.degree else None
            rows, cols = space.dim(td), space.dim(d)
            if rows == 0 or cols == 0:
                continue
            if blk is not None and blk.shape == (rows, cols):
                cells.append(np.array(blk).reshape(-1))
            else:
                z = zeros_matrix(rows, cols, EXACT)
                cells.append(z.reshape(-1))
    return np.concatenate(cells) if cells else np.empty(0, dtype=object)


def _closure(space: GradedVectorSpace, q: GradedMap,
             generators: list[GradedMap], bound: int) -> list[GradedMap]:
    """Unital span closure under composition and {Q, .}; exact row reduction."""
    from homotrace.glinalg import supercommutator

    basis: list[GradedMap] = []
    flat_rows: list[np.ndarray] = []

    def try_add(m: GradedMap) -> bool:
        if m.is_zero():
            return False
        vec = _flatten(space, m)
        if flat_rows:
            stacked = np.stack(flat_rows + [vec], axis=1)
            _, pivots = rref(stacked)
            if len(pivots) <= len(flat_rows):
                return False
        basis.append(m)
        flat_rows.append(vec)
        if len(basis) > bound:
            raise ClosureError(
                f"algebra closure exceeded the dimension bound {bound}")
        return True

    try_add(GradedMap.identity(space, EXACT))
    queue = list(generators)
    while queue:
        m = queue.pop()
        if try_add(m):
            queue.append(supercommutator(q, m))
            for b in list(basis):
                queue.append(compose(b, m))
                queue.append(compose(m, b))
    # degree-homogeneous check (construction keeps generators homogeneous)
    return basis


def to_float_instance(instance: Instance, tol: float = DEFAULT_TOL) -> Instance:
    """Float copy of an exact instance, with the Hodge (Laplacian) splitting."""
    from homotrace.transfer import _to_float

    bundle = instance.bundle
    if bundle.mode == FLOAT:
        return instance
    a = bundle.algebra
    mul_table = [[np.array([complex(x) for x in a.mul[i][j]], dtype=complex)
                  for j in range(a.n_basis)] for i in range(a.n_basis)]
    unit = np.array([complex(x) for x in a.unit], dtype=complex)
    algebra = make_algebra(a.space, _to_float(a.differential), mul_table,
                           unit, FLOAT)
    fbundle = DgModuleBundle(algebra=algebra, space=bundle.space,
                             q=_to_float(bundle.q),
                             rho=tuple(_to_float(r) for r in bundle.rho),
                             mode=FLOAT)
    splitting = build_splitting_hodge(bundle.space, fbundle.q, tol=tol)
    elements = {name: (deg, np.array([complex(x) for x in vec], dtype=complex))
                for name, (deg, vec) in instance.elements.items()}
    meta = dict(instance.meta)
    meta["scalar"] = FLOAT
    return _validated(fbundle, splitting, elements, meta, tol)


def random_instance(seed: int, dims: dict[int, int],
                    nilpotency: int = 2,
                    closure_bound: int = DEFAULT_CLOSURE_BOUND) -> Instance:
    """Deterministic exact bundle from a seed: random square-zero Q and a
    random unital operator subalgebra closed under d and product."""
    spec = InstanceSpec(kind="random", dims=tuple(sorted(dims.items())),
                        seed=seed, nilpotency=nilpotency)
    rng = random.Random(seed)
    space = GradedVectorSpace.make(dims)
    q = _random_square_zero(rng, space, nilpotency)

    degrees = space.degrees()
    gens = []
    for _ in range(2):
        d_src = rng.choice(degrees)
        d_tgt = rng.choice(degrees)
        rows, cols = space.dim(d_tgt), space.dim(d_src)
        b = zeros_matrix(rows, cols, EXACT)
        entries = max(1, (rows * cols) // 2)
        for _ in range(entries):
            b[rng.randrange(rows), rng.randrange(cols)] = Fraction(
                rng.randint(-2, 2))
        gens.append(GradedMap.build(space, space, d_tgt - d_src,
                                    {d_src: b}, EXACT))
    basis_maps = _closure(space, q, gens, closure_bound)

    # group by degree, deterministic order
    by_degree: dict[int, list[GradedMap]] = {}
    for m in basis_maps:
        by_degree.setdefault(m.degree, []).append(m)
    adims = {g: len(v) for g, v in by_degree.items()}
    alabels = {g: [f"b{g}_{i}" for i in range(len(v))]
               for g, v in by_degree.items()}
    aspace = GradedVectorSpace.make(adims, alabels)
    ordered: list[GradedMap] = []
    for g in sorted(by_degree):
        ordered.extend(by_degree[g])
    n = len(ordered)
    flat_cols = np.stack([_flatten(space, m) for m in ordered], axis=1)

    from homotrace.glinalg import solve_exact, supercommutator

    def expand(m: GradedMap) -> np.ndarray:
        sol = solve_exact(flat_cols, _flatten(space, m))
        if sol is None:
            raise ClosureError("operator escaped the closed span")
        return sol

    mul_table = [[expand(compose(ordered[i], ordered[j])) for j in range(n)]
                 for i in range(n)]
    unit = expand(GradedMap.identity(space, EXACT))
    off = {}
    o = 0
    for g in sorted(adims):
        off[g] = o
        o += adims[g]
    diff_blocks = {}
    for g in sorted(adims):
        if adims.get(g + 1, 0) == 0:
            continue
        mcols = zeros_matrix(adims[g + 1], adims[g], EXACT)
        for i in range(adims[g]):
            vec = expand(supercommutator(q, ordered[off[g] + i]))
            mcols[:, i] = vec[off[g + 1]:off[g + 1] + adims[g + 1]]
        diff_blocks[g] = mcols
    differential = GradedMap.build(aspace, aspace, 1, diff_blocks, EXACT)
    algebra = make_algebra(aspace, differential, mul_table, unit, EXACT)
    bundle = DgModuleBundle(algebra=algebra, space=space, q=q,
                            rho=tuple(ordered), mode=EXACT)
    splitting = build_splitting_projector(space, q)
    return _validated(bundle, splitting, _identity_element(bundle),
                      {"kind": "random", "seed": seed, "dims": dict(dims),
                       "algebra_dim": n})
