"""Shared builders for the test suite: seeded random data and fixed corpora."""

import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from types import SimpleNamespace

from jacv.algebroid import (
    AlgebroidPatch,
    JacobiAlgebroidData,
    Patch,
    extend_with_R,
    make_explicit,
    make_tangent,
    make_trivial,
)
from jacv.calculus import Form, MultiVector, differential, merge
from jacv.coeff import ExpPoly
from jacv.structures import (
    SIDE_A,
    JacobiBialgebroidData,
    TensorMap,
    bivector_of,
    flat_map,
    make_standard_bialgebroid,
    pi_from_omega,
    sharp_map,
    two_form_of,
)


def rand_scalar(r, patch, max_degree=2, terms=2, with_t=False, exp_range=0):
    """Random polynomial in the patch coordinates, optionally in t and e^t."""
    vs = patch.variables
    names = list(patch.coords) + (["t"] if with_t else [])
    out = ExpPoly.zero(vs)
    for _ in range(terms):
        c = Fraction(r.randint(-3, 3))
        if c == 0:
            continue
        mono = ExpPoly.const(vs, c)
        for _ in range(r.randint(0, max_degree)):
            mono = mono * ExpPoly.var(vs, r.choice(names))
        if exp_range:
            mono = mono.times_exp(r.randint(-exp_range, exp_range))
        out = out + mono
    return out


def _rand_components(r, A, degree, density, **kw):
    comps = {}
    for key in combinations(range(A.rank), degree):
        if r.random() < density:
            c = rand_scalar(r, A.patch, **kw)
            if not c.is_zero:
                comps[key] = c
    return comps


def rand_multivector(r, A, degree, density=0.6, **kw):
    return MultiVector(A, degree, _rand_components(r, A, degree, density, **kw))


def rand_form(r, A, degree, density=0.6, **kw):
    return Form(A, degree, _rand_components(r, A, degree, density, **kw))


def small_tangent(names=("x", "y", "z")):
    patch = Patch(tuple(names))
    return patch, make_tangent(patch)


def closed_twist(r, A):
    """A twist cosection with vanishing plain differential: d of a scalar,
    plus a constant-coefficient coframe element."""
    f = Form(A, 0, {(): rand_scalar(r, A.patch, max_degree=2)})
    exact = differential(A, f)
    idx = r.randrange(A.rank)
    return exact + Fraction(r.randint(-2, 2)) * Form.coframe(A, idx)


def unit_triangular(r, A, max_degree=1):
    """Endomorphism with unit diagonal and random strictly-upper entries."""
    one = A.scalar(1)
    zero = A.zero_scalar()
    rows = []
    for i in range(A.rank):
        row = []
        for j in range(A.rank):
            if i == j:
                row.append(one)
            elif i < j:
                row.append(rand_scalar(r, A.patch, max_degree=max_degree, terms=1))
            else:
                row.append(zero)
        rows.append(tuple(row))
    return TensorMap(A, SIDE_A, SIDE_A, tuple(rows))


def standard_flat(A):
    """Block two-form pairing consecutive frame elements; rank must be even."""
    assert A.rank % 2 == 0
    comps = {(2 * i, 2 * i + 1): A.scalar(1) for i in range(A.rank // 2)}
    return flat_map(Form(A, 2, comps))


def rand_unit_two_form(r, A, max_degree=1):
    """Random closed-under-nothing two-form whose flat map has unit determinant."""
    L = unit_triangular(r, A, max_degree=max_degree)
    b = L.dual().compose(standard_flat(A).compose(L))
    return two_form_of(b)


def rand_unit_bivector(r, A, max_degree=1):
    L = unit_triangular(r, A, max_degree=max_degree)
    J0 = standard_flat(A).inverse()
    m = L.compose(J0.compose(L.dual()))
    return bivector_of(m)


@lru_cache(maxsize=None)
def contact():
    """The five-coordinate contact corpus and its derived objects."""
    p = Patch(("x1", "x2", "y1", "y2", "z"))
    TA = make_tangent(p)
    J = JacobiAlgebroidData(TA, Form.zero(TA, 1))
    C = extend_with_R(TA)
    ext = C.algebroid

    x = {name: p.coord(name) for name in p.coords}
    b_O = Form(TA, 1, {(0,): -x["y1"], (1,): -x["y2"], (4,): p.const(1)})
    b_H = Form(TA, 1, {(0,): -x["y1"], (1,): x["y2"], (4,): p.const(1)})
    b_E = Form(TA, 1, {(0,): -x["y2"], (1,): x["y1"], (4,): p.const(1)})
    b_P = Form(TA, 1, {(0,): -x["y2"], (4,): p.const(1)})

    def merged(b):
        return merge(ext, differential(J, b), b)

    Om, wH, wE, wP = (merged(b) for b in (b_O, b_H, b_E, b_P))
    Pi = pi_from_omega(C, Om)
    fl = flat_map(Om)
    NH = fl.inverse().compose(flat_map(wH))
    NE = fl.inverse().compose(flat_map(wE))
    NP = fl.inverse().compose(flat_map(wP))

    Lam = MultiVector(
        TA,
        2,
        {(0, 2): p.const(1), (1, 3): p.const(1), (2, 4): -x["y1"], (3, 4): -x["y2"]},
    )
    Ez = MultiVector(TA, 1, {(4,): p.const(1)})

    return SimpleNamespace(
        p=p, TA=TA, J=J, C=C, ext=ext,
        b_O=b_O, b_H=b_H, b_E=b_E, b_P=b_P,
        Om=Om, wH=wH, wE=wE, wP=wP,
        Pi=Pi, NH=NH, NE=NE, NP=NP,
        Lam=Lam, Ez=Ez,
    )


@lru_cache(maxsize=None)
def solvable_bialgebroid():
    """Dual pair of two-dimensional solvable Lie algebras over a one-point base."""
    p = Patch(("q",))
    zero = p.zero()
    one = p.const(1)
    A = make_explicit(p, 2, ((zero, zero),), {(0, 1): (zero, one)})
    D = make_explicit(
        p, 2, ((zero, zero),), {(0, 1): (zero, one)},
        frame_labels=("eps1", "eps2"), coframe_labels=("e1", "e2"),
    )
    return JacobiBialgebroidData(
        JacobiAlgebroidData(A, Form.zero(A, 1)),
        JacobiAlgebroidData(D, Form.zero(D, 1)),
    )


def rand_graph_section(r, A, kind):
    """Random degree-2 section of either kind for graph/MC tests."""
    if kind == "sharp":
        return rand_multivector(r, A, 2, max_degree=1, terms=1)
    return rand_form(r, A, 2, max_degree=1, terms=1)
