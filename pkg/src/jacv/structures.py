"""Musical maps and structure-level checks over an algebroid patch.

Conventions pinned here:

* a bundle map is a rank x rank matrix acting on degree-1 components,
  ``out[i] = sum_j matrix[i][j] * in[j]``;
* ``sharp_map(pi)`` satisfies ``<sharp(xi), eta> = pi(xi, eta)`` and
  ``flat_map(omega)`` satisfies ``<flat(X), Y> = omega(X, Y)``;
* the two-form attached to an invertible bivector is fixed by
  ``flat = -(sharp)^(-1)`` and conversely;
* inversion goes through the adjugate and exists exactly when the
  determinant is a unit of the coefficient ring;
* the dual of a map transposes the matrix and swaps bundle sides;
* check outcomes are values (``CheckReport``); a failed check never raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .coeff import ExpPoly, NotInvertible
from .algebroid import (
    AlgebroidPatch,
    JacobiAlgebroidData,
    bracket_sections,
)
from . import calculus
from .calculus import (
    Form,
    Key,
    MismatchError,
    MultiVector,
    Section,
    differential,
    flip_dual,
    lie_derivative,
    pair,
    phi0_schouten,
    wedge,
)

Matrix = Tuple[Tuple[ExpPoly, ...], ...]

SIDE_A = "A"
SIDE_DUAL = "A*"


def _other_side(side: str) -> str:
    return SIDE_DUAL if side == SIDE_A else SIDE_A


def _kind_for(side: str) -> type:
    return MultiVector if side == SIDE_A else Form


@dataclass(eq=False)
class TensorMap:
    """A bundle map between degree-1 sections, stored as a component matrix."""

    algebroid: AlgebroidPatch
    source: str
    target: str
    matrix: Matrix

    def __post_init__(self) -> None:
        if self.source not in (SIDE_A, SIDE_DUAL):
            raise ValueError(f"bad source side {self.source!r}")
        if self.target not in (SIDE_A, SIDE_DUAL):
            raise ValueError(f"bad target side {self.target!r}")
        r = self.algebroid.rank
        self.matrix = tuple(tuple(row) for row in self.matrix)
        if len(self.matrix) != r or any(len(row) != r for row in self.matrix):
            raise ValueError(f"matrix must be {r}x{r}")
        variables = self.algebroid.patch.variables
        for row in self.matrix:
            for entry in row:
                if entry.vars != variables:
                    raise ValueError("matrix entry over the wrong variables")

    # -- construction ------------------------------------------------------

    @classmethod
    def identity(cls, algebroid: AlgebroidPatch, side: str = SIDE_A) -> "TensorMap":
        zero = algebroid.zero_scalar()
        one = algebroid.scalar(1)
        r = algebroid.rank
        rows = tuple(
            tuple(one if i == j else zero for j in range(r)) for i in range(r)
        )
        return cls(algebroid, side, side, rows)

    @classmethod
    def zero(cls, algebroid: AlgebroidPatch, source: str, target: str) -> "TensorMap":
        zero = algebroid.zero_scalar()
        r = algebroid.rank
        rows = tuple(tuple(zero for _ in range(r)) for _ in range(r))
        return cls(algebroid, source, target, rows)

    # -- algebra -----------------------------------------------------------

    def _check_same_shape(self, other: "TensorMap") -> None:
        if self.algebroid is not other.algebroid:
            raise MismatchError("maps live over different algebroids")
        if self.source != other.source or self.target != other.target:
            raise MismatchError("maps have different sides")

    def __add__(self, other: "TensorMap") -> "TensorMap":
        self._check_same_shape(other)
        rows = tuple(
            tuple(a + b for a, b in zip(ra, rb))
            for ra, rb in zip(self.matrix, other.matrix)
        )
        return TensorMap(self.algebroid, self.source, self.target, rows)

    def __neg__(self) -> "TensorMap":
        rows = tuple(tuple(-a for a in row) for row in self.matrix)
        return TensorMap(self.algebroid, self.source, self.target, rows)

    def __sub__(self, other: "TensorMap") -> "TensorMap":
        return self + (-other)

    def scale(self, factor) -> "TensorMap":
        f = factor if isinstance(factor, ExpPoly) else self.algebroid.scalar(factor)
        rows = tuple(tuple(f * a for a in row) for row in self.matrix)
        return TensorMap(self.algebroid, self.source, self.target, rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorMap):
            return NotImplemented
        return (
            self.algebroid is other.algebroid
            and self.source == other.source
            and self.target == other.target
            and self.matrix == other.matrix
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def is_zero(self) -> bool:
        return all(entry.is_zero for row in self.matrix for entry in row)

    # -- action ------------------------------------------------------------

    def apply(self, section: Section) -> Section:
        want = _kind_for(self.source)
        if not isinstance(section, want):
            raise MismatchError(
                f"map expects a degree-1 {want.__name__} on its source side"
            )
        if section.degree != 1:
            raise MismatchError("maps act on degree-1 sections")
        if section.algebroid is not self.algebroid:
            raise MismatchError("section lives over a different algebroid")
        zero = self.algebroid.zero_scalar()
        comps: Dict[Key, ExpPoly] = {}
        for i, row in enumerate(self.matrix):
            total = zero
            for j, entry in enumerate(row):
                c = section.components.get((j,))
                if c is None or entry.is_zero:
                    continue
                total = total + entry * c
            if not total.is_zero:
                comps[(i,)] = total
        return _kind_for(self.target)(self.algebroid, 1, comps)

    def compose(self, inner: "TensorMap") -> "TensorMap":
        """The map ``self after inner``."""
        if inner.algebroid is not self.algebroid:
            raise MismatchError("maps live over different algebroids")
        if inner.target != self.source:
            raise MismatchError("inner target does not feed this map's source")
        zero = self.algebroid.zero_scalar()
        r = self.algebroid.rank
        rows = []
        for i in range(r):
            row = []
            for j in range(r):
                total = zero
                for k in range(r):
                    a = self.matrix[i][k]
                    b = inner.matrix[k][j]
                    if a.is_zero or b.is_zero:
                        continue
                    total = total + a * b
                row.append(total)
            rows.append(tuple(row))
        return TensorMap(self.algebroid, inner.source, self.target, tuple(rows))

    def dual(self) -> "TensorMap":
        """Transpose acting between the dual sides."""
        r = self.algebroid.rank
        rows = tuple(
            tuple(self.matrix[j][i] for j in range(r)) for i in range(r)
        )
        return TensorMap(
            self.algebroid,
            _other_side(self.target),
            _other_side(self.source),
            rows,
        )

    # -- determinant and inverse ------------------------------------------

    def determinant(self) -> ExpPoly:
        return _det(self.algebroid, self.matrix)

    def is_unit_determinant(self) -> bool:
        return self.determinant().is_unit()

    def inverse(self) -> "TensorMap":
        det = self.determinant()
        inv_det = det.unit_inverse()  # raises NotInvertible on a non-unit
        r = self.algebroid.rank
        rows = []
        for i in range(r):
            row = []
            for j in range(r):
                minor = _minor(self.algebroid, self.matrix, j, i)
                if (i + j) % 2:
                    minor = -minor
                row.append(inv_det * minor)
            rows.append(tuple(row))
        return TensorMap(self.algebroid, self.target, self.source, tuple(rows))

    def __str__(self) -> str:
        rows = [
            "[" + ", ".join(str(entry) for entry in row) + "]"
            for row in self.matrix
        ]
        return f"{self.source}->{self.target} " + "[" + "; ".join(rows) + "]"

    __repr__ = __str__


def _det(algebroid: AlgebroidPatch, matrix: Matrix) -> ExpPoly:
    rows = list(range(len(matrix)))
    cols = list(range(len(matrix)))
    return _det_rec(algebroid, matrix, rows, cols)


def _det_rec(
    algebroid: AlgebroidPatch,
    matrix: Matrix,
    rows: List[int],
    cols: List[int],
) -> ExpPoly:
    if not rows:
        return algebroid.scalar(1)
    total = algebroid.zero_scalar()
    top = rows[0]
    rest = rows[1:]
    for pos, col in enumerate(cols):
        entry = matrix[top][col]
        if entry.is_zero:
            continue
        sub = _det_rec(algebroid, matrix, rest, cols[:pos] + cols[pos + 1 :])
        term = entry * sub
        if pos % 2:
            term = -term
        total = total + term
    return total


def _minor(
    algebroid: AlgebroidPatch, matrix: Matrix, drop_row: int, drop_col: int
) -> ExpPoly:
    r = len(matrix)
    rows = [i for i in range(r) if i != drop_row]
    cols = [j for j in range(r) if j != drop_col]
    return _det_rec(algebroid, matrix, rows, cols)


# -- musical maps ----------------------------------------------------------


def sharp_map(pi: MultiVector) -> TensorMap:
    """The map with <sharp(xi), eta> = pi(xi, eta)."""
    if not isinstance(pi, MultiVector) or pi.degree != 2:
        raise MismatchError("sharp_map needs a degree-2 multivector")
    r = pi.algebroid.rank
    rows = tuple(
        tuple(pi.component(j, i) for j in range(r)) for i in range(r)
    )
    return TensorMap(pi.algebroid, SIDE_DUAL, SIDE_A, rows)


def flat_map(omega: Form) -> TensorMap:
    """The map with <flat(X), Y> = omega(X, Y)."""
    if not isinstance(omega, Form) or omega.degree != 2:
        raise MismatchError("flat_map needs a degree-2 form")
    r = omega.algebroid.rank
    rows = tuple(
        tuple(omega.component(j, i) for j in range(r)) for i in range(r)
    )
    return TensorMap(omega.algebroid, SIDE_A, SIDE_DUAL, rows)


def _antisymmetric_tensor(m: TensorMap, cls: type) -> Section:
    r = m.algebroid.rank
    for i in range(r):
        if not m.matrix[i][i].is_zero:
            raise MismatchError("matrix does not come from an antisymmetric tensor")
        for j in range(i):
            if m.matrix[i][j] != -m.matrix[j][i]:
                raise MismatchError(
                    "matrix does not come from an antisymmetric tensor"
                )
    comps: Dict[Key, ExpPoly] = {}
    for i in range(r):
        for j in range(i + 1, r):
            c = m.matrix[j][i]
            if not c.is_zero:
                comps[(i, j)] = c
    return cls(m.algebroid, 2, comps)


def bivector_of(m: TensorMap) -> MultiVector:
    """Recover pi from its sharp matrix; inverse of ``sharp_map``."""
    if m.source != SIDE_DUAL or m.target != SIDE_A:
        raise MismatchError("bivector_of expects a map from the dual side")
    return _antisymmetric_tensor(m, MultiVector)


def two_form_of(m: TensorMap) -> Form:
    """Recover omega from its flat matrix; inverse of ``flat_map``."""
    if m.source != SIDE_A or m.target != SIDE_DUAL:
        raise MismatchError("two_form_of expects a map into the dual side")
    return _antisymmetric_tensor(m, Form)


def omega_from_pi(J: JacobiAlgebroidData, pi: MultiVector) -> Form:
    """The two-form with flat = -(sharp of pi)^(-1); needs a unit determinant."""
    _check_over(J, pi)
    return two_form_of(-sharp_map(pi).inverse())


def pi_from_omega(J: JacobiAlgebroidData, omega: Form) -> MultiVector:
    """The bivector with sharp = -(flat of omega)^(-1); needs a unit determinant."""
    _check_over(J, omega)
    return bivector_of(-flat_map(omega).inverse())


# -- reports ---------------------------------------------------------------

PASS = "pass"
FAIL = "fail"
NOT_DECIDED = "not_decided"


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a structure check; failures carry a printable witness."""

    status: str
    witness: Optional[str] = None
    strategy: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == PASS


def _report_zero(residue: Section, strategy: Optional[str] = None) -> CheckReport:
    if residue.is_zero:
        return CheckReport(PASS, strategy=strategy)
    return CheckReport(FAIL, witness=str(residue), strategy=strategy)


def _check_over(J: JacobiAlgebroidData, *sections: Section) -> None:
    for s in sections:
        if s.algebroid is not J.algebroid:
            raise MismatchError("section lives over a different algebroid")


# -- Jacobi and presymplectic checks ---------------------------------------


def jacobi_bracket(
    J: JacobiAlgebroidData, pi: MultiVector, xi: Form, eta: Form
) -> Form:
    """Bracket induced on 1-forms by a bivector over twisted data.

    Value: L_{sharp xi} eta - L_{sharp eta} xi - d<sharp xi, eta>, all three
    terms twisted.
    """
    _check_over(J, pi, xi, eta)
    if xi.degree != 1 or eta.degree != 1:
        raise MismatchError("jacobi_bracket needs degree-1 forms")
    sharp = sharp_map(pi)
    sx = sharp.apply(xi)
    se = sharp.apply(eta)
    value = pair(eta, sx)
    return (
        lie_derivative(J, sx, eta)
        - lie_derivative(J, se, xi)
        - differential(J, Form.scalar_section(J.algebroid, value))
    )


def jacobi_check(J: JacobiAlgebroidData, pi: MultiVector) -> CheckReport:
    """Pass iff the twisted self-bracket of the bivector vanishes."""
    _check_over(J, pi)
    if pi.degree != 2:
        raise MismatchError("jacobi_check needs a degree-2 multivector")
    return _report_zero(phi0_schouten(J, pi, pi))


def compat_check(
    J: JacobiAlgebroidData, pi1: MultiVector, pi2: MultiVector
) -> CheckReport:
    """Pass iff the twisted bracket of the two bivectors vanishes."""
    _check_over(J, pi1, pi2)
    return _report_zero(phi0_schouten(J, pi1, pi2))


def presymplectic_check(J: JacobiAlgebroidData, omega: Form) -> CheckReport:
    """Pass iff the twisted differential of the two-form vanishes."""
    _check_over(J, omega)
    if omega.degree != 2:
        raise MismatchError("presymplectic_check needs a degree-2 form")
    return _report_zero(differential(J, omega))


def nondegenerate_check(m: TensorMap) -> CheckReport:
    det = m.determinant()
    if det.is_unit():
        return CheckReport(PASS, strategy="unit determinant")
    return CheckReport(FAIL, witness=f"det = {det}", strategy="unit determinant")


# -- dual pairs of twisted algebroids ---------------------------------------


@dataclass(eq=False)
class JacobiBialgebroidData:
    """Twisted algebroid together with a twisted dual over the same patch.

    The dual side is its own algebroid object; its degree-1 twist plays the
    role the primal twist plays on the primal side.  Components move between
    the sides by the positional flip (a multivector of one side is a form of
    the other).
    """

    a_side: JacobiAlgebroidData
    astar_side: JacobiAlgebroidData

    def __post_init__(self) -> None:
        A = self.a_side.algebroid
        D = self.astar_side.algebroid
        if A.rank != D.rank:
            raise ValueError("the two sides must have equal rank")
        if A.patch.variables != D.patch.variables:
            raise ValueError("the two sides must share the patch variables")

    @property
    def A(self) -> AlgebroidPatch:
        return self.a_side.algebroid

    @property
    def Astar(self) -> AlgebroidPatch:
        return self.astar_side.algebroid

    @property
    def phi0(self) -> Form:
        return self.a_side.phi0

    @property
    def X0(self) -> MultiVector:
        """The dual-side twist read as a degree-1 multivector of the primal side."""
        return flip_dual(self.astar_side.phi0, self.A)


def make_standard_bialgebroid(J: JacobiAlgebroidData) -> JacobiBialgebroidData:
    """Pair a twisted algebroid with the trivial dual (zero bracket, anchor, twist)."""
    A = J.algebroid
    zero = A.patch.zero()
    r = A.rank
    n = len(A.patch.anchor_coords)
    anchor = tuple(tuple(zero for _ in range(r)) for _ in range(n))
    structure = tuple(
        tuple(tuple(zero for _ in range(r)) for _ in range(r)) for _ in range(r)
    )
    dual = AlgebroidPatch(
        A.patch,
        r,
        anchor,
        structure,
        frame_labels=A.coframe_labels,
        coframe_labels=A.frame_labels,
    )
    return JacobiBialgebroidData(J, JacobiAlgebroidData(dual, Form.zero(dual, 1)))


def dual_differential(B: JacobiBialgebroidData, P: MultiVector) -> MultiVector:
    """Twisted differential of the dual side acting on primal multivectors."""
    if not isinstance(P, MultiVector):
        raise MismatchError("dual_differential acts on multivectors")
    flipped = flip_dual(P, B.Astar)
    return flip_dual(differential(B.astar_side, flipped), B.A)


def dual_schouten(B: JacobiBialgebroidData, w1: Form, w2: Form) -> Form:
    """Twisted bracket of the dual side acting on primal forms."""
    f1 = flip_dual(w1, B.Astar)
    f2 = flip_dual(w2, B.Astar)
    return flip_dual(phi0_schouten(B.astar_side, f1, f2), B.A)


def dual_lie(B: JacobiBialgebroidData, xi: Form, target: Section) -> Section:
    """Twisted Lie derivative of the dual side along a primal 1-form."""
    if xi.degree != 1:
        raise MismatchError("dual_lie needs a degree-1 direction")
    direction = flip_dual(xi, B.Astar)
    flipped = flip_dual(target, B.Astar)
    return flip_dual(lie_derivative(B.astar_side, direction, flipped), B.A)


def maurer_cartan_check(B: JacobiBialgebroidData, s: Section) -> CheckReport:
    """Residue of d(s) + (1/2)[s, s] with the differential from the other side."""
    if s.degree != 2:
        raise MismatchError("the Maurer-Cartan check needs a degree-2 section")
    if isinstance(s, MultiVector):
        _check_over(B.a_side, s)
        residue = dual_differential(B, s) + Fraction(1, 2) * phi0_schouten(
            B.a_side, s, s
        )
    else:
        _check_over(B.a_side, s)
        residue = differential(B.a_side, s) + Fraction(1, 2) * dual_schouten(B, s, s)
    return _report_zero(residue)


# -- bialgebroid compatibility ----------------------------------------------


def _scaled_frames(A: AlgebroidPatch) -> List[MultiVector]:
    """Frames and coordinate-scaled frames; the default evidence family."""
    out = [MultiVector.frame(A, i) for i in range(A.rank)]
    for name in A.patch.coords:
        f = A.patch.coord(name)
        for i in range(A.rank):
            out.append(f * MultiVector.frame(A, i))
    return out


def bialgebroid_compat_check(
    B: JacobiBialgebroidData,
    pairs: Optional[Sequence[Tuple[MultiVector, MultiVector]]] = None,
    multis: Optional[Sequence[MultiVector]] = None,
) -> CheckReport:
    """Both compatibility identities, evaluated on a finite section family.

    Identity one: the dual differential is a derivation from the primal
    bracket into the twisted bracket.  Identity two: the twisted Lie
    derivatives along the two twists cancel on every multivector.  Evidence
    only, so the report says so.
    """
    A = B.A
    strategy = "verified on test family"
    if pairs is None:
        family = _scaled_frames(A)
        frames = family[: A.rank]
        pairs = [
            (frames[i], frames[j])
            for i in range(A.rank)
            for j in range(i, A.rank)
        ]
        pairs += [(s, frames[j]) for s in family[A.rank :] for j in range(A.rank)]
    if multis is None:
        frames = [MultiVector.frame(A, i) for i in range(A.rank)]
        multis = list(_scaled_frames(A))
        multis += [
            wedge(frames[i], frames[j])
            for i in range(A.rank)
            for j in range(i + 1, A.rank)
        ]
    for X, Y in pairs:
        lhs = dual_differential(B, bracket_sections(A, X, Y))
        rhs = phi0_schouten(B.a_side, dual_differential(B, X), Y) + phi0_schouten(
            B.a_side, X, dual_differential(B, Y)
        )
        if lhs != rhs:
            witness = f"derivation identity on ({X}, {Y}): {lhs - rhs}"
            return CheckReport(FAIL, witness=witness, strategy=strategy)
    x0 = B.X0
    for P in multis:
        residue = lie_derivative(B.a_side, x0, P) + dual_lie(B, B.phi0, P)
        if not residue.is_zero:
            witness = f"twist derivative identity on {P}: {residue}"
            return CheckReport(FAIL, witness=witness, strategy=strategy)
    return CheckReport(PASS, strategy=strategy)


# -- pairings and the structure bracket on A + A* ---------------------------


@dataclass(eq=False)
class CouplePair:
    """A degree-1 multivector and a degree-1 form over one algebroid."""

    vector: MultiVector
    covector: Form

    def __post_init__(self) -> None:
        if self.vector.degree != 1 or self.covector.degree != 1:
            raise MismatchError("couple components must have degree 1")
        if self.vector.algebroid is not self.covector.algebroid:
            raise MismatchError("couple components over different algebroids")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CouplePair):
            return NotImplemented
        return self.vector == other.vector and self.covector == other.covector

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"({self.vector}, {self.covector})"


def pairing_pm(u: CouplePair, v: CouplePair, sign: int) -> ExpPoly:
    """The symmetric (+1) or antisymmetric (-1) half-sum pairing."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    first = pair(u.covector, v.vector)
    second = pair(v.covector, u.vector)
    total = first + second if sign == 1 else first - second
    return total * Fraction(1, 2)


def courant_bracket(
    B: JacobiBialgebroidData, u: CouplePair, v: CouplePair
) -> CouplePair:
    """The skew bracket on couples built from both twisted calculi."""
    A = B.A
    minus = pairing_pm(u, v, -1)
    vec = (
        phi0_schouten(B.a_side, u.vector, v.vector)
        + dual_lie(B, u.covector, v.vector)
        - dual_lie(B, v.covector, u.vector)
        - dual_differential(B, MultiVector.scalar_section(A, minus))
    )
    cov = (
        dual_schouten(B, u.covector, v.covector)
        + lie_derivative(B.a_side, u.vector, v.covector)
        - lie_derivative(B.a_side, v.vector, u.covector)
        + differential(B.a_side, Form.scalar_section(A, minus))
    )
    return CouplePair(vec, cov)


def _coframe_family(A: AlgebroidPatch) -> List[Form]:
    out = [Form.coframe(A, i) for i in range(A.rank)]
    for name in A.patch.coords:
        f = A.patch.coord(name)
        for i in range(A.rank):
            out.append(f * Form.coframe(A, i))
    return out


def graph_closure_check(B: JacobiBialgebroidData, s: Section) -> CheckReport:
    """Whether the graph couples of a degree-2 section close under the bracket.

    For a bivector the couples are (sharp xi, xi); for a two-form they are
    (X, flat X).  Closure is evaluated on coframe/frame pairs plus their
    coordinate-scaled versions.
    """
    A = B.A
    strategy = "graph closure on scaled frame pairs"
    if isinstance(s, MultiVector):
        if s.degree != 2:
            raise MismatchError("graph closure needs a degree-2 section")
        sharp = sharp_map(s)
        family = _coframe_family(A)
        for a, xi in enumerate(family):
            for eta in family[a + 1 :]:
                u = CouplePair(sharp.apply(xi), xi)
                v = CouplePair(sharp.apply(eta), eta)
                w = courant_bracket(B, u, v)
                defect = w.vector - sharp.apply(w.covector)
                if not defect.is_zero:
                    witness = f"bracket of graph couples at ({xi}, {eta}): {defect}"
                    return CheckReport(FAIL, witness=witness, strategy=strategy)
        return CheckReport(PASS, strategy=strategy)
    if s.degree != 2:
        raise MismatchError("graph closure needs a degree-2 section")
    flat = flat_map(s)
    family = _scaled_frames(A)
    for a, X in enumerate(family):
        for Y in family[a + 1 :]:
            u = CouplePair(X, flat.apply(X))
            v = CouplePair(Y, flat.apply(Y))
            w = courant_bracket(B, u, v)
            defect = w.covector - flat.apply(w.vector)
            if not defect.is_zero:
                witness = f"bracket of graph couples at ({X}, {Y}): {defect}"
                return CheckReport(FAIL, witness=witness, strategy=strategy)
    return CheckReport(PASS, strategy=strategy)
