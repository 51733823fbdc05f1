"""Pair checks built on graph relations inside the double A + dual.

A degree-2 multivector and a degree-2 form each cut out a graph inside the
sum of the algebroid and its dual (through the sharp and the flat map).
Composing one graph with the transpose of the other produces a relation on
the algebroid itself; when that relation is the graph of an endomorphism
its deformation obstruction is the usual torsion tensor, and the pair is
"compatible as graphs" exactly when the obstruction vanishes.

The checkers here grade a pair of graphs in three escalating ways:

* a sufficient bracket-compatibility test for two bivectors,
* a complete reduction to a torsion tensor whenever the relation is forced
  to be a graph (mixed pairs always; matched pairs when one of the musical
  maps has unit determinant),
* evidence from caller-supplied cosection triples otherwise.

Verdicts distinguish "fail" (a concrete obstruction was computed) from
"inconclusive" (no complete strategy applied), so a report never claims
more than the arithmetic shows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .algebroid import AlgebroidPatch, JacobiAlgebroidData, bracket_sections
from .calculus import (
    Form,
    MismatchError,
    MultiVector,
    Section,
    differential,
    eval_on,
    pair,
    phi0_schouten,
)
from .coeff import ExpPoly
from .structures import (
    FAIL,
    NOT_DECIDED,
    PASS,
    CheckReport,
    JacobiBialgebroidData,
    TensorMap,
    flat_map,
    jacobi_check,
    make_standard_bialgebroid,
    maurer_cartan_check,
    nondegenerate_check,
    presymplectic_check,
    sharp_map,
    two_form_of,
)

INCONCLUSIVE = "inconclusive"

# Statuses that mean "no complete strategy applied", across report kinds.
INCONCLUSIVE_SET = frozenset({INCONCLUSIVE, NOT_DECIDED})

KIND_SHARP = "sharp"
KIND_FLAT = "flat"

CosectionTriple = Tuple[Form, Form, Form]
WitnessItem = Tuple[Form, Form, CosectionTriple]


@dataclass(eq=False)
class GraphRelation:
    """Graph of a musical map, tagged with the section that generates it.

    ``sharp`` wraps a degree-2 multivector (graph of its sharp map, oriented
    with the algebroid side first); ``flat`` wraps a degree-2 form (graph of
    its flat map, dual side first).  The orientation difference is invisible
    to the checks because relation torsion is orientation-independent.
    """

    kind: str
    section: Section

    def __post_init__(self) -> None:
        if self.kind not in (KIND_SHARP, KIND_FLAT):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        wanted = MultiVector if self.kind == KIND_SHARP else Form
        if not isinstance(self.section, wanted):
            raise MismatchError(f"a {self.kind} graph needs a {wanted.__name__}")
        if self.section.degree != 2:
            raise MismatchError("graph relations are generated by degree-2 sections")

    @classmethod
    def of_bivector(cls, pi: MultiVector) -> "GraphRelation":
        return cls(KIND_SHARP, pi)

    @classmethod
    def of_two_form(cls, omega: Form) -> "GraphRelation":
        return cls(KIND_FLAT, omega)

    @property
    def algebroid(self) -> AlgebroidPatch:
        return self.section.algebroid

    def music(self) -> TensorMap:
        if self.kind == KIND_SHARP:
            return sharp_map(self.section)
        return flat_map(self.section)

    def __str__(self) -> str:
        return f"{self.kind} graph of {self.section}"


@dataclass(frozen=True)
class PairVerdict:
    """Graded outcome of a pair check.

    ``pass`` and ``fail`` are only issued when a complete strategy (or a
    decisive witness) applies; everything weaker is ``inconclusive``.
    """

    status: str
    strategy: str
    witness: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == PASS


# -- torsion of an endomorphism ---------------------------------------------

def torsion_tensor(N: TensorMap, X: MultiVector, Y: MultiVector) -> MultiVector:
    """[NX,NY] - N[NX,Y] - N[X,NY] + N(N[X,Y]) with the plain bracket."""
    if N.source != "A" or N.target != "A":
        raise MismatchError("torsion needs an endomorphism of the algebroid side")
    A = N.algebroid
    if X.degree != 1 or Y.degree != 1:
        raise MismatchError("torsion arguments must be degree-1 multivectors")
    NX = N.apply(X)
    NY = N.apply(Y)
    out = bracket_sections(A, NX, NY)
    out = out - N.apply(bracket_sections(A, NX, Y))
    out = out - N.apply(bracket_sections(A, X, NY))
    out = out + N.apply(N.apply(bracket_sections(A, X, Y)))
    return out


def torsion_tensor_check(N: TensorMap) -> CheckReport:
    """Evaluate the torsion on every frame pair; tensoriality makes this full."""
    A = N.algebroid
    for i in range(A.rank):
        for j in range(i + 1, A.rank):
            value = torsion_tensor(N, MultiVector.frame(A, i), MultiVector.frame(A, j))
            if not value.is_zero:
                where = f"({A.frame_labels[i]}, {A.frame_labels[j]})"
                return CheckReport(
                    FAIL,
                    witness=f"torsion at {where} = {value}",
                    strategy="torsion on frame pairs",
                )
    return CheckReport(PASS, strategy="torsion on frame pairs")


# -- torsion of a composed graph relation -----------------------------------

def torsion_raw_relation(
    A: AlgebroidPatch,
    pairs: Tuple[Tuple[MultiVector, MultiVector], Tuple[MultiVector, MultiVector]],
    triple: CosectionTriple,
) -> ExpPoly:
    """Torsion of a relation evaluated on explicit members.

    The caller supplies two pairs belonging to the relation and a cosection
    triple from its dual chain; membership is the caller's responsibility.
    The value is the alternating pairing of the triple against the brackets
    of the paired legs.
    """
    (x1, y1), (x2, y2) = pairs
    alpha, beta, gamma = triple
    top = pair(alpha, bracket_sections(A, y1, y2))
    mid = pair(beta, bracket_sections(A, y1, x2) + bracket_sections(A, x1, y2))
    bot = pair(gamma, bracket_sections(A, x1, x2))
    return top - mid + bot


def _triple_residues(
    pi1: MultiVector, pi2: MultiVector, triple: CosectionTriple
) -> Tuple[Section, Section]:
    s1 = sharp_map(pi1)
    s2 = sharp_map(pi2)
    first = s2.apply(triple[1]) - s1.apply(triple[0])
    second = s2.apply(triple[2]) - s1.apply(triple[1])
    return first, second


def valid_triple(
    pi1: MultiVector, pi2: MultiVector, triple: CosectionTriple
) -> bool:
    """Chain condition: the second sharp advances the triple along the first."""
    first, second = _triple_residues(pi1, pi2, triple)
    return first.is_zero and second.is_zero


def torsion_raw(
    A: AlgebroidPatch,
    pi1: MultiVector,
    pi2: MultiVector,
    xi1: Form,
    xi2: Form,
    triple: CosectionTriple,
) -> ExpPoly:
    """Relation torsion for two bivector graphs on a chained cosection triple.

    The relation pairs the second sharp against the first, so the evaluation
    legs are (pi2^sharp xi, pi1^sharp xi) and the triple must satisfy the
    chain condition checked by valid_triple.
    """
    if not valid_triple(pi1, pi2, triple):
        raise MismatchError("cosection triple does not satisfy the chain condition")
    s1 = sharp_map(pi1)
    s2 = sharp_map(pi2)
    legs = ((s2.apply(xi1), s1.apply(xi1)), (s2.apply(xi2), s1.apply(xi2)))
    return torsion_raw_relation(A, legs, triple)


def torsion_triple(
    J: JacobiAlgebroidData,
    pi1: MultiVector,
    pi2: MultiVector,
    xi1: Form,
    xi2: Form,
    triple: CosectionTriple,
) -> ExpPoly:
    """Three-bracket combination controlling the relation torsion.

    [pi1,pi1](xi1,xi2,a) + [pi2,pi2](xi1,xi2,c) - 2[pi1,pi2](xi1,xi2,b)
    with the twisted bracket throughout.  On chained triples this equals
    twice the raw relation torsion; either vanishes exactly when the other
    does.
    """
    alpha, beta, gamma = triple
    total = J.algebroid.zero_scalar()
    for left, right, arg in (
        (pi1, pi1, alpha),
        (pi2, pi2, gamma),
    ):
        br = phi0_schouten(J, left, right)
        if not br.is_zero:
            total = total + eval_on(br, (xi1, xi2, arg))
    cross = phi0_schouten(J, pi1, pi2)
    if not cross.is_zero:
        total = total - 2 * eval_on(cross, (xi1, xi2, beta))
    return total


# -- pair verdicts ----------------------------------------------------------

STRATEGY_AUTO = "auto"
STRATEGY_COMPAT = "compatibility_sufficient"
STRATEGY_INVERT = "invertible_reduction"
STRATEGY_WITNESS = "witness_triples"

_STRATEGIES = (STRATEGY_AUTO, STRATEGY_COMPAT, STRATEGY_INVERT, STRATEGY_WITNESS)

DataLike = Union[JacobiAlgebroidData, JacobiBialgebroidData]


def _as_bialgebroid(data: DataLike) -> JacobiBialgebroidData:
    if isinstance(data, JacobiBialgebroidData):
        return data
    return make_standard_bialgebroid(data)


def _member_gate(
    B: JacobiBialgebroidData, relation: GraphRelation, side: str
) -> Optional[PairVerdict]:
    report = maurer_cartan_check(B, relation.section)
    if report.ok:
        return None
    return PairVerdict(
        FAIL,
        strategy="member validity",
        witness=f"{side} member fails its structure equation: {report.witness}",
    )


def _tensor_verdict(N: TensorMap, note: str) -> PairVerdict:
    report = torsion_tensor_check(N)
    return PairVerdict(report.status, strategy=note, witness=report.witness)


def _sharp_sharp(
    J: JacobiAlgebroidData,
    pi1: MultiVector,
    pi2: MultiVector,
    strategy: str,
    triples: Optional[Sequence[WitnessItem]],
) -> PairVerdict:
    if strategy in (STRATEGY_AUTO, STRATEGY_COMPAT):
        mixed = phi0_schouten(J, pi1, pi2)
        if mixed.is_zero:
            return PairVerdict(PASS, strategy="bracket compatibility")
        if strategy == STRATEGY_COMPAT:
            return PairVerdict(
                INCONCLUSIVE,
                strategy="bracket compatibility",
                witness=f"mixed bracket = {mixed}; the test is only sufficient",
            )
    if strategy in (STRATEGY_AUTO, STRATEGY_INVERT):
        m1 = sharp_map(pi1)
        m2 = sharp_map(pi2)
        if m2.is_unit_determinant():
            return _tensor_verdict(
                m1.compose(m2.inverse()), "tensor reduction through the second sharp"
            )
        if m1.is_unit_determinant():
            return _tensor_verdict(
                m2.compose(m1.inverse()), "tensor reduction through the first sharp"
            )
        if strategy == STRATEGY_INVERT:
            return PairVerdict(
                INCONCLUSIVE,
                strategy="tensor reduction",
                witness="neither sharp map has unit determinant",
            )
    if strategy in (STRATEGY_AUTO, STRATEGY_WITNESS) and triples:
        used = 0
        for xi1, xi2, triple in triples:
            if not valid_triple(pi1, pi2, triple):
                continue
            used += 1
            value = torsion_triple(J, pi1, pi2, xi1, xi2, triple)
            if not value.is_zero:
                return PairVerdict(
                    FAIL,
                    strategy="witness triples",
                    witness=f"torsion value {value} on a chained triple",
                )
        if used:
            return PairVerdict(
                INCONCLUSIVE,
                strategy="witness triples",
                witness=f"{used} chained triples vanish; evidence only",
            )
        return PairVerdict(
            INCONCLUSIVE,
            strategy="witness triples",
            witness="no supplied triple satisfies the chain condition",
        )
    return PairVerdict(
        INCONCLUSIVE,
        strategy="no complete strategy",
        witness="bivector pair with degenerate sharps and no witnesses",
    )


def _flat_flat(
    om1: Form, om2: Form, strategy: str
) -> PairVerdict:
    if strategy == STRATEGY_WITNESS:
        raise ValueError(
            "witness triples are only supported for two bivector graphs"
        )
    m1 = flat_map(om1)
    m2 = flat_map(om2)
    if m2.is_unit_determinant():
        return _tensor_verdict(
            m2.inverse().compose(m1), "tensor reduction through the second flat"
        )
    if m1.is_unit_determinant():
        return _tensor_verdict(
            m1.inverse().compose(m2), "tensor reduction through the first flat"
        )
    return PairVerdict(
        INCONCLUSIVE,
        strategy="tensor reduction",
        witness="neither flat map has unit determinant",
    )


def dirac_pair_check(
    data: DataLike,
    left: GraphRelation,
    right: GraphRelation,
    strategy: str = STRATEGY_AUTO,
    triples: Optional[Sequence[WitnessItem]] = None,
) -> PairVerdict:
    """Grade a pair of graphs: members first, then the composed relation.

    Mixed pairs always reduce to an honest endomorphism, so their verdicts
    are complete.  Matched pairs go through the strategy ladder; a verdict
    of ``inconclusive`` means no complete strategy applied, never that an
    obstruction was found.
    """
    if strategy not in _STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    B = _as_bialgebroid(data)
    if left.algebroid is not B.A or right.algebroid is not B.A:
        raise MismatchError("graph members live over a different algebroid")
    for relation, side in ((left, "left"), (right, "right")):
        bad = _member_gate(B, relation, side)
        if bad is not None:
            return bad
    J = B.a_side
    if left.kind == KIND_SHARP and right.kind == KIND_FLAT:
        N = left.music().compose(right.music())
        return _tensor_verdict(N, "tensor composition sharp after flat")
    if left.kind == KIND_FLAT and right.kind == KIND_SHARP:
        # Transposing the pair transposes the relation and keeps the torsion.
        N = right.music().compose(left.music())
        return _tensor_verdict(N, "tensor composition sharp after flat (transposed)")
    if left.kind == KIND_SHARP:
        return _sharp_sharp(J, left.section, right.section, strategy, triples)
    return _flat_flat(left.section, right.section, strategy)


# -- bivector-with-form and form-with-endomorphism structures ----------------

def _closedness(J: JacobiAlgebroidData, omega: Form) -> Section:
    return differential(J, omega)


def jomega_check(
    J: JacobiAlgebroidData, pi: MultiVector, omega: Form
) -> CheckReport:
    """Bivector-form pair: bivector integrable, both forms closed.

    The partner form is the original one precomposed with the recursion
    endomorphism sharp-after-flat; its closedness is the only coupling
    condition between the two inputs.
    """
    base = jacobi_check(J, pi)
    if not base.ok:
        return CheckReport(
            FAIL, witness=f"bivector: {base.witness}", strategy="component checks"
        )
    d_omega = _closedness(J, omega)
    if not d_omega.is_zero:
        return CheckReport(
            FAIL, witness=f"form not closed: {d_omega}", strategy="component checks"
        )
    N = sharp_map(pi).compose(flat_map(omega))
    omega_n = two_form_of(flat_map(omega).compose(N))
    d_omega_n = _closedness(J, omega_n)
    if not d_omega_n.is_zero:
        return CheckReport(
            FAIL,
            witness=f"recursion image of the form not closed: {d_omega_n}",
            strategy="component checks",
        )
    return CheckReport(PASS, strategy="component checks")


def omegan_check(
    J: JacobiAlgebroidData, omega: Form, N: TensorMap, weak: bool = False
) -> CheckReport:
    """Form-endomorphism pair: commutation, torsion, and two closed forms.

    ``weak`` replaces vanishing of the torsion itself by vanishing of its
    image under the flat map of the form.
    """
    if N.source != "A" or N.target != "A":
        raise MismatchError("the endomorphism must act on the algebroid side")
    A = J.algebroid
    fl = flat_map(omega)
    commute = fl.compose(N) - N.dual().compose(fl)
    if not commute.is_zero:
        return CheckReport(
            FAIL,
            witness="flat does not intertwine the endomorphism with its dual",
            strategy="matrix commutation",
        )
    for i in range(A.rank):
        for j in range(i + 1, A.rank):
            value = torsion_tensor(
                N, MultiVector.frame(A, i), MultiVector.frame(A, j)
            )
            if weak:
                value = fl.apply(value)
            if not value.is_zero:
                where = f"({A.frame_labels[i]}, {A.frame_labels[j]})"
                kind = "flattened torsion" if weak else "torsion"
                return CheckReport(
                    FAIL,
                    witness=f"{kind} at {where} = {value}",
                    strategy="torsion on frame pairs",
                )
    d_omega = _closedness(J, omega)
    if not d_omega.is_zero:
        return CheckReport(
            FAIL, witness=f"form not closed: {d_omega}", strategy="closedness"
        )
    omega_n = two_form_of(fl.compose(N))
    d_omega_n = _closedness(J, omega_n)
    if not d_omega_n.is_zero:
        return CheckReport(
            FAIL,
            witness=f"composed form not closed: {d_omega_n}",
            strategy="closedness",
        )
    label = "weak commutation/torsion/closedness" if weak else (
        "commutation/torsion/closedness"
    )
    return CheckReport(PASS, strategy=label)


# -- named pair wrappers -----------------------------------------------------

def jacobi_pair_check(
    J: JacobiAlgebroidData,
    pi1: MultiVector,
    pi2: MultiVector,
    strategy: str = STRATEGY_AUTO,
    triples: Optional[Sequence[WitnessItem]] = None,
) -> PairVerdict:
    """Two integrable bivectors whose graphs form a compatible pair."""
    return dirac_pair_check(
        J,
        GraphRelation.of_bivector(pi1),
        GraphRelation.of_bivector(pi2),
        strategy=strategy,
        triples=triples,
    )


def presymplectic_pair_check(
    J: JacobiAlgebroidData,
    om1: Form,
    om2: Form,
    strategy: str = STRATEGY_AUTO,
) -> PairVerdict:
    """Two closed forms whose graphs form a compatible pair."""
    return dirac_pair_check(
        J,
        GraphRelation.of_two_form(om1),
        GraphRelation.of_two_form(om2),
        strategy=strategy,
    )


def symplectic_pair_check(
    J: JacobiAlgebroidData, om1: Form, om2: Form
) -> PairVerdict:
    """Presymplectic pair with both flats invertible over the patch ring."""
    for omega, side in ((om1, "left"), (om2, "right")):
        report = nondegenerate_check(flat_map(omega))
        if not report.ok:
            return PairVerdict(
                FAIL,
                strategy="non-degeneracy",
                witness=f"{side} form is degenerate: {report.witness}",
            )
    return presymplectic_pair_check(J, om1, om2)


def hamiltonian_pair_check(
    J: JacobiAlgebroidData, pi1: MultiVector, pi2: MultiVector
) -> PairVerdict:
    """Sufficient test: both bivectors integrable and their bracket zero.

    A compatible pair is always a compatible graph pair; the converse needs
    an image condition this checker does not decide, so a nonzero bracket
    only downgrades the verdict to inconclusive (unless a member fails).
    """
    for pi, side in ((pi1, "left"), (pi2, "right")):
        report = jacobi_check(J, pi)
        if not report.ok:
            return PairVerdict(
                FAIL,
                strategy="member validity",
                witness=f"{side} member fails its structure equation: {report.witness}",
            )
    mixed = phi0_schouten(J, pi1, pi2)
    if mixed.is_zero:
        return PairVerdict(PASS, strategy="bracket compatibility")
    return PairVerdict(
        INCONCLUSIVE,
        strategy="bracket compatibility",
        witness=f"mixed bracket = {mixed}; compatibility is only sufficient",
    )


def condition_image_check(
    pi1: MultiVector, pi2: MultiVector
) -> CheckReport:
    """Full-preimage condition on the two sharps.

    The condition compares preimages of images of the two sharp maps; over
    this coefficient ring it is only decidable when both maps are invertible
    (then both preimages are everything).  Anything else is reported as
    not decided rather than guessed.
    """
    u1 = sharp_map(pi1).is_unit_determinant()
    u2 = sharp_map(pi2).is_unit_determinant()
    if u1 and u2:
        return CheckReport(PASS, strategy="unit determinants: preimages are full")
    lacking = []
    if not u1:
        lacking.append("first")
    if not u2:
        lacking.append("second")
    which = " and ".join(lacking)
    return CheckReport(
        NOT_DECIDED,
        witness=f"{which} sharp map lacks unit determinant",
        strategy="image condition undecidable over the coefficient ring",
    )
