"""Exact scalar arithmetic: finite sums of exp(k*t) times rational polynomials.

A value is  sum_k exp(k*t) * p_k(x1, ..., xn, t)  with integer weights k and
each p_k a polynomial over the rationals in the patch coordinates and the
formal variable t.  The representation

    terms: {weight k -> {exponent tuple -> Fraction}}

is canonical because nothing in the ring rewrites between powers of t and
exponentials: two values are equal iff their cleaned dicts are equal.  The
variable tuple always lists the coordinates first and ``t`` last, and every
exponent tuple has the same length as the variable tuple.

This ring is not a field.  The only invertible elements are q * exp(k*t) with
q a nonzero rational; ``unit_inverse`` raises :class:`NotInvertible` for
anything else (including honest polynomials like 1 + x1).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

Exponent = Tuple[int, ...]
PolyDict = Dict[Exponent, Fraction]
TermsDict = Dict[int, PolyDict]
Scalar = Union[int, Fraction]


class NotInvertible(ArithmeticError):
    """Raised when an exact inverse does not exist in the ring."""


class VariableSetMismatch(ValueError):
    """Raised when two values over different variable tuples are combined."""


class UnknownVariable(ValueError):
    """Raised when a name is not among a value's variables."""


class MissingAssignment(ValueError):
    """Raised by evaluate() when a variable is left unassigned."""


def _as_fraction(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an int or Fraction, got {value!r}")


def _poly_mul(p: PolyDict, q: PolyDict) -> PolyDict:
    out: PolyDict = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            key = tuple(a + b for a, b in zip(ea, eb))
            c = out.get(key, _ZERO_FRAC) + ca * cb
            if c:
                out[key] = c
            else:
                out.pop(key, None)
    return out


_ZERO_FRAC = Fraction(0)


class ExpPoly:
    """One element of the coefficient ring, canonical by construction."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Tuple[str, ...], terms: TermsDict):
        clean: TermsDict = {}
        for weight, poly in terms.items():
            kept = {e: c for e, c in poly.items() if c}
            for e in kept:
                if len(e) != len(variables):
                    raise ValueError(
                        f"exponent {e} does not match variables {variables}"
                    )
            if kept:
                clean[weight] = kept
        object.__setattr__(self, "vars", tuple(variables))
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("ExpPoly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, variables: Tuple[str, ...]) -> "ExpPoly":
        return cls(variables, {})

    @classmethod
    def const(cls, variables: Tuple[str, ...], value: Scalar) -> "ExpPoly":
        c = _as_fraction(value)
        if not c:
            return cls.zero(variables)
        unit = tuple(0 for _ in variables)
        return cls(variables, {0: {unit: c}})

    @classmethod
    def var(cls, variables: Tuple[str, ...], name: str) -> "ExpPoly":
        if name not in variables:
            raise UnknownVariable(f"{name!r} is not one of {variables}")
        exp = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {0: {exp: Fraction(1)}})

    @classmethod
    def exp(cls, variables: Tuple[str, ...], weight: int) -> "ExpPoly":
        """The unit exp(weight * t)."""
        unit = tuple(0 for _ in variables)
        return cls(variables, {int(weight): {unit: Fraction(1)}})

    # -- ring structure ----------------------------------------------------

    def _check_vars(self, other: "ExpPoly") -> None:
        if self.vars != other.vars:
            raise VariableSetMismatch(
                f"cannot combine values over {self.vars} and {other.vars}"
            )

    def _coerce(self, other: object) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            self._check_vars(other)
            return other
        if isinstance(other, (int, Fraction)):
            return ExpPoly.const(self.vars, other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> "ExpPoly":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        terms: TermsDict = {k: dict(p) for k, p in self.terms.items()}
        for weight, poly in rhs.terms.items():
            acc = terms.setdefault(weight, {})
            for e, c in poly.items():
                acc[e] = acc.get(e, _ZERO_FRAC) + c
        return ExpPoly(self.vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(
            self.vars,
            {k: {e: -c for e, c in p.items()} for k, p in self.terms.items()},
        )

    def __sub__(self, other: object) -> "ExpPoly":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> "ExpPoly":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other: object) -> "ExpPoly":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        terms: TermsDict = {}
        for ka, pa in self.terms.items():
            for kb, pb in rhs.terms.items():
                prod = _poly_mul(pa, pb)
                acc = terms.setdefault(ka + kb, {})
                for e, c in prod.items():
                    acc[e] = acc.get(e, _ZERO_FRAC) + c
        return ExpPoly(self.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "ExpPoly":
        if not isinstance(power, int) or power < 0:
            raise ValueError(f"only nonnegative integer powers, got {power!r}")
        out = ExpPoly.const(self.vars, 1)
        for _ in range(power):
            out = out * self
        return out

    def times_exp(self, weight: int) -> "ExpPoly":
        """Multiply by the unit exp(weight * t): shifts every weight."""
        return ExpPoly(
            self.vars, {k + int(weight): dict(p) for k, p in self.terms.items()}
        )

    # -- calculus ----------------------------------------------------------

    def diff(self, name: str) -> "ExpPoly":
        """Partial derivative.  d/dt also differentiates the exp weights:
        exp(k*t) * p  ->  exp(k*t) * (k*p + dp/dt)."""
        if name not in self.vars:
            raise UnknownVariable(f"{name!r} is not one of {self.vars}")
        idx = self.vars.index(name)
        is_t = name == "t"
        terms: TermsDict = {}
        for weight, poly in self.terms.items():
            acc = terms.setdefault(weight, {})
            for e, c in poly.items():
                if e[idx]:
                    key = tuple(
                        v - 1 if i == idx else v for i, v in enumerate(e)
                    )
                    acc[key] = acc.get(key, _ZERO_FRAC) + c * e[idx]
                if is_t and weight:
                    acc[e] = acc.get(e, _ZERO_FRAC) + c * weight
        return ExpPoly(self.vars, terms)

    def evaluate(
        self, assignment: Mapping[str, Scalar], exp_t: Scalar
    ) -> Fraction:
        """Exact value at a rational point; exp_t stands in for exp(t)."""
        for name in assignment:
            if name not in self.vars:
                raise UnknownVariable(f"{name!r} is not one of {self.vars}")
        point = []
        for name in self.vars:
            if name not in assignment:
                raise MissingAssignment(f"no value given for {name!r}")
            point.append(_as_fraction(assignment[name]))
        base = _as_fraction(exp_t)
        if not base:
            raise ValueError("exp_t stand-in must be nonzero")
        total = Fraction(0)
        for weight, poly in self.terms.items():
            psum = Fraction(0)
            for e, c in poly.items():
                term = c
                for value, power in zip(point, e):
                    term *= value**power
                psum += term
            total += psum * base**weight
        return total

    # -- predicates and inversion -----------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def as_fraction(self) -> Fraction:
        """The value as a plain rational, if it is one."""
        if not self.terms:
            return Fraction(0)
        unit = tuple(0 for _ in self.vars)
        if set(self.terms) == {0} and set(self.terms[0]) == {unit}:
            return self.terms[0][unit]
        raise ValueError(f"{self} is not a rational constant")

    def is_unit(self) -> bool:
        """True iff the value is q * exp(k*t) with q a nonzero rational."""
        if len(self.terms) != 1:
            return False
        (poly,) = self.terms.values()
        unit = tuple(0 for _ in self.vars)
        return set(poly) == {unit}

    def unit_inverse(self) -> "ExpPoly":
        if not self.is_unit():
            raise NotInvertible(f"{self} is not a unit in the ring")
        ((weight, poly),) = self.terms.items()
        unit = tuple(0 for _ in self.vars)
        return ExpPoly(self.vars, {-weight: {unit: 1 / poly[unit]}})

    # -- canonical order and text form ------------------------------------

    def _sorted_monomials(self, poly: PolyDict) -> Iterable[Exponent]:
        # Graded order first, then lexicographic with t the most significant
        # variable (variable order x1 < ... < xn < t); leading term printed
        # first.
        return sorted(
            poly, key=lambda e: (sum(e), tuple(reversed(e))), reverse=True
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExpPoly):
            if isinstance(other, (int, Fraction)):
                return self == ExpPoly.const(self.vars, other)
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self) -> int:
        frozen = frozenset(
            (k, frozenset(p.items())) for k, p in self.terms.items()
        )
        return hash((self.vars, frozen))

    def _term_text(self, weight: int, e: Exponent, c: Fraction) -> str:
        factors = []
        for name, power in zip(self.vars, e):
            if power == 1:
                factors.append(name)
            elif power > 1:
                factors.append(f"{name}^{power}")
        if weight == 1:
            factors.append("exp(t)")
        elif weight == -1:
            factors.append("exp(-t)")
        elif weight:
            factors.append(f"exp({weight}*t)")
        mag = abs(c)
        if mag != 1 or not factors:
            factors.insert(0, str(mag))
        return "*".join(factors)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for weight in sorted(self.terms):
            poly = self.terms[weight]
            for e in self._sorted_monomials(poly):
                c = poly[e]
                text = self._term_text(weight, e, c)
                if not pieces:
                    pieces.append(text if c > 0 else f"-{text}")
                else:
                    pieces.append(f"+ {text}" if c > 0 else f"- {text}")
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"ExpPoly({self})"

    def __bool__(self) -> bool:
        return bool(self.terms)
