"""Script interpreter and report front end.

Runs a declarations-then-checks script (see the companion syntax module),
collects one record per check, and prints either an aligned text table or
a stable JSON document.  Evaluation problems inside a check become
``error`` records; problems inside a declaration stop the run, since every
later line may depend on the broken name.

Exit codes: 0 all checks pass, 1 some check failed, 2 syntax or
declaration error, 3 undecided checks present under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from . import dsl
from .algebroid import (
    AlgebroidPatch,
    JacobiAlgebroidData,
    Patch,
    extend_with_R,
    make_tangent,
    make_trivial,
    validate_algebroid,
)
from .calculus import (
    Form,
    MismatchError,
    MultiVector,
    Section,
    contract,
    differential,
    eval_on,
    merge,
    pair,
    phi0_schouten,
    split,
    wedge,
)
from .coeff import ExpPoly, NotInvertible
from .dirac import (
    GraphRelation,
    INCONCLUSIVE_SET,
    condition_image_check,
    dirac_pair_check,
    hamiltonian_pair_check,
    jacobi_pair_check,
    jomega_check,
    omegan_check,
    presymplectic_pair_check,
    symplectic_pair_check,
    torsion_tensor_check,
)
from .lift import (
    lift_bialgebroid,
    lift_instance,
    theorem_main1_crosscheck,
    verify_bracket_scaling,
    verify_hat_bar_differentials,
)
from .structures import (
    CheckReport,
    JacobiBialgebroidData,
    TensorMap,
    bialgebroid_compat_check,
    bivector_of,
    flat_map,
    graph_closure_check,
    jacobi_check,
    make_standard_bialgebroid,
    maurer_cartan_check,
    nondegenerate_check,
    omega_from_pi,
    pi_from_omega,
    presymplectic_check,
    sharp_map,
    two_form_of,
)

Value = object


@dataclass(eq=False)
class LiftHandle:
    """A dual pair remembered together with its lift over the line."""

    source: JacobiBialgebroidData
    upstairs: JacobiBialgebroidData


@dataclass(frozen=True)
class CheckRecord:
    name: str
    status: str  # pass | fail | not-decided | error
    strategy: str
    witness: Optional[str] = None


@dataclass
class RunReport:
    records: List[CheckRecord]

    def counts(self) -> Dict[str, int]:
        out = {"pass": 0, "fail": 0, "not_decided": 0, "error": 0}
        for rec in self.records:
            out[rec.status.replace("-", "_")] += 1
        return out

    def exit_code(self, strict: bool = False) -> int:
        c = self.counts()
        if c["error"]:
            return 2
        if c["fail"]:
            return 1
        if strict and c["not_decided"]:
            return 3
        return 0


def _normalize_status(status: str) -> str:
    if status in ("not_decided", "inconclusive"):
        return "not-decided"
    return status


# -- interpreter ------------------------------------------------------------

def _as_bialgebroid(value: Value) -> JacobiBialgebroidData:
    if isinstance(value, JacobiBialgebroidData):
        return value
    if isinstance(value, JacobiAlgebroidData):
        return make_standard_bialgebroid(value)
    raise MismatchError("expected twisted data or a dual pair")


def _as_jacobi(value: Value) -> JacobiAlgebroidData:
    if isinstance(value, JacobiAlgebroidData):
        return value
    if isinstance(value, AlgebroidPatch):
        return JacobiAlgebroidData(value, Form.zero(value, 1))
    raise MismatchError("expected an algebroid or twisted data")


def _scalarize(value: Value, like: Value) -> Value:
    """Promote a rational constant next to a ring element."""
    if isinstance(value, Fraction) and isinstance(like, ExpPoly):
        return ExpPoly.const(like.vars, value)
    return value


class Interpreter:
    def __init__(self) -> None:
        self.env: Dict[str, Value] = {}
        self.ambient: Optional[AlgebroidPatch] = None
        self.records: List[CheckRecord] = []

    # ---- name and frame-token resolution

    def lookup(self, ident: str, line: int) -> Value:
        if ident in self.env:
            return self.env[ident]
        token = self._frame_token(ident)
        if token is not None:
            return token
        raise dsl.ScriptError(f"unknown name {ident!r}", line)

    def _frame_token(self, ident: str) -> Optional[Value]:
        A = self.ambient
        if A is None:
            return None
        if ident == "t":
            return ExpPoly.var(A.patch.variables, "t")
        if ident in A.patch.coords:
            return A.patch.coord(ident)
        if ident == "ehat" and getattr(A, "ext_base", None) is not None:
            return MultiVector.frame(A, A.rank - 1)
        if ident == "epshat" and getattr(A, "ext_base", None) is not None:
            return Form.coframe(A, A.rank - 1)
        if ident.startswith("eps") and ident[3:].isdigit():
            i = int(ident[3:])
            if 1 <= i <= A.rank:
                return Form.coframe(A, i - 1)
        if ident.startswith("dd") and ident[2:] in A.patch.coords:
            i = A.patch.coords.index(ident[2:])
            if i < A.rank:
                return MultiVector.frame(A, i)
        if ident.startswith("d") and ident[1:] in A.patch.coords:
            i = A.patch.coords.index(ident[1:])
            if i < A.rank:
                return Form.coframe(A, i)
        if ident.startswith("e") and ident[1:].isdigit():
            i = int(ident[1:])
            if 1 <= i <= A.rank:
                return MultiVector.frame(A, i - 1)
        return None

    # ---- expression evaluation

    def eval(self, e: dsl.Expr, line: int) -> Value:
        if isinstance(e, dsl.Num):
            return e.value
        if isinstance(e, dsl.Name):
            return self.lookup(e.ident, line)
        if isinstance(e, dsl.Neg):
            v = self.eval(e.inner, line)
            if isinstance(v, (Fraction, ExpPoly, MultiVector, Form, TensorMap)):
                return -v
            raise dsl.ScriptError("cannot negate this value", line)
        if isinstance(e, dsl.Tup):
            return tuple(self.eval(item, line) for item in e.items)
        if isinstance(e, dsl.GraphLit):
            inner = self.eval(e.inner, line)
            if e.kind == "sharp":
                if not isinstance(inner, MultiVector):
                    raise dsl.ScriptError("sharp graph needs a bivector", line)
                return GraphRelation.of_bivector(inner)
            if not isinstance(inner, Form):
                raise dsl.ScriptError("flat graph needs a two-form", line)
            return GraphRelation.of_two_form(inner)
        if isinstance(e, dsl.Bin):
            return self._binary(e, line)
        if isinstance(e, dsl.Call):
            return self._call(e, line)
        raise dsl.ScriptError(f"cannot evaluate {e!r}", line)

    def _binary(self, e: dsl.Bin, line: int) -> Value:
        left = self.eval(e.left, line)
        right = self.eval(e.right, line)
        try:
            return self._apply_binary(e.op, left, right, line)
        except (MismatchError, NotInvertible, TypeError, ValueError) as exc:
            raise dsl.ScriptError(str(exc), line)

    def _apply_binary(self, op: str, left: Value, right: Value, line: int) -> Value:
        left = _scalarize(left, right)
        right = _scalarize(right, left)
        if op in ("+", "-"):
            if type(left) is not type(right) and not (
                isinstance(left, (Fraction, ExpPoly))
                and isinstance(right, (Fraction, ExpPoly))
            ):
                raise dsl.ScriptError("mismatched operands for +/-", line)
            return left + right if op == "+" else left - right
        if op == "*":
            if isinstance(left, (Fraction, ExpPoly)):
                if isinstance(right, TensorMap):
                    return right.scale(left)
                return left * right
            if isinstance(right, (Fraction, ExpPoly)):
                if isinstance(left, TensorMap):
                    return left.scale(right)
                return right * left
            raise dsl.ScriptError("* needs a scalar on one side", line)
        if op == "^":
            if isinstance(right, Fraction):
                if right.denominator != 1 or right < 1:
                    raise dsl.ScriptError("wedge power needs a positive integer", line)
                if not isinstance(left, (MultiVector, Form)):
                    raise dsl.ScriptError("wedge power needs a section", line)
                out = left
                for _ in range(int(right) - 1):
                    out = wedge(out, left)
                return out
            if isinstance(left, (MultiVector, Form)) and type(left) is type(right):
                return wedge(left, right)
            raise dsl.ScriptError("^ joins two sections of the same kind", line)
        if op == ".":
            if isinstance(left, TensorMap) and isinstance(right, TensorMap):
                return left.compose(right)
            raise dsl.ScriptError(". composes two maps", line)
        raise dsl.ScriptError(f"unknown operator {op!r}", line)

    def _call(self, e: dsl.Call, line: int) -> Value:
        args = [self.eval(a, line) for a in e.args]
        fn = _FUNCTIONS.get(e.func)
        if fn is None:
            raise dsl.ScriptError(f"unknown function {e.func!r}", line)
        try:
            return fn(self, args, line)
        except (MismatchError, NotInvertible, TypeError, ValueError) as exc:
            raise dsl.ScriptError(f"{e.func}: {exc}", line)

    # ---- statements

    def run(self, script: dsl.Script) -> RunReport:
        for stmt in script.statements:
            if isinstance(stmt, dsl.CheckStmt):
                self._run_check(stmt)
            else:
                try:
                    self._run_decl(stmt)
                except dsl.ScriptError:
                    raise
                except (MismatchError, NotInvertible, TypeError,
                        ValueError) as exc:
                    raise dsl.ScriptError(str(exc), stmt.line)
        return RunReport(self.records)

    def _bind(self, name: str, value: Value, line: int) -> None:
        if name in self.env:
            raise dsl.ScriptError(f"name {name!r} is already bound", line)
        self.env[name] = value

    def _run_decl(self, stmt: Union[dsl.PatchDecl, dsl.Decl]) -> None:
        if isinstance(stmt, dsl.PatchDecl):
            self._bind(stmt.name, Patch(stmt.coords), stmt.line)
            return
        value = self.eval(stmt.value, stmt.line)
        kw = stmt.keyword
        if kw == "algebroid":
            if not isinstance(value, AlgebroidPatch):
                raise dsl.ScriptError("algebroid declaration needs an algebroid",
                                      stmt.line)
            self.ambient = value
        elif kw == "jacobi":
            value = self._coerce_jacobi(value, stmt.line)
            self.ambient = value.algebroid
        elif kw == "bialgebroid":
            if not isinstance(value, JacobiBialgebroidData):
                raise dsl.ScriptError("bialgebroid declaration needs a dual pair",
                                      stmt.line)
            self.ambient = value.A
        elif kw == "lift":
            if not isinstance(value, LiftHandle):
                raise dsl.ScriptError("lift declaration needs jacobize(..)",
                                      stmt.line)
        elif kw == "form":
            if isinstance(value, (Fraction, ExpPoly)) and _is_zero(value):
                raise dsl.ScriptError("use zero_form(A, degree) for a zero form",
                                      stmt.line)
            if not isinstance(value, Form):
                raise dsl.ScriptError("form declaration needs a form", stmt.line)
        elif kw == "section":
            if not isinstance(value, MultiVector):
                raise dsl.ScriptError("section declaration needs a multivector",
                                      stmt.line)
        elif kw == "scalar":
            if isinstance(value, Fraction):
                if self.ambient is None:
                    raise dsl.ScriptError("no ambient algebroid for a constant",
                                          stmt.line)
                value = ExpPoly.const(self.ambient.patch.variables, value)
            if not isinstance(value, ExpPoly):
                raise dsl.ScriptError("scalar declaration needs a ring element",
                                      stmt.line)
        elif kw == "map":
            if not isinstance(value, TensorMap):
                raise dsl.ScriptError("map declaration needs a tensor map",
                                      stmt.line)
        self._bind(stmt.name, value, stmt.line)

    def _coerce_jacobi(self, value: Value, line: int) -> JacobiAlgebroidData:
        if isinstance(value, JacobiAlgebroidData):
            return value
        if isinstance(value, tuple) and len(value) == 2:
            base, twist = value
            if not isinstance(base, AlgebroidPatch):
                raise dsl.ScriptError("first slot must be an algebroid", line)
            if isinstance(twist, (Fraction, ExpPoly)) and _is_zero(twist):
                twist = Form.zero(base, 1)
            if not isinstance(twist, Form) or twist.degree != 1:
                raise dsl.ScriptError("second slot must be a degree-1 form", line)
            return JacobiAlgebroidData(base, twist)
        raise dsl.ScriptError("jacobi declaration needs (A, phi) or extend(A)", line)

    def _run_check(self, stmt: dsl.CheckStmt) -> None:
        name = f"[L{stmt.line}] " + dsl.render_statement(stmt)[len("check "):]
        handler = _CHECKS.get(stmt.subcommand)
        if handler is None:
            self.records.append(
                CheckRecord(name, "error", "dispatch",
                            f"unknown check {stmt.subcommand!r}")
            )
            return
        try:
            args = [self.eval(a, stmt.line) for a in stmt.args]
            options = dict(stmt.options)
            report = handler(self, args, options, stmt.line)
        except (dsl.ScriptError, MismatchError, NotInvertible,
                TypeError, ValueError) as exc:
            self.records.append(CheckRecord(name, "error", "evaluation", str(exc)))
            return
        self.records.append(
            CheckRecord(
                name,
                _normalize_status(report.status),
                report.strategy or "",
                report.witness,
            )
        )


def _is_zero(value: Value) -> bool:
    if isinstance(value, Fraction):
        return value == 0
    if isinstance(value, ExpPoly):
        return value.is_zero
    if isinstance(value, (MultiVector, Form)):
        return value.is_zero
    if isinstance(value, TensorMap):
        return value.is_zero
    return False


# -- script functions -------------------------------------------------------

def _need(args: Sequence[Value], count: int, what: str, line: int) -> None:
    if len(args) != count:
        raise dsl.ScriptError(f"{what} takes {count} argument(s)", line)


def _fn_tangent(interp, args, line):
    _need(args, 1, "tangent", line)
    if not isinstance(args[0], Patch):
        raise dsl.ScriptError("tangent needs a patch", line)
    return make_tangent(args[0])


def _fn_trivial(interp, args, line):
    _need(args, 2, "trivial", line)
    patch, rank = args
    if not isinstance(patch, Patch) or not isinstance(rank, Fraction):
        raise dsl.ScriptError("trivial needs a patch and a rank", line)
    return make_trivial(patch, int(rank))


def _fn_extend(interp, args, line):
    _need(args, 1, "extend", line)
    if not isinstance(args[0], AlgebroidPatch):
        raise dsl.ScriptError("extend needs an algebroid", line)
    return extend_with_R(args[0])


def _fn_standard(interp, args, line):
    _need(args, 1, "standard", line)
    return make_standard_bialgebroid(_as_jacobi(args[0]))


def _fn_couple(interp, args, line):
    _need(args, 2, "couple", line)
    a, b = args
    if not isinstance(a, JacobiAlgebroidData) or not isinstance(
        b, JacobiAlgebroidData
    ):
        raise dsl.ScriptError("couple needs two twisted sides", line)
    return JacobiBialgebroidData(a, b)


def _fn_jacobize(interp, args, line):
    _need(args, 1, "jacobize", line)
    B = _as_bialgebroid(args[0])
    return LiftHandle(B, lift_bialgebroid(B))


def _fn_d(interp, args, line):
    _need(args, 2, "d", line)
    J = _as_jacobi(args[0])
    target = args[1]
    if isinstance(target, (Fraction, ExpPoly)):
        scalar = target
        if isinstance(scalar, Fraction):
            scalar = ExpPoly.const(J.algebroid.patch.variables, scalar)
        target = Form(J.algebroid, 0, {} if scalar.is_zero else {(): scalar})
    if not isinstance(target, (Form, MultiVector)):
        raise dsl.ScriptError("d needs a section", line)
    return differential(J, target)


def _fn_d_phi(interp, args, line):
    _need(args, 2, "d_phi", line)
    if not isinstance(args[0], JacobiAlgebroidData):
        raise dsl.ScriptError("d_phi needs twisted data first", line)
    return _fn_d(interp, args, line)


def _fn_schouten(interp, args, line):
    _need(args, 3, "schouten", line)
    J = _as_jacobi(args[0])
    a, b = args[1], args[2]
    if not isinstance(a, MultiVector) or not isinstance(b, MultiVector):
        raise dsl.ScriptError("schouten needs two multivectors", line)
    return phi0_schouten(J, a, b)


def _fn_iota(interp, args, line):
    _need(args, 2, "iota", line)
    return contract(args[0], args[1])


def _fn_pair(interp, args, line):
    _need(args, 2, "pair", line)
    return pair(args[0], args[1])


def _fn_eval_on(interp, args, line):
    if len(args) < 2:
        raise dsl.ScriptError("eval_on takes a section then arguments", line)
    return eval_on(args[0], args[1:])


def _fn_sharp(interp, args, line):
    _need(args, 1, "sharp", line)
    if not isinstance(args[0], MultiVector):
        raise dsl.ScriptError("sharp needs a bivector", line)
    return sharp_map(args[0])


def _fn_flat(interp, args, line):
    _need(args, 1, "flat", line)
    if not isinstance(args[0], Form):
        raise dsl.ScriptError("flat needs a two-form", line)
    return flat_map(args[0])


def _fn_inverse(interp, args, line):
    _need(args, 1, "inverse", line)
    if not isinstance(args[0], TensorMap):
        raise dsl.ScriptError("inverse needs a map", line)
    return args[0].inverse()


def _fn_dual(interp, args, line):
    _need(args, 1, "dual", line)
    if not isinstance(args[0], TensorMap):
        raise dsl.ScriptError("dual needs a map", line)
    return args[0].dual()


def _fn_id(interp, args, line):
    _need(args, 1, "id", line)
    if not isinstance(args[0], AlgebroidPatch):
        raise dsl.ScriptError("id needs an algebroid", line)
    return TensorMap.identity(args[0])


def _fn_merge(interp, args, line):
    _need(args, 2, "merge", line)
    holder, tup = args
    ext = holder.algebroid if isinstance(holder, JacobiAlgebroidData) else holder
    if not isinstance(ext, AlgebroidPatch):
        raise dsl.ScriptError("merge needs the extension first", line)
    if not isinstance(tup, tuple) or len(tup) != 2:
        raise dsl.ScriptError("merge needs a pair (P, Q)", line)
    P, Q = tup
    if isinstance(Q, (Fraction, ExpPoly)) and isinstance(P, (Form, MultiVector)):
        scalar = Q
        if isinstance(scalar, Fraction):
            scalar = ExpPoly.const(P.algebroid.patch.variables, scalar)
        kind = type(P)
        Q = kind(P.algebroid, 0, {} if scalar.is_zero else {(): scalar})
    return merge(ext, P, Q)


def _fn_split(interp, args, line):
    _need(args, 1, "split", line)
    if not isinstance(args[0], (Form, MultiVector)):
        raise dsl.ScriptError("split needs a section", line)
    return split(args[0])


def _fn_first(interp, args, line):
    _need(args, 1, "first", line)
    if not isinstance(args[0], tuple) or not args[0]:
        raise dsl.ScriptError("first needs a tuple", line)
    return args[0][0]


def _fn_second(interp, args, line):
    _need(args, 1, "second", line)
    if not isinstance(args[0], tuple) or len(args[0]) < 2:
        raise dsl.ScriptError("second needs a pair", line)
    return args[0][1]


def _fn_pi_from_omega(interp, args, line):
    _need(args, 2, "pi_from_omega", line)
    if not isinstance(args[1], Form):
        raise dsl.ScriptError("pi_from_omega needs a two-form", line)
    return pi_from_omega(_as_jacobi(args[0]), args[1])


def _fn_omega_from_pi(interp, args, line):
    _need(args, 2, "omega_from_pi", line)
    if not isinstance(args[1], MultiVector):
        raise dsl.ScriptError("omega_from_pi needs a bivector", line)
    return omega_from_pi(_as_jacobi(args[0]), args[1])


def _fn_bivector_of(interp, args, line):
    _need(args, 1, "bivector_of", line)
    return bivector_of(args[0])


def _fn_two_form_of(interp, args, line):
    _need(args, 1, "two_form_of", line)
    return two_form_of(args[0])


def _fn_zero_form(interp, args, line):
    _need(args, 2, "zero_form", line)
    holder, deg = args
    A = holder.algebroid if isinstance(holder, JacobiAlgebroidData) else holder
    return Form.zero(A, int(deg))


def _fn_zero_section(interp, args, line):
    _need(args, 2, "zero_section", line)
    holder, deg = args
    A = holder.algebroid if isinstance(holder, JacobiAlgebroidData) else holder
    return MultiVector.zero(A, int(deg))


def _fn_exp_t(interp, args, line):
    _need(args, 1, "exp_t", line)
    if interp.ambient is None:
        raise dsl.ScriptError("no ambient algebroid for exp_t", line)
    k = args[0]
    if not isinstance(k, Fraction) or k.denominator != 1:
        raise dsl.ScriptError("exp_t needs an integer weight", line)
    return ExpPoly.exp(interp.ambient.patch.variables, int(k))


_FUNCTIONS: Dict[str, Callable] = {
    "tangent": _fn_tangent,
    "trivial": _fn_trivial,
    "extend": _fn_extend,
    "standard": _fn_standard,
    "couple": _fn_couple,
    "jacobize": _fn_jacobize,
    "d": _fn_d,
    "d_phi": _fn_d_phi,
    "schouten": _fn_schouten,
    "iota": _fn_iota,
    "pair": _fn_pair,
    "eval_on": _fn_eval_on,
    "sharp": _fn_sharp,
    "flat": _fn_flat,
    "inverse": _fn_inverse,
    "dual": _fn_dual,
    "id": _fn_id,
    "merge": _fn_merge,
    "split": _fn_split,
    "first": _fn_first,
    "second": _fn_second,
    "pi_from_omega": _fn_pi_from_omega,
    "omega_from_pi": _fn_omega_from_pi,
    "bivector_of": _fn_bivector_of,
    "two_form_of": _fn_two_form_of,
    "zero_form": _fn_zero_form,
    "zero_section": _fn_zero_section,
    "exp_t": _fn_exp_t,
}


# -- check handlers ---------------------------------------------------------

def _ck_algebroid(interp, args, options, line) -> CheckReport:
    _need(args, 1, "check algebroid", line)
    A = args[0].algebroid if isinstance(args[0], JacobiAlgebroidData) else args[0]
    if not isinstance(A, AlgebroidPatch):
        raise dsl.ScriptError("check algebroid needs an algebroid", line)
    report = validate_algebroid(A)
    if report.ok:
        return CheckReport("pass", strategy="frame identities")
    label, detail = report.failures[0]
    return CheckReport("fail", witness=f"{label}: {detail}",
                       strategy="frame identities")


def _ck_jacobi(interp, args, options, line) -> CheckReport:
    _need(args, 2, "check jacobi", line)
    return jacobi_check(_as_jacobi(args[0]), args[1])


def _ck_presymplectic(interp, args, options, line) -> CheckReport:
    _need(args, 2, "check presymplectic", line)
    return presymplectic_check(_as_jacobi(args[0]), args[1])


def _ck_nondegenerate(interp, args, options, line) -> CheckReport:
    _need(args, 1, "check nondegenerate", line)
    target = args[0]
    if isinstance(target, MultiVector):
        target = sharp_map(target)
    elif isinstance(target, Form):
        target = flat_map(target)
    if not isinstance(target, TensorMap):
        raise dsl.ScriptError("check nondegenerate needs a map or 2-section", line)
    return nondegenerate_check(target)


def _ck_mc(interp, args, options, line) -> CheckReport:
    _need(args, 2, "check mc", line)
    return maurer_cartan_check(_as_bialgebroid(args[0]), args[1])


def _ck_closure(interp, args, options, line) -> CheckReport:
    _need(args, 2, "check closure", line)
    return graph_closure_check(_as_bialgebroid(args[0]), args[1])


def _ck_bialgebroid(interp, args, options, line) -> CheckReport:
    _need(args, 1, "check bialgebroid", line)
    return bialgebroid_compat_check(_as_bialgebroid(args[0]))


def _pair_verdict_report(verdict) -> CheckReport:
    return CheckReport(verdict.status, witness=verdict.witness,
                       strategy=verdict.strategy)


def _ck_dirac_pair(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check dirac_pair", line)
    data, left, right = args
    if not isinstance(left, GraphRelation) or not isinstance(right, GraphRelation):
        raise dsl.ScriptError(
            "check dirac_pair needs two graph literals (sharp ..)/(flat ..)", line
        )
    strategy = options.get("strategy", "auto")
    verdict = dirac_pair_check(_bialgebroid_or_jacobi(data, line), left, right,
                               strategy=strategy)
    return _pair_verdict_report(verdict)


def _bialgebroid_or_jacobi(value, line):
    if isinstance(value, (JacobiBialgebroidData, JacobiAlgebroidData)):
        return value
    if isinstance(value, AlgebroidPatch):
        return JacobiAlgebroidData(value, Form.zero(value, 1))
    raise dsl.ScriptError("expected twisted data or a dual pair", line)


def _ck_jacobi_pair(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check jacobi_pair", line)
    strategy = options.get("strategy", "auto")
    verdict = jacobi_pair_check(_as_jacobi(args[0]), args[1], args[2],
                                strategy=strategy)
    return _pair_verdict_report(verdict)


def _ck_presymplectic_pair(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check presymplectic_pair", line)
    strategy = options.get("strategy", "auto")
    verdict = presymplectic_pair_check(_as_jacobi(args[0]), args[1], args[2],
                                       strategy=strategy)
    return _pair_verdict_report(verdict)


def _ck_symplectic_pair(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check symplectic_pair", line)
    verdict = symplectic_pair_check(_as_jacobi(args[0]), args[1], args[2])
    return _pair_verdict_report(verdict)


def _ck_hamiltonian_pair(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check hamiltonian_pair", line)
    verdict = hamiltonian_pair_check(_as_jacobi(args[0]), args[1], args[2])
    return _pair_verdict_report(verdict)


def _ck_condition31(interp, args, options, line) -> CheckReport:
    _need(args, 2, "check condition31", line)
    return condition_image_check(args[0], args[1])


def _ck_jomega(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check jomega", line)
    return jomega_check(_as_jacobi(args[0]), args[1], args[2])


def _ck_omegan(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check omegan", line)
    weak = options.get("weak", "false") == "true"
    return omegan_check(_as_jacobi(args[0]), args[1], args[2], weak=weak)


def _ck_torsion(interp, args, options, line) -> CheckReport:
    _need(args, 1, "check torsion", line)
    if not isinstance(args[0], TensorMap):
        raise dsl.ScriptError("check torsion needs a map", line)
    return torsion_tensor_check(args[0])


def _ck_lift_scaling(interp, args, options, line) -> CheckReport:
    if not args or not isinstance(args[0], LiftHandle):
        raise dsl.ScriptError("check lift_scaling needs a lift then sections", line)
    handle = args[0]
    sections = args[1:]
    if not sections:
        raise dsl.ScriptError("check lift_scaling needs at least one section", line)
    instance = lift_instance(handle.source, sections)
    return verify_bracket_scaling(instance)


def _ck_lift_formulas(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check lift_formulas", line)
    J = _as_jacobi(args[0])
    scalar = args[1]
    if isinstance(scalar, Fraction):
        scalar = ExpPoly.const(J.algebroid.patch.variables, scalar)
    return verify_hat_bar_differentials(J, scalar, args[2])


def _ck_main1(interp, args, options, line) -> CheckReport:
    _need(args, 3, "check main1", line)
    data, left, right = args
    if not isinstance(left, GraphRelation) or not isinstance(right, GraphRelation):
        raise dsl.ScriptError(
            "check main1 needs two graph literals (sharp ..)/(flat ..)", line
        )
    strategy = options.get("strategy", "auto")
    return theorem_main1_crosscheck(_bialgebroid_or_jacobi(data, line),
                                    left, right, strategy=strategy)


def _ck_zero(interp, args, options, line) -> CheckReport:
    _need(args, 1, "check zero", line)
    if _is_zero(args[0]):
        return CheckReport("pass", strategy="exact zero test")
    return CheckReport("fail", witness=f"value = {args[0]}",
                       strategy="exact zero test")


def _difference_witness(a: Value, b: Value, line: int) -> Optional[str]:
    """None when equal, else a printable discrepancy."""
    if isinstance(a, tuple) and isinstance(b, tuple):
        if len(a) != len(b):
            return f"tuple lengths differ: {len(a)} vs {len(b)}"
        for i, (x, y) in enumerate(zip(a, b)):
            w = _difference_witness(x, y, line)
            if w is not None:
                return f"slot {i}: {w}"
        return None
    a = _scalarize(a, b)
    b = _scalarize(b, a)
    if isinstance(a, (Fraction, ExpPoly)) and isinstance(b, (Fraction, ExpPoly)):
        return None if a == b else f"difference = {a - b}"
    if type(a) is type(b) and isinstance(a, (MultiVector, Form, TensorMap)):
        diff = a - b
        return None if _is_zero(diff) else f"difference = {diff}"
    raise dsl.ScriptError("check equal needs comparable values", line)


def _ck_equal(interp, args, options, line) -> CheckReport:
    _need(args, 2, "check equal", line)
    witness = _difference_witness(args[0], args[1], line)
    if witness is None:
        return CheckReport("pass", strategy="exact difference")
    return CheckReport("fail", witness=witness, strategy="exact difference")


_CHECKS: Dict[str, Callable] = {
    "algebroid": _ck_algebroid,
    "jacobi": _ck_jacobi,
    "presymplectic": _ck_presymplectic,
    "nondegenerate": _ck_nondegenerate,
    "mc": _ck_mc,
    "closure": _ck_closure,
    "bialgebroid": _ck_bialgebroid,
    "dirac_pair": _ck_dirac_pair,
    "jacobi_pair": _ck_jacobi_pair,
    "presymplectic_pair": _ck_presymplectic_pair,
    "symplectic_pair": _ck_symplectic_pair,
    "hamiltonian_pair": _ck_hamiltonian_pair,
    "condition31": _ck_condition31,
    "jomega": _ck_jomega,
    "omegan": _ck_omegan,
    "torsion": _ck_torsion,
    "lift_scaling": _ck_lift_scaling,
    "lift_formulas": _ck_lift_formulas,
    "main1": _ck_main1,
    "zero": _ck_zero,
    "equal": _ck_equal,
}


# -- emitters ---------------------------------------------------------------

_STATUS_COLORS = {
    "pass": "\033[32m",
    "fail": "\033[31m",
    "not-decided": "\033[33m",
    "error": "\033[35m",
}
_RESET = "\033[0m"


def emit_text(report: RunReport, color: bool = False) -> str:
    lines = []
    width = max((len(r.status) for r in report.records), default=4)
    for rec in report.records:
        status = rec.status.ljust(width)
        if color:
            status = _STATUS_COLORS.get(rec.status, "") + status + _RESET
        line = f"{status}  {rec.name}"
        if rec.strategy:
            line += f"  [{rec.strategy}]"
        lines.append(line)
        if rec.witness:
            lines.append(f"{' ' * (width + 2)}{rec.witness}")
    c = report.counts()
    lines.append(
        f"summary: {c['pass']} pass, {c['fail']} fail, "
        f"{c['not_decided']} not decided, {c['error']} error"
    )
    return "\n".join(lines) + "\n"


def emit_json(report: RunReport) -> str:
    checks = []
    for rec in report.records:
        entry: Dict[str, object] = {
            "name": rec.name,
            "status": rec.status,
            "strategy": rec.strategy,
        }
        if rec.witness is not None:
            entry["witness"] = rec.witness
        checks.append(entry)
    payload = {
        "version": 1,
        "checks": checks,
        "summary": report.counts(),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# -- entry point ------------------------------------------------------------

def run_text(text: str) -> RunReport:
    script = dsl.parse(text)
    return Interpreter().run(script)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="jacv",
        description="exact checks for twisted-algebroid structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="run a script of declarations and checks")
    check.add_argument("file", help="script file")
    check.add_argument("--json", action="store_true", help="emit JSON")
    check.add_argument("--seed", type=int, default=0,
                       help="seed recorded for reproducibility")
    check.add_argument("--strict", action="store_true",
                       help="exit 3 when any check is not decided")
    ns = parser.parse_args(argv)

    try:
        with open(ns.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_text(text)
    except dsl.ScriptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if ns.json:
        sys.stdout.write(emit_json(report))
    else:
        color = sys.stdout.isatty() and not os.environ.get("NO_COLOR")
        sys.stdout.write(emit_text(report, color=color))
    return report.exit_code(strict=ns.strict)


if __name__ == "__main__":
    sys.exit(main())
