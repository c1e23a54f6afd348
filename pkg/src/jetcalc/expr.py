"""The differential-function algebra: exact expressions in x^mu and jet
variables u^alpha_i.

The default expression class is polynomials over exact rationals, where
equality is decided by canonical form.  A context flag enables the
transcendental extension (sin, cos, exp, ln and general quotients); there
equality falls back to seeded randomized evaluation and is a semi-decision.

Canonical form: sums and products are flattened into a map
monomial -> rational coefficient; a monomial is a sorted tuple of
(atom, exponent) pairs.  Atoms are x-variables, jet variables, and (in the
extension) function applications and reciprocals of normalized polynomials.
Two expressions are equal as functions iff their canonical forms coincide,
within the default class.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .errors import DimensionError, DomainError, EvaluationError
from .multiindex import MultiIndex

FN_HEADS = ("sin", "cos", "exp", "ln")

Rat = Union[int, Fraction]

# Atom encodings (plain tuples keep monomials hashable):
#   ("x", mu)                with 1 <= mu <= m
#   ("u", name, MultiIndex)  jet variable u^name_i
#   ("fn", head, DiffExpr)   transcendental application (extension only)
#   ("rc", DiffExpr)         reciprocal of a multi-term normalized polynomial
Atom = tuple
Monomial = tuple  # tuple[(Atom, int), ...] sorted by _atom_key


@dataclass(frozen=True)
class Context:
    """Ambient data: m independent variables and the dependent-name set."""

    m: int
    dep_names: tuple[str, ...]
    transcendental: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dep_names", tuple(self.dep_names))
        if self.m < 1:
            raise DimensionError("m must be >= 1")
        if not self.dep_names:
            raise DomainError("dep_names must be non-empty")
        if len(set(self.dep_names)) != len(self.dep_names):
            raise DomainError("dep_names must be duplicate-free")
        for name in self.dep_names:
            if not name.isidentifier():
                raise DomainError(f"dependent name {name!r} is not an identifier")

    def compatible(self, other: "Context") -> bool:
        return self.m == other.m and self.dep_names == other.dep_names

    def require_dep(self, name: str) -> None:
        if name not in self.dep_names:
            raise DomainError(f"unknown dependent name {name!r}; context has {self.dep_names}")

    def require_direction(self, mu: int) -> None:
        if not 1 <= mu <= self.m:
            raise DimensionError(f"direction {mu} out of range 1..{self.m}")

    def index(self, entries) -> MultiIndex:
        idx = entries if isinstance(entries, MultiIndex) else MultiIndex(entries)
        if len(idx) != self.m:
            raise DimensionError(f"multi-index {idx} has length {len(idx)}, expected m={self.m}")
        return idx

    # --- expression factories ------------------------------------------

    def const(self, value: Rat) -> "DiffExpr":
        c = Fraction(value)
        if c == 0:
            return DiffExpr._new(self, {})
        return DiffExpr._new(self, {(): c})

    @property
    def zero(self) -> "DiffExpr":
        return self.const(0)

    @property
    def one(self) -> "DiffExpr":
        return self.const(1)

    def x(self, mu: int) -> "DiffExpr":
        self.require_direction(mu)
        return DiffExpr._new(self, {((("x", mu), 1),): Fraction(1)})

    def u(self, name: str, entries=None) -> "DiffExpr":
        self.require_dep(name)
        idx = self.index(entries if entries is not None else MultiIndex.zero(self.m))
        return DiffExpr._new(self, {((("u", name, idx), 1),): Fraction(1)})

    def parse(self, text: str) -> "DiffExpr":
        from .parser import parse as _parse

        return _parse(text, self)

    def rng(self) -> random.Random:
        """Fresh generator for the randomized equality oracle."""
        return random.Random(self.seed)

    def to_json_obj(self) -> dict:
        return {
            "m": self.m,
            "deps": list(self.dep_names),
            "transcendental": self.transcendental,
            "seed": self.seed,
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Context":
        return cls(
            m=int(obj["m"]),
            dep_names=tuple(obj["deps"]),
            transcendental=bool(obj.get("transcendental", False)),
            seed=int(obj.get("seed", 0)),
        )


# --- canonical ordering ------------------------------------------------


def _atom_key(atom: Atom):
    kind = atom[0]
    if kind == "x":
        return (0, atom[1])
    if kind == "u":
        return (1, atom[1], atom[2].grlex_key())
    if kind == "fn":
        return (2, atom[1], atom[2].sort_key())
    if kind == "rc":
        return (3, atom[1].sort_key())
    raise AssertionError(f"unknown atom kind {atom!r}")


def _mono_degree(mono: Monomial) -> int:
    return sum(e for _, e in mono)


def _mono_key(mono: Monomial):
    # Leading (highest total degree) terms sort first; within a degree the
    # atom sequence decides, x-variables before jets before extension atoms.
    return (-_mono_degree(mono), tuple((_atom_key(a), -e) for a, e in mono))


def _sort_mono(pairs: Iterable[tuple[Atom, int]]) -> Monomial:
    return tuple(sorted(((a, e) for a, e in pairs if e != 0), key=lambda p: _atom_key(p[0])))


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exps: dict[Atom, int] = {}
    for a, e in m1:
        exps[a] = exps.get(a, 0) + e
    for a, e in m2:
        exps[a] = exps.get(a, 0) + e
    return _sort_mono(exps.items())


class DiffExpr:
    """A differential function in canonical form.  Immutable."""

    __slots__ = ("ctx", "terms", "_hash", "_key")

    def __init__(self, *args, **kwargs):
        raise TypeError("construct DiffExpr via Context factories or arithmetic")

    @classmethod
    def _new(cls, ctx: Context, term_map: Mapping[Monomial, Fraction]) -> "DiffExpr":
        self = object.__new__(cls)
        object.__setattr__(self, "ctx", ctx)
        terms = tuple(
            sorted(
                ((m, c) for m, c in term_map.items() if c != 0),
                key=lambda mc: _mono_key(mc[0]),
            )
        )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_key", None)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("DiffExpr is immutable")

    # --- basic structure ------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(m == () for m, _ in self.terms)

    def constant_part(self) -> Fraction:
        for m, c in self.terms:
            if m == ():
                return c
        return Fraction(0)

    def as_constant(self) -> Optional[Fraction]:
        """The value as a rational constant, or None when non-constant."""
        if self.is_zero:
            return Fraction(0)
        if len(self.terms) == 1 and self.terms[0][0] == ():
            return self.terms[0][1]
        return None

    def sort_key(self):
        if self._key is None:
            key = tuple(
                (_mono_key(m), (c.numerator, c.denominator)) for m, c in self.terms
            )
            object.__setattr__(self, "_key", key)
        return self._key

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.ctx.m, self.ctx.dep_names, self.terms)))
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, DiffExpr):
            other = _coerce(self.ctx, other)
            if other is None:
                return NotImplemented
        return (
            self.ctx.m == other.ctx.m
            and self.ctx.dep_names == other.ctx.dep_names
            and self.terms == other.terms
        )

    def __bool__(self):
        return not self.is_zero

    # --- arithmetic -------------------------------------------------------

    def _check_ctx(self, other: "DiffExpr") -> None:
        if not self.ctx.compatible(other.ctx):
            raise DomainError("expressions from incompatible contexts")

    def __add__(self, other):
        other = _coerce_strict(self.ctx, other)
        self._check_ctx(other)
        acc = dict(self.terms)
        for m, c in other.terms:
            acc[m] = acc.get(m, Fraction(0)) + c
        return DiffExpr._new(self.ctx, acc)

    __radd__ = __add__

    def __neg__(self):
        return DiffExpr._new(self.ctx, {m: -c for m, c in self.terms})

    def __sub__(self, other):
        return self + (-_coerce_strict(self.ctx, other))

    def __rsub__(self, other):
        return _coerce_strict(self.ctx, other) - self

    def __mul__(self, other):
        other = _coerce_strict(self.ctx, other)
        self._check_ctx(other)
        acc: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = _mono_mul(m1, m2)
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return DiffExpr._new(self.ctx, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise DomainError("exponents must be integers")
        if n == 0:
            return self.ctx.one
        if n < 0:
            return self.invert() ** (-n)
        result = self.ctx.one
        base = self
        k = n
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def invert(self) -> "DiffExpr":
        """Multiplicative inverse.

        Constants invert exactly in any class; everything else requires the
        transcendental extension.  Single monomials invert by negating atom
        exponents; a genuine multi-term polynomial becomes a reciprocal atom,
        normalized to leading coefficient one.
        """
        const = self.as_constant()
        if const is not None:
            if const == 0:
                raise DomainError("division by zero")
            return self.ctx.const(1 / const)
        if not self.ctx.transcendental:
            raise DomainError(
                "division by a non-constant requires the transcendental extension"
            )
        if len(self.terms) == 1:
            mono, coeff = self.terms[0]
            result = self.ctx.const(1 / coeff)
            for a, e in mono:
                result = result * _atom_power(self.ctx, a, -e)
            return result
        lead = self.terms[0][1]
        normalized = self * self.ctx.const(1 / lead)
        atom = ("rc", normalized)
        recip = DiffExpr._new(self.ctx, {((atom, 1),): Fraction(1)})
        return self.ctx.const(1 / lead) * recip

    def __truediv__(self, other):
        other = _coerce_strict(self.ctx, other)
        return self * other.invert()

    def __rtruediv__(self, other):
        return _coerce_strict(self.ctx, other) * self.invert()

    # --- supports ---------------------------------------------------------

    def _iter_atoms(self):
        for m, _ in self.terms:
            for a, _e in m:
                yield a

    def jet_support(self) -> frozenset[tuple[str, MultiIndex]]:
        """All (name, index) jet variables the expression depends on,
        including those inside extension atoms."""
        found: set[tuple[str, MultiIndex]] = set()
        for a in self._iter_atoms():
            if a[0] == "u":
                found.add((a[1], a[2]))
            elif a[0] == "fn":
                found |= a[2].jet_support()
            elif a[0] == "rc":
                found |= a[1].jet_support()
        return frozenset(found)

    def x_support(self) -> frozenset[int]:
        found: set[int] = set()
        for a in self._iter_atoms():
            if a[0] == "x":
                found.add(a[1])
            elif a[0] == "fn":
                found |= a[2].x_support()
            elif a[0] == "rc":
                found |= a[1].x_support()
        return frozenset(found)

    def has_extended_atoms(self) -> bool:
        """True when canonical equality is no longer a full decision."""
        for a in self._iter_atoms():
            if a[0] in ("fn", "rc"):
                return True
        return False

    def order(self) -> Optional[int]:
        """Largest |i| among jet variables, or None without jet dependence."""
        support = self.jet_support()
        if not support:
            return None
        return max(i.norm for _, i in support)

    def total_x_degree(self) -> Optional[int]:
        """Total degree as a polynomial in x alone; None if jets or
        extension atoms are present."""
        if self.jet_support() or self.has_extended_atoms():
            return None
        if self.is_zero:
            return 0
        return max(sum(e for _, e in m) for m, _ in self.terms)

    # --- differentiation ---------------------------------------------------

    def partial_u(self, name: str, entries) -> "DiffExpr":
        self.ctx.require_dep(name)
        idx = self.ctx.index(entries)
        return self._derive(("u", name, idx))

    def partial_x(self, mu: int) -> "DiffExpr":
        self.ctx.require_direction(mu)
        return self._derive(("x", mu))

    def _derive(self, var: Atom) -> "DiffExpr":
        ctx = self.ctx
        result = ctx.zero
        for mono, coeff in self.terms:
            for pos, (a, e) in enumerate(mono):
                da = _derive_atom(ctx, a, var)
                if da.is_zero:
                    continue
                rest = mono[:pos] + ((a, e - 1),) + mono[pos + 1 :]
                rest = tuple(p for p in rest if p[1] != 0)
                partial = DiffExpr._new(ctx, {_sort_mono(rest): coeff * e})
                result = result + partial * da
        return result

    # --- substitution and evaluation ---------------------------------------

    def subs_jets(self, mapping: Mapping[tuple[str, MultiIndex], "DiffExpr"]) -> "DiffExpr":
        """Replace jet variables by expressions (used for substituting a
        section's derivatives); atoms not in the mapping are kept."""
        ctx = self.ctx
        result = ctx.zero
        for mono, coeff in self.terms:
            term = ctx.const(coeff)
            for a, e in mono:
                term = term * _atom_subs(ctx, a, e, mapping)
            result = result + term
        return result

    def evaluate(self, point: Mapping) -> Union[Fraction, float]:
        """Evaluate at an assignment of rationals to all variables in the
        support.  Keys are ("x", mu) or ("u", name, index-tuple)."""
        norm_point = _normalize_point(self.ctx, point)
        return _eval_expr(self, norm_point)

    # --- the equality decision ---------------------------------------------

    def equals(self, other: "DiffExpr", rng: random.Random | None = None) -> bool:
        """Decide equality as functions.

        Exact (by canonical form) on the default polynomial class; with
        extension atoms present this is a seeded probabilistic semi-decision:
        16 random rational points, tolerance 1e-9.
        """
        other = _coerce_strict(self.ctx, other)
        self._check_ctx(other)
        diff = self - other
        if diff.is_zero:
            return True
        if not diff.has_extended_atoms():
            return False
        return _probably_zero(diff, rng if rng is not None else self.ctx.rng())

    # --- rendering -----------------------------------------------------------

    def pretty(self) -> str:
        from .parser import render

        return render(self)

    def __str__(self) -> str:
        return self.pretty()

    def __repr__(self) -> str:
        return f"<DiffExpr {self.pretty()}>"

    def to_json_obj(self) -> dict:
        return {"terms": [
            {"c": str(c), "m": [[_atom_json(a), e] for a, e in m]}
            for m, c in self.terms
        ]}

    @classmethod
    def from_json_obj(cls, ctx: Context, obj: Mapping) -> "DiffExpr":
        acc: dict[Monomial, Fraction] = {}
        for term in obj["terms"]:
            mono = _sort_mono(
                (_atom_from_json(ctx, aj), int(e)) for aj, e in term["m"]
            )
            acc[mono] = acc.get(mono, Fraction(0)) + Fraction(term["c"])
        return cls._new(ctx, acc)


# --- helpers -------------------------------------------------------------


def _coerce(ctx: Context, value) -> Optional[DiffExpr]:
    if isinstance(value, DiffExpr):
        return value
    if isinstance(value, (int, Fraction)):
        return ctx.const(value)
    return None


def _coerce_strict(ctx: Context, value) -> DiffExpr:
    result = _coerce(ctx, value)
    if result is None:
        raise DomainError(f"cannot interpret {value!r} as an expression")
    return result


def _atom_power(ctx: Context, atom: Atom, e: int) -> DiffExpr:
    """atom**e as an expression; negative powers of reciprocal atoms expand
    back into the underlying polynomial so monomials never carry them."""
    if e == 0:
        return ctx.one
    if atom[0] == "rc" and e < 0:
        return atom[1] ** (-e)
    if e < 0 and not ctx.transcendental:
        raise DomainError("negative powers require the transcendental extension")
    return DiffExpr._new(ctx, {((atom, e),): Fraction(1)})


_FN_DERIV = {
    "sin": lambda ctx, arg: _apply_fn(ctx, "cos", arg),
    "cos": lambda ctx, arg: -_apply_fn(ctx, "sin", arg),
    "exp": lambda ctx, arg: _apply_fn(ctx, "exp", arg),
    "ln": lambda ctx, arg: arg.invert(),
}


def _apply_fn(ctx: Context, head: str, arg: DiffExpr) -> DiffExpr:
    if head not in FN_HEADS:
        raise DomainError(f"unknown function head {head!r}")
    if not ctx.transcendental:
        raise DomainError(
            f"function {head!r} requires the transcendental extension"
        )
    atom = ("fn", head, arg)
    return DiffExpr._new(ctx, {((atom, 1),): Fraction(1)})


def apply_fn(ctx: Context, head: str, arg: DiffExpr) -> DiffExpr:
    """Public constructor for sin/cos/exp/ln applications."""
    return _apply_fn(ctx, head, arg)


def _derive_atom(ctx: Context, atom: Atom, var: Atom) -> DiffExpr:
    kind = atom[0]
    if kind in ("x", "u"):
        return ctx.one if atom == var else ctx.zero
    if kind == "fn":
        head, arg = atom[1], atom[2]
        darg = arg._derive(var)
        if darg.is_zero:
            return ctx.zero
        return _FN_DERIV[head](ctx, arg) * darg
    if kind == "rc":
        arg = atom[1]
        darg = arg._derive(var)
        if darg.is_zero:
            return ctx.zero
        recip_sq = DiffExpr._new(ctx, {((atom, 2),): Fraction(1)})
        return -darg * recip_sq
    raise AssertionError(f"unknown atom kind {atom!r}")


def _atom_subs(ctx: Context, atom: Atom, e: int, mapping) -> DiffExpr:
    kind = atom[0]
    if kind == "u" and (atom[1], atom[2]) in mapping:
        return mapping[(atom[1], atom[2])] ** e
    if kind == "fn":
        return _apply_fn(ctx, atom[1], atom[2].subs_jets(mapping)) ** e
    if kind == "rc":
        return atom[1].subs_jets(mapping).invert() ** e
    return _atom_power(ctx, atom, e)


def _normalize_point(ctx: Context, point: Mapping) -> dict:
    norm = {}
    for key, value in point.items():
        if not isinstance(key, tuple) or not key:
            raise EvaluationError(f"bad assignment key {key!r}")
        if key[0] == "x":
            norm[("x", int(key[1]))] = Fraction(value)
        elif key[0] == "u":
            norm[("u", key[1], ctx.index(key[2]))] = Fraction(value)
        else:
            raise EvaluationError(f"bad assignment key {key!r}")
    return norm


def _eval_atom(atom: Atom, point: dict):
    kind = atom[0]
    if kind == "x":
        key = ("x", atom[1])
    elif kind == "u":
        key = ("u", atom[1], atom[2])
    elif kind == "fn":
        inner = _eval_expr(atom[2], point)
        x = float(inner)
        if atom[1] == "ln":
            if x <= 0:
                raise DomainError(f"ln of non-positive value {x}")
            return math.log(x)
        return getattr(math, atom[1])(x)
    elif kind == "rc":
        inner = _eval_expr(atom[1], point)
        if inner == 0:
            raise DomainError("reciprocal of zero at the sample point")
        return 1 / inner if isinstance(inner, float) else Fraction(1) / inner
    else:
        raise AssertionError(f"unknown atom kind {atom!r}")
    if key not in point:
        raise EvaluationError(f"missing assignment for {key}")
    return point[key]


def _eval_expr(expr: DiffExpr, point: dict):
    total: Union[Fraction, float] = Fraction(0)
    for mono, coeff in expr.terms:
        value: Union[Fraction, float] = coeff
        for a, e in mono:
            av = _eval_atom(a, point)
            if e < 0 and av == 0:
                raise DomainError("negative power of zero at the sample point")
            value = value * av ** e
        total = total + value
    return total


def _probably_zero(diff: DiffExpr, rng: random.Random, points: int = 16,
                   max_attempts: int = 64, tol: float = 1e-9) -> bool:
    variables = [("x", mu) for mu in sorted(diff.x_support())] + [
        ("u", name, idx)
        for name, idx in sorted(diff.jet_support(), key=lambda ni: (ni[0], ni[1].grlex_key()))
    ]
    good = 0
    attempts = 0
    while good < points:
        if attempts >= max_attempts:
            raise EvaluationError(
                f"equality oracle failed: {max_attempts} singular sample attempts"
            )
        attempts += 1
        point = {}
        for v in variables:
            num = rng.randint(-12, 12)
            den = rng.randint(1, 12)
            key = v if v[0] == "x" else ("u", v[1], v[2])
            point[key] = Fraction(num, den)
        try:
            value = _eval_expr(diff, point)
        except DomainError:
            continue
        if abs(float(value)) > tol:
            return False
        good += 1
    return True


def _atom_json(atom: Atom):
    kind = atom[0]
    if kind == "x":
        return ["x", atom[1]]
    if kind == "u":
        return ["u", atom[1], list(atom[2])]
    if kind == "fn":
        return ["fn", atom[1], atom[2].to_json_obj()]
    if kind == "rc":
        return ["rc", atom[1].to_json_obj()]
    raise AssertionError(f"unknown atom kind {atom!r}")


def _atom_from_json(ctx: Context, obj) -> Atom:
    kind = obj[0]
    if kind == "x":
        ctx.require_direction(int(obj[1]))
        return ("x", int(obj[1]))
    if kind == "u":
        ctx.require_dep(obj[1])
        return ("u", obj[1], ctx.index(obj[2]))
    if kind == "fn":
        return ("fn", obj[1], DiffExpr.from_json_obj(ctx, obj[2]))
    if kind == "rc":
        return ("rc", DiffExpr.from_json_obj(ctx, obj[1]))
    raise DomainError(f"unknown atom kind in JSON: {obj!r}")


# --- spec-level operation aliases ---------------------------------------


def parse(text: str, ctx: Context) -> DiffExpr:
    return ctx.parse(text)


def partial_u(f: DiffExpr, name: str, entries) -> DiffExpr:
    return f.partial_u(name, entries)


def partial_x(f: DiffExpr, mu: int) -> DiffExpr:
    return f.partial_x(mu)


def order(f: DiffExpr) -> Optional[int]:
    return f.order()


def equal(f: DiffExpr, g: DiffExpr, rng: random.Random | None = None) -> bool:
    return f.equals(g, rng)


def eval_expr(f: DiffExpr, point: Mapping) -> Union[Fraction, float]:
    return f.evaluate(point)
