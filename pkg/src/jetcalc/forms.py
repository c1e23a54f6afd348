"""The bigraded exterior algebra of the jet space.

Forms are finite sums of terms

    coefficient * rho^{a_1}_{i_1} ^ ... ^ rho^{a_p}_{i_p} ^ theta^{mu_1} ^ ... ^ theta^{mu_q}

with vertical generators rho (contact forms, indexed by a dependent name and
a multi-index) kept strictly sorted before the horizontal generators theta
(the dx^mu); signs are normalized into the coefficients.  All operators are
defined by their action on generators and extended as (anti)derivations:

    d_V f = df/du^a_i . rho^a_i        d_H f = D_mu f . theta^mu
    d_V rho = 0                        d_H rho^a_i = -rho^a_{i+(mu)} ^ theta^mu
    d_V theta = d_H theta = 0
    i_X rho^a_i = X^a_i                i_X theta^mu = X^mu
    L_X f = X f
    L_X rho^a_i = dX^a_i/du^b_j . rho^b_j + X^mu rho^a_{i+(mu)}
                  + (nabla_mu X_V)^a_i . theta^mu
    L_X theta^mu = dX^mu/du^b_j . rho^b_j + D_nu X^mu . theta^nu

The Lie derivative is additionally computed through the Cartan magic formula
d i_X + i_X d; the two routes must agree exactly.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

from .errors import (
    DegreeError,
    DomainError,
    InvariantViolation,
    WindowError,
)
from .expr import Context, DiffExpr
from .evofield import VerticalField
from .jetalg import total_derivative
from .multiindex import MultiIndex

VGen = tuple[str, MultiIndex]  # rho^name_index
TermKey = tuple[tuple[VGen, ...], tuple[int, ...]]

# tagged generator for intermediate (unsorted) products
_V = 0
_H = 1


def _vgen_key(gen: VGen):
    return (gen[0], gen[1].grlex_key())


def _canonical(tagged: list[tuple[int, object]]) -> Optional[tuple[int, TermKey]]:
    """Sort a raw generator sequence into (sign, (vlist, hlist)).

    Vertical generators come first, each group strictly sorted; None when a
    generator repeats (the term vanishes).
    """
    keyed = []
    for tag, gen in tagged:
        key = (0, _vgen_key(gen)) if tag == _V else (1, gen)
        keyed.append(key)
    # insertion sort, counting transpositions for the permutation parity
    sign = 1
    for idx in range(1, len(keyed)):
        j = idx
        while j > 0 and keyed[j - 1] > keyed[j]:
            keyed[j - 1], keyed[j] = keyed[j], keyed[j - 1]
            tagged[j - 1], tagged[j] = tagged[j], tagged[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and keyed[j - 1] == keyed[j]:
            return None
    vlist = tuple(gen for tag, gen in tagged if tag == _V)
    hlist = tuple(gen for tag, gen in tagged if tag == _H)
    return sign, (vlist, hlist)


def _tagged(vlist: Iterable[VGen], hlist: Iterable[int]) -> list:
    return [(_V, g) for g in vlist] + [(_H, mu) for mu in hlist]


class BiForm:
    """An element of the bigraded form algebra; mixed bidegrees allowed."""

    __slots__ = ("ctx", "_terms")

    def __init__(self, ctx: Context, terms: Mapping[TermKey, DiffExpr]):
        clean: dict[TermKey, DiffExpr] = {}
        for (vlist, hlist), coeff in terms.items():
            if coeff.is_zero:
                continue
            vlist = tuple((name, ctx.index(idx)) for name, idx in vlist)
            hlist = tuple(int(mu) for mu in hlist)
            for name, idx in vlist:
                ctx.require_dep(name)
            for mu in hlist:
                ctx.require_direction(mu)
            if list(vlist) != sorted(vlist, key=_vgen_key) or any(
                _vgen_key(a) == _vgen_key(b) for a, b in zip(vlist, vlist[1:])
            ):
                raise DomainError(f"vertical generators not strictly sorted: {vlist}")
            if list(hlist) != sorted(hlist) or any(
                a == b for a, b in zip(hlist, hlist[1:])
            ):
                raise DomainError(f"horizontal generators not strictly sorted: {hlist}")
            clean[(vlist, hlist)] = coeff
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("BiForm is immutable")

    # --- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, ctx: Context) -> "BiForm":
        return cls(ctx, {})

    @classmethod
    def of_function(cls, f: DiffExpr) -> "BiForm":
        return cls(f.ctx, {((), ()): f})

    @classmethod
    def rho(cls, ctx: Context, name: str, idx) -> "BiForm":
        return cls(ctx, {(((name, ctx.index(idx)),), ()): ctx.one})

    @classmethod
    def theta(cls, ctx: Context, mu: int) -> "BiForm":
        return cls(ctx, {((), (mu,)): ctx.one})

    @classmethod
    def volume(cls, ctx: Context) -> "BiForm":
        return cls(ctx, {((), tuple(range(1, ctx.m + 1))): ctx.one})

    @classmethod
    def _accumulate(cls, ctx: Context, pieces) -> "BiForm":
        acc: dict[TermKey, DiffExpr] = {}
        for key, coeff in pieces:
            if key in acc:
                acc[key] = acc[key] + coeff
            else:
                acc[key] = coeff
        return cls(ctx, acc)

    # --- structure --------------------------------------------------------

    @property
    def terms(self) -> dict[TermKey, DiffExpr]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, vlist, hlist) -> DiffExpr:
        vlist = tuple((name, self.ctx.index(idx)) for name, idx in vlist)
        return self._terms.get((vlist, tuple(hlist)), self.ctx.zero)

    def bidegrees(self) -> frozenset[tuple[int, int]]:
        return frozenset((len(v), len(h)) for v, h in self._terms)

    def vertical_generators(self) -> frozenset[VGen]:
        found = set()
        for vlist, _ in self._terms:
            found.update(vlist)
        return frozenset(found)

    def __eq__(self, other):
        return (
            isinstance(other, BiForm)
            and self.ctx.compatible(other.ctx)
            and self._terms == other._terms
        )

    def _sorted_items(self):
        def key(item):
            (vlist, hlist), _ = item
            return (
                len(vlist) + len(hlist),
                len(vlist),
                tuple(_vgen_key(g) for g in vlist),
                hlist,
            )

        return sorted(self._terms.items(), key=key)

    def __repr__(self):
        if self.is_zero:
            return "<BiForm 0>"
        bits = []
        for (vlist, hlist), coeff in self._sorted_items():
            gens = [f"rho[{n};{i}]" for n, i in vlist] + [f"dx{mu}" for mu in hlist]
            body = "^".join(gens) if gens else "1"
            bits.append(f"({coeff})*{body}")
        return "<BiForm " + " + ".join(bits) + ">"

    # --- linear algebra -----------------------------------------------------

    def __add__(self, other: "BiForm") -> "BiForm":
        acc = dict(self._terms)
        for key, coeff in other._terms.items():
            acc[key] = acc.get(key, self.ctx.zero) + coeff
        return BiForm(self.ctx, acc)

    def __neg__(self) -> "BiForm":
        return BiForm(self.ctx, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "BiForm") -> "BiForm":
        return self + (-other)

    def scaled(self, f: DiffExpr) -> "BiForm":
        return BiForm(self.ctx, {k: f * c for k, c in self._terms.items()})

    def wedge(self, other: "BiForm") -> "BiForm":
        """Bilinear extension of generator concatenation; the sign is the
        parity of the merge into canonical order, repeats vanish."""
        if not self.ctx.compatible(other.ctx):
            raise DomainError("forms from incompatible contexts")
        pieces = []
        for (v1, h1), c1 in self._terms.items():
            for (v2, h2), c2 in other._terms.items():
                canon = _canonical(_tagged(v1, h1) + _tagged(v2, h2))
                if canon is None:
                    continue
                sign, key = canon
                coeff = c1 * c2
                pieces.append((key, coeff if sign > 0 else -coeff))
        return BiForm._accumulate(self.ctx, pieces)

    # --- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "terms": [
                {
                    "v": [[name, list(idx)] for name, idx in vlist],
                    "h": list(hlist),
                    "coeff": str(coeff),
                }
                for (vlist, hlist), coeff in self._sorted_items()
            ]
        }

    @classmethod
    def from_json_obj(cls, ctx: Context, obj: Mapping) -> "BiForm":
        pieces = []
        for entry in obj["terms"]:
            vlist = tuple((name, ctx.index(idx)) for name, idx in entry["v"])
            hlist = tuple(int(mu) for mu in entry["h"])
            canon = _canonical(_tagged(vlist, hlist))
            if canon is None:
                raise DomainError(f"repeated generator in term {entry!r}")
            sign, key = canon
            coeff = ctx.parse(entry["coeff"])
            pieces.append((key, coeff if sign > 0 else -coeff))
        return cls._accumulate(ctx, pieces)


def wedge(omega: BiForm, chi: BiForm) -> BiForm:
    return omega.wedge(chi)


def d_V(omega: BiForm) -> BiForm:
    """Vertical differential: antiderivation of bidegree (1,0); rho and
    theta generators are d_V-closed."""
    ctx = omega.ctx
    pieces = []
    for (vlist, hlist), coeff in omega._terms.items():
        for name, idx in coeff.jet_support():
            dc = coeff.partial_u(name, idx)
            if dc.is_zero:
                continue
            canon = _canonical([(_V, (name, idx))] + _tagged(vlist, hlist))
            if canon is None:
                continue
            sign, key = canon
            pieces.append((key, dc if sign > 0 else -dc))
    return BiForm._accumulate(ctx, pieces)


def d_H(omega: BiForm) -> BiForm:
    """Horizontal differential: antiderivation of bidegree (0,1) with
    d_H rho^a_i = -rho^a_{i+(mu)} ^ theta^mu."""
    ctx = omega.ctx
    pieces = []
    for (vlist, hlist), coeff in omega._terms.items():
        tagged = _tagged(vlist, hlist)
        for mu in range(1, ctx.m + 1):
            dc = total_derivative(coeff, mu)
            if dc.is_zero:
                continue
            canon = _canonical([(_H, mu)] + list(tagged))
            if canon is None:
                continue
            sign, key = canon
            pieces.append((key, dc if sign > 0 else -dc))
        for pos, (name, idx) in enumerate(vlist):
            # d_H passes over pos generators of degree one
            outer = -1 if pos % 2 else 1
            for mu in range(1, ctx.m + 1):
                replaced = (
                    tagged[:pos]
                    + [(_V, (name, idx.bump(mu))), (_H, mu)]
                    + tagged[pos + 1 :]
                )
                canon = _canonical(replaced)
                if canon is None:
                    continue
                sign, key = canon
                signed = -outer * sign  # the extra minus from d_H rho
                pieces.append((key, coeff if signed > 0 else -coeff))
    return BiForm._accumulate(ctx, pieces)


def d(omega: BiForm) -> BiForm:
    return d_V(omega) + d_H(omega)


class MixedField:
    """A differentiation X = X_V + X^mu D_mu acting on forms.

    The vertical part is an explicit VerticalField.  When it stands for a
    truncation of an infinite-support field, pass the trustworthy window;
    reading a component beyond it raises WindowError instead of silently
    treating it as zero.
    """

    __slots__ = ("ctx", "vertical", "horizontal", "window")

    def __init__(
        self,
        ctx: Context,
        vertical: VerticalField | None = None,
        horizontal: Mapping[int, DiffExpr] | None = None,
        window: int | None = None,
    ):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(
            self, "vertical", vertical if vertical is not None else VerticalField.zero(ctx)
        )
        horiz = {}
        for mu, value in (horizontal or {}).items():
            ctx.require_direction(int(mu))
            if not value.is_zero:
                horiz[int(mu)] = value
        object.__setattr__(self, "horizontal", horiz)
        object.__setattr__(self, "window", window)

    def __setattr__(self, name, value):
        raise AttributeError("MixedField is immutable")

    def vertical_component(self, name: str, idx: MultiIndex) -> DiffExpr:
        if self.window is not None and idx.norm > self.window:
            raise WindowError(
                f"component ({name}, {idx}) lies outside the materialized "
                f"window {self.window}"
            )
        return self.vertical.component(name, idx)

    def horizontal_component(self, mu: int) -> DiffExpr:
        return self.horizontal.get(mu, self.ctx.zero)

    def apply_to_function(self, f: DiffExpr) -> DiffExpr:
        result = self.vertical.apply(f)
        for mu, coeff in self.horizontal.items():
            result = result + coeff * total_derivative(f, mu)
        return result

    def is_purely_vertical(self) -> bool:
        return not self.horizontal

    def is_purely_horizontal(self) -> bool:
        return self.vertical.is_zero


def interior(x: MixedField, omega: BiForm) -> BiForm:
    """Contraction i_X: antiderivation of total degree -1."""
    ctx = omega.ctx
    pieces = []
    for (vlist, hlist), coeff in omega._terms.items():
        for pos, (name, idx) in enumerate(vlist):
            value = x.vertical_component(name, idx)
            if value.is_zero:
                continue
            sign = -1 if pos % 2 else 1
            key = (vlist[:pos] + vlist[pos + 1 :], hlist)
            contrib = coeff * value
            pieces.append((key, contrib if sign > 0 else -contrib))
        for hpos, mu in enumerate(hlist):
            value = x.horizontal_component(mu)
            if value.is_zero:
                continue
            sign = -1 if (len(vlist) + hpos) % 2 else 1
            key = (vlist, hlist[:hpos] + hlist[hpos + 1 :])
            contrib = coeff * value
            pieces.append((key, contrib if sign > 0 else -contrib))
    return BiForm._accumulate(ctx, pieces)


def _lie_on_rho(x: MixedField, name: str, idx: MultiIndex) -> list[tuple[int, object, DiffExpr]]:
    """L_X rho^a_i as [(tag, generator, coefficient)] summands."""
    ctx = x.ctx
    out = []
    zeta = x.vertical_component(name, idx)
    for bname, bidx in zeta.jet_support():
        dz = zeta.partial_u(bname, bidx)
        if not dz.is_zero:
            out.append((_V, (bname, bidx), dz))
    for mu, coeff in x.horizontal.items():
        out.append((_V, (name, idx.bump(mu)), coeff))
    for mu in range(1, ctx.m + 1):
        value = total_derivative(zeta, mu) - x.vertical_component(name, idx.bump(mu))
        if not value.is_zero:
            out.append((_H, mu, value))
    return out


def _lie_on_theta(x: MixedField, mu: int) -> list[tuple[int, object, DiffExpr]]:
    ctx = x.ctx
    coeff = x.horizontal_component(mu)
    out = []
    for bname, bidx in coeff.jet_support():
        dc = coeff.partial_u(bname, bidx)
        if not dc.is_zero:
            out.append((_V, (bname, bidx), dc))
    for nu in range(1, ctx.m + 1):
        dc = total_derivative(coeff, nu)
        if not dc.is_zero:
            out.append((_H, nu, dc))
    return out


def _lie_by_generators(x: MixedField, omega: BiForm) -> BiForm:
    ctx = omega.ctx
    pieces = []
    for (vlist, hlist), coeff in omega._terms.items():
        tagged = _tagged(vlist, hlist)
        xc = x.apply_to_function(coeff)
        if not xc.is_zero:
            pieces.append(((vlist, hlist), xc))
        for pos, (tag, gen) in enumerate(tagged):
            summands = (
                _lie_on_rho(x, gen[0], gen[1]) if tag == _V else _lie_on_theta(x, gen)
            )
            for ntag, ngen, factor in summands:
                replaced = tagged[:pos] + [(ntag, ngen)] + tagged[pos + 1 :]
                canon = _canonical(replaced)
                if canon is None:
                    continue
                sign, key = canon
                contrib = coeff * factor
                pieces.append((key, contrib if sign > 0 else -contrib))
    return BiForm._accumulate(ctx, pieces)


def _window_requirement(x: MixedField, omega: BiForm) -> None:
    if x.window is None:
        return
    needed: set[VGen] = set(omega.vertical_generators())
    for name, idx in list(needed):
        for mu in range(1, omega.ctx.m + 1):
            needed.add((name, idx.bump(mu)))
    needed |= d(omega).vertical_generators()
    for name, idx in sorted(needed, key=_vgen_key):
        if idx.norm > x.window:
            raise WindowError(
                f"Lie derivative needs component ({name}, {idx}) beyond the "
                f"materialized window {x.window}"
            )


def lie(x: MixedField, omega: BiForm, *, verify: bool = True) -> BiForm:
    """Lie derivative along X, computed two independent ways.

    The magic-formula route d(i_X w) + i_X(dw) and the
    derivation-on-generators route must agree exactly; a mismatch raises.
    The window of a truncated vertical part must cover every generator
    touched by w and dw.
    """
    _window_requirement(x, omega)
    by_generators = _lie_by_generators(x, omega)
    if verify:
        by_magic = d(interior(x, omega)) + interior(x, d(omega))
        if by_generators != by_magic:
            raise InvariantViolation(
                "Cartan magic formula and generator rules disagree for L_X"
            )
    return by_generators


def cartan_degree(omega: BiForm) -> Optional[int]:
    """Minimal vertical degree over the terms of a homogeneous form (its
    filtration level); None for the zero form."""
    if omega.is_zero:
        return None
    degrees = {len(v) + len(h) for v, h in omega._terms}
    if len(degrees) != 1:
        raise DegreeError(
            f"form is not homogeneous: total degrees {sorted(degrees)}"
        )
    return min(len(v) for v, _ in omega._terms)


def evolutionary_mixed_field(
    ctx: Context, phi: Mapping[str, DiffExpr], window: int
) -> MixedField:
    """Prolongation of phi packaged for form calculus, window recorded."""
    from .evofield import prolong

    return MixedField(ctx, vertical=prolong(ctx, phi, window), window=window)
