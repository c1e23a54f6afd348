"""The variational column: source forms, the Euler-Lagrange operator,
divergence and conservation-law verification.

Integration by parts rewrites a (1,m)-form into a source form (only
zero-index contact generators) plus an explicit d_H-exact remainder; the
primitive eta is returned as a checkable certificate and the identity
omega = sigma + d_H eta is re-verified before returning.  The Euler-Lagrange
operator is computed that way and independently through the classical
closed form sum_i (-1)^|i| D_i d/du^a_i; the two must agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import DegreeError, DomainError, InvariantViolation, WindowError
from .expr import Context, DiffExpr
from .evofield import prolong
from .forms import BiForm, d_H
from .jetalg import total_derivative, total_derivative_multi
from .multiindex import MultiIndex

CofactorKey = tuple[int, MultiIndex]  # (equation number sigma, derivative index)


@dataclass(frozen=True)
class Lagrangian:
    """The density L of the top horizontal form L . theta^1 ^ ... ^ theta^m."""

    density: DiffExpr

    @property
    def ctx(self) -> Context:
        return self.density.ctx

    def top_form(self) -> BiForm:
        return BiForm.volume(self.ctx).scaled(self.density)


class SourceForm:
    """sum_a E_a . rho^a_0 ^ volume, the canonical functional 1-form."""

    __slots__ = ("ctx", "_coefficients")

    def __init__(self, ctx: Context, coefficients: Mapping[str, DiffExpr]):
        coeffs = {}
        for name, value in coefficients.items():
            ctx.require_dep(name)
            if not value.is_zero:
                coeffs[name] = value
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "_coefficients", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("SourceForm is immutable")

    @property
    def coefficients(self) -> dict[str, DiffExpr]:
        return dict(self._coefficients)

    def coefficient(self, name: str) -> DiffExpr:
        self.ctx.require_dep(name)
        return self._coefficients.get(name, self.ctx.zero)

    @property
    def is_zero(self) -> bool:
        return not self._coefficients

    def __eq__(self, other):
        return (
            isinstance(other, SourceForm)
            and self.ctx.compatible(other.ctx)
            and self._coefficients == other._coefficients
        )

    def as_biform(self) -> BiForm:
        ctx = self.ctx
        total = BiForm.zero(ctx)
        vol = BiForm.volume(ctx)
        zero_idx = MultiIndex.zero(ctx.m)
        for name, value in sorted(self._coefficients.items()):
            total = total + BiForm.rho(ctx, name, zero_idx).wedge(vol).scaled(value)
        return total

    def __repr__(self):
        body = ", ".join(f"{n}: {e}" for n, e in sorted(self._coefficients.items()))
        return f"<SourceForm {{{body}}}>"

    def to_json_obj(self) -> dict:
        return {name: str(value) for name, value in sorted(self._coefficients.items())}


@dataclass(frozen=True)
class CurrentJ:
    """A horizontal (m-1)-form given by components J^mu, standing for
    sum_mu (-1)^(mu-1) J^mu . theta^1 ^ ... (theta^mu omitted) ... ^ theta^m."""

    ctx: Context
    components: tuple[DiffExpr, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.ctx.m:
            raise DomainError(
                f"current needs {self.ctx.m} components, got {len(comps)}"
            )
        object.__setattr__(self, "components", comps)

    def as_biform(self) -> BiForm:
        ctx = self.ctx
        total = BiForm.zero(ctx)
        for mu in range(1, ctx.m + 1):
            hlist = tuple(nu for nu in range(1, ctx.m + 1) if nu != mu)
            sign = ctx.const(1 if (mu - 1) % 2 == 0 else -1)
            total = total + BiForm(
                ctx, {((), hlist): sign * self.components[mu - 1]}
            )
        return total


def _check_bidegree_1m(omega: BiForm) -> None:
    ctx = omega.ctx
    full = tuple(range(1, ctx.m + 1))
    for (vlist, hlist), _ in omega.terms.items():
        if len(vlist) != 1 or hlist != full:
            raise DegreeError(
                f"integration by parts expects a homogeneous (1, m)-form; "
                f"found a term of bidegree ({len(vlist)}, {len(hlist)})"
            )


def integrate_by_parts(
    omega: BiForm,
    *,
    pivot: str = "min",
    verify: bool = True,
    cancel: Callable[[], bool] | None = None,
) -> tuple[SourceForm, BiForm]:
    """Rewrite a (1,m)-form as sigma + d_H eta with sigma a source form.

    Each step removes one total-derivative order from one contact generator:
    a term c . rho^a_i ^ vol with i != 0 and a pivot direction mu with
    i^mu > 0 becomes -(D_mu c) . rho^a_{i-(mu)} ^ vol, at the cost of the
    exact correction (-1)^mu d_H(c . rho^a_{i-(mu)} ^ vol-without-mu).
    The sum of |i| over terms strictly decreases, so this terminates.
    """
    if pivot not in ("min", "max"):
        raise ValueError("pivot must be 'min' or 'max'")
    _check_bidegree_1m(omega)
    ctx = omega.ctx
    full = tuple(range(1, ctx.m + 1))
    remaining = omega
    eta = BiForm.zero(ctx)
    while True:
        if cancel is not None and cancel():
            raise DomainError("integration by parts cancelled")
        work = None
        for (vlist, _hlist), coeff in sorted(
            remaining.terms.items(),
            key=lambda kv: (kv[0][0][0][0], kv[0][0][0][1].grlex_key()),
        ):
            name, idx = vlist[0]
            if idx.norm > 0:
                work = (name, idx, coeff)
                break
        if work is None:
            break
        name, idx, coeff = work
        directions = [mu for mu in range(1, ctx.m + 1) if idx[mu - 1] > 0]
        mu = directions[0] if pivot == "min" else directions[-1]
        lower = idx.sub(MultiIndex.unit(mu, ctx.m))
        hlist_hat = tuple(nu for nu in full if nu != mu)
        sign = ctx.const(1 if mu % 2 == 0 else -1)  # (-1)^mu
        eta = eta + BiForm(ctx, {(((name, lower),), hlist_hat): sign * coeff})
        step = BiForm(
            ctx,
            {
                (((name, idx),), full): -coeff,
                (((name, lower),), full): -total_derivative(coeff, mu),
            },
        )
        remaining = remaining + step
    source: dict[str, DiffExpr] = {}
    for (vlist, _hlist), coeff in remaining.terms.items():
        name, idx = vlist[0]
        if idx.norm != 0:
            raise InvariantViolation("integration by parts left a non-source term")
        source[name] = source.get(name, ctx.zero) + coeff
    sigma = SourceForm(ctx, source)
    if verify:
        if omega != sigma.as_biform() + d_H(eta):
            raise InvariantViolation(
                "integration by parts certificate failed: omega != sigma + d_H eta"
            )
    return sigma, eta


def euler_closed_form(lagrangian: Lagrangian) -> SourceForm:
    """E_a = sum_i (-1)^|i| D_i dL/du^a_i over the jet support of L."""
    density = lagrangian.density
    ctx = density.ctx
    coeffs: dict[str, DiffExpr] = {}
    for name, idx in density.jet_support():
        partial = density.partial_u(name, idx)
        if partial.is_zero:
            continue
        sign = -1 if idx.norm % 2 else 1
        term = ctx.const(sign) * total_derivative_multi(partial, idx)
        coeffs[name] = coeffs.get(name, ctx.zero) + term
    return SourceForm(ctx, coeffs)


def euler(lagrangian: Lagrangian, *, verify: bool = True) -> SourceForm:
    """The Euler-Lagrange source form of L, via integration by parts of
    d_V(L . vol), cross-checked against the classical closed form."""
    from .forms import d_V

    sigma, _eta = integrate_by_parts(d_V(lagrangian.top_form()), verify=verify)
    if verify:
        closed = euler_closed_form(lagrangian)
        if sigma != closed:
            raise InvariantViolation(
                "Euler-Lagrange computations disagree: bicomplex route vs closed form"
            )
    return sigma


def is_total_divergence(f: DiffExpr) -> bool:
    """True iff every Euler coefficient of f vanishes and f has no
    constant term (constants are d_H-closed but land in the augmentation,
    not in the image of the divergence within this test's convention)."""
    if f.constant_part() != 0:
        return False
    return euler(Lagrangian(f)).is_zero


def divergence(J: CurrentJ, *, verify: bool = True) -> DiffExpr:
    """Div J = sum_mu D_mu J^mu; cross-checked against d_H of the
    corresponding (0, m-1)-form."""
    ctx = J.ctx
    result = ctx.zero
    for mu in range(1, ctx.m + 1):
        result = result + total_derivative(J.components[mu - 1], mu)
    if verify:
        via_forms = d_H(J.as_biform())
        expected = BiForm.volume(ctx).scaled(result)
        if via_forms != expected:
            raise InvariantViolation("divergence disagrees with d_H on forms")
    return result


def conservation_residual(
    J: CurrentJ,
    system: Sequence[DiffExpr],
    cofactors: Mapping[CofactorKey, DiffExpr],
) -> DiffExpr:
    """Div J minus the exhibited combination sum Q^{sigma,i} D_i F^sigma."""
    ctx = J.ctx
    residual = divergence(J)
    for (sigma_idx, idx), q in cofactors.items():
        if not 0 <= sigma_idx < len(system):
            raise DomainError(f"cofactor refers to equation {sigma_idx}, system has {len(system)}")
        term = q * total_derivative_multi(system[sigma_idx], ctx.index(idx))
        residual = residual - term
    return residual


def check_conservation_law(
    J: CurrentJ,
    system: Sequence[DiffExpr],
    cofactors: Mapping[CofactorKey, DiffExpr],
) -> bool:
    """True iff Div J equals the exhibited element of the differential ideal
    of the system, exactly."""
    return conservation_residual(J, system, cofactors).is_zero


def noether_symmetry_check(
    phi: Mapping[str, DiffExpr], lagrangian: Lagrangian, window: int
) -> bool:
    """True iff the prolonged field applied to L is a total divergence.

    The window must cover the jet support of L plus one extra order.
    """
    density = lagrangian.density
    ctx = density.ctx
    needed = (density.order() or 0) + 1
    if window < needed:
        raise WindowError(
            f"window {window} too small: the Lagrangian has jet order "
            f"{density.order() or 0}, need at least {needed}"
        )
    field = prolong(ctx, phi, window)
    return is_total_divergence(field.apply(density))
