"""Total derivatives and the horizontal structure of the jet algebra.

The total derivative in direction mu acts as the partial in x^mu plus the
shift u^a_i -> u^a_{i+(mu)} on jet variables; its defining property is the
chain rule along sections.  The module also decides D-constancy and the
horizontal filtration degree, each cross-checked against the closed-form
characterization (constants, respectively x-polynomial degree), so the two
answers double as canonicalization oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import DomainError, InvariantViolation
from .expr import Context, DiffExpr
from .multiindex import MultiIndex, exact_norm


def total_derivative(f: DiffExpr, mu: int) -> DiffExpr:
    """D_mu f, summing only over the finite jet support of f."""
    ctx = f.ctx
    ctx.require_direction(mu)
    result = f.partial_x(mu)
    for name, idx in f.jet_support():
        df = f.partial_u(name, idx)
        if not df.is_zero:
            result = result + ctx.u(name, idx.bump(mu)) * df
    return result


def total_derivative_multi(f: DiffExpr, j: MultiIndex) -> DiffExpr:
    """D_j f = (D_1)^{j^1} ... (D_m)^{j^m} f; the factors commute."""
    j = f.ctx.index(j)
    result = f
    for mu, count in enumerate(j, start=1):
        for _ in range(count):
            result = total_derivative(result, mu)
    return result


@dataclass(frozen=True)
class Section:
    """A polynomial section x -> u: one x-polynomial per dependent name."""

    ctx: Context
    components: Mapping[str, DiffExpr]

    def __post_init__(self):
        comps = dict(self.components)
        for name, poly in comps.items():
            self.ctx.require_dep(name)
            if poly.jet_support():
                raise DomainError(
                    f"section component {name!r} must not contain jet variables"
                )
        object.__setattr__(self, "components", comps)

    def component(self, name: str) -> DiffExpr:
        self.ctx.require_dep(name)
        if name not in self.components:
            raise DomainError(f"section does not define component {name!r}")
        return self.components[name]

    def derivative(self, name: str, idx: MultiIndex) -> DiffExpr:
        """The iterated x-derivative of the component, i.e. the jet of the
        section at index idx."""
        poly = self.component(name)
        for mu, count in enumerate(self.ctx.index(idx), start=1):
            for _ in range(count):
                poly = poly.partial_x(mu)
        return poly


def jet_substitute(f: DiffExpr, phi: Section) -> DiffExpr:
    """Substitute u^a_i -> (d/dx)^i phi^a, pulling f back along the section."""
    mapping = {
        (name, idx): phi.derivative(name, idx) for name, idx in f.jet_support()
    }
    return f.subs_jets(mapping)


def chain_rule_check(f: DiffExpr, phi: Section, mu: int) -> bool:
    """Exact check that d/dx^mu of the pullback equals the pullback of D_mu f."""
    lhs = jet_substitute(f, phi).partial_x(mu)
    rhs = jet_substitute(total_derivative(f, mu), phi)
    return lhs == rhs


def is_D_constant(f: DiffExpr) -> bool:
    """True iff all total derivatives of f vanish.

    On the default polynomial class the answer must coincide with "f is a
    rational constant"; a mismatch means a canonicalization bug and raises.
    With extension atoms present the constant test is not a full decision
    (e.g. sin^2 + cos^2), so only the derivative criterion is used.
    """
    by_derivatives = all(
        total_derivative(f, mu).is_zero for mu in range(1, f.ctx.m + 1)
    )
    if f.has_extended_atoms():
        return by_derivatives
    by_form = f.as_constant() is not None
    if by_form != by_derivatives:
        raise InvariantViolation(
            f"D-constant checks disagree on {f}: derivatives say {by_derivatives}, "
            f"canonical form says {by_form}"
        )
    return by_derivatives


def horizontal_degree(f: DiffExpr, q_max: int) -> Optional[int]:
    """Least q <= q_max with every (q+1)-fold total derivative zero, or None.

    Members of the filtration are exactly the x-polynomials of total degree
    q; that characterization is re-verified on every positive answer.
    """
    if q_max < 0:
        raise ValueError("q_max must be >= 0")
    ctx = f.ctx
    # level[j] = D_j f for |j| = current depth, built incrementally
    level: dict[MultiIndex, DiffExpr] = {MultiIndex.zero(ctx.m): f}
    for q in range(q_max + 1):
        next_level: dict[MultiIndex, DiffExpr] = {}
        for j in exact_norm(q + 1, ctx.m):
            mu = next(k + 1 for k, e in enumerate(j) if e > 0)
            prev = level[j.sub(MultiIndex.unit(mu, ctx.m))]
            next_level[j] = total_derivative(prev, mu)
        if all(g.is_zero for g in next_level.values()):
            _verify_polynomial_degree(f, q)
            return q
        level = next_level
    return None


def _verify_polynomial_degree(f: DiffExpr, q: int) -> None:
    degree = f.total_x_degree()
    if f.is_zero:
        return
    if degree is None or degree != q:
        raise InvariantViolation(
            f"horizontal degree {q} of {f} does not match its x-polynomial "
            f"degree {degree}"
        )
