"""Vertical vector fields on the jet algebra and their graded structure.

A vertical field is a finite family of coefficients zeta^a_i acting as
sum zeta^a_i d/du^a_i.  The covariant derivative nabla_mu measures failure
to commute with the total derivative D_mu; its iterates admit a closed
binomial formula, and every field decomposes uniquely into generator blocks

    eps^k_phi  with components  C(i,k) * D_{i-k} phi^a.

The block of k = 0 is the prolongation (evolutionary) part; the largest
block norm is the Lie-Baecklund filtration degree.  Closed formulas are
cross-checked against their iterative definitions wherever the two exist;
a disagreement raises InvariantViolation rather than returning silently.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .errors import DomainError, InvariantViolation
from .expr import Context, DiffExpr
from .jetalg import total_derivative, total_derivative_multi
from .multiindex import MultiIndex, enumerate_upto, exact_norm

CompKey = tuple[str, MultiIndex]


class VerticalField:
    """Finite-support family (name, index) -> coefficient; immutable.

    Absent components are zero: an explicit field is complete data, not a
    truncation.  Truncations of infinite-support fields (prolongations,
    generator blocks) are ordinary VerticalFields whose callers track the
    window themselves; see forms.MixedField.
    """

    __slots__ = ("ctx", "_components")

    def __init__(self, ctx: Context, components: Mapping[CompKey, DiffExpr]):
        comps: dict[CompKey, DiffExpr] = {}
        for (name, idx), value in components.items():
            ctx.require_dep(name)
            idx = ctx.index(idx)
            if not value.ctx.compatible(ctx):
                raise DomainError("field coefficient from an incompatible context")
            if not value.is_zero:
                comps[(name, idx)] = value
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "_components", comps)

    def __setattr__(self, name, value):
        raise AttributeError("VerticalField is immutable")

    @classmethod
    def zero(cls, ctx: Context) -> "VerticalField":
        return cls(ctx, {})

    @property
    def components(self) -> dict[CompKey, DiffExpr]:
        return dict(self._components)

    @property
    def support(self) -> frozenset[CompKey]:
        return frozenset(self._components)

    @property
    def is_zero(self) -> bool:
        return not self._components

    def component(self, name: str, idx) -> DiffExpr:
        return self._components.get((name, self.ctx.index(idx)), self.ctx.zero)

    def max_support_norm(self) -> int:
        """Largest |i| in the support (0 for the zero field)."""
        if not self._components:
            return 0
        return max(idx.norm for _, idx in self._components)

    def __eq__(self, other):
        return (
            isinstance(other, VerticalField)
            and self.ctx.compatible(other.ctx)
            and self._components == other._components
        )

    def __add__(self, other: "VerticalField") -> "VerticalField":
        acc = dict(self._components)
        for key, value in other._components.items():
            acc[key] = acc.get(key, self.ctx.zero) + value
        return VerticalField(self.ctx, acc)

    def __neg__(self) -> "VerticalField":
        return VerticalField(self.ctx, {k: -v for k, v in self._components.items()})

    def __sub__(self, other: "VerticalField") -> "VerticalField":
        return self + (-other)

    def scaled(self, factor: DiffExpr) -> "VerticalField":
        return VerticalField(
            self.ctx, {k: factor * v for k, v in self._components.items()}
        )

    def apply(self, f: DiffExpr) -> DiffExpr:
        """The field as a differentiation: sum zeta^a_i * df/du^a_i, a finite
        sum over the intersection of supports."""
        result = self.ctx.zero
        for name, idx in f.jet_support():
            coeff = self._components.get((name, idx))
            if coeff is not None:
                result = result + coeff * f.partial_u(name, idx)
        return result

    def _sorted_items(self):
        return sorted(
            self._components.items(), key=lambda kv: (kv[0][0], kv[0][1].grlex_key())
        )

    def __repr__(self):
        body = ", ".join(f"({n},{i})->{e}" for (n, i), e in self._sorted_items())
        return f"<VerticalField {{{body}}}>"

    def to_json_obj(self) -> dict:
        return {
            "components": [
                {"dep": name, "index": list(idx), "expr": str(value)}
                for (name, idx), value in self._sorted_items()
            ]
        }

    @classmethod
    def from_json_obj(cls, ctx: Context, obj: Mapping) -> "VerticalField":
        comps = {}
        for entry in obj["components"]:
            key = (entry["dep"], ctx.index(entry["index"]))
            comps[key] = ctx.parse(entry["expr"])
        return cls(ctx, comps)


def apply_field(field: VerticalField, f: DiffExpr) -> DiffExpr:
    return field.apply(f)


def nabla(zeta: VerticalField, mu: int) -> VerticalField:
    """(nabla_mu zeta)^a_i = D_mu zeta^a_i - zeta^a_{i+(mu)}."""
    ctx = zeta.ctx
    ctx.require_direction(mu)
    candidates: set[CompKey] = set(zeta.support)
    for name, idx in zeta.support:
        down = idx.sub(MultiIndex.unit(mu, ctx.m))
        if down is not None:
            candidates.add((name, down))
    comps = {}
    for name, idx in candidates:
        value = total_derivative(zeta.component(name, idx), mu) - zeta.component(
            name, idx.bump(mu)
        )
        comps[(name, idx)] = value
    return VerticalField(ctx, comps)


def nabla_iterated(zeta: VerticalField, r: MultiIndex) -> VerticalField:
    """nabla_r by iterating the single-direction operator."""
    r = zeta.ctx.index(r)
    result = zeta
    for mu, count in enumerate(r, start=1):
        for _ in range(count):
            result = nabla(result, mu)
    return result


def nabla_multi(zeta: VerticalField, r, *, verify: bool = True) -> VerticalField:
    """nabla_r via the closed binomial formula

        (nabla_r zeta)^a_i = sum_{k+j=r} (-1)^|k| C(r,k) D_j zeta^a_{i+k},

    cross-checked against the iterated definition unless verify=False.
    """
    ctx = zeta.ctx
    r = ctx.index(r)
    k_range = [k for k in enumerate_upto(r.norm, ctx.m) if k.leq(r)]
    candidates: set[CompKey] = set()
    for name, s in zeta.support:
        for k in k_range:
            i = s.sub(k)
            if i is not None:
                candidates.add((name, i))
    d_memo: dict[tuple[str, MultiIndex, MultiIndex], DiffExpr] = {}

    def d_of_component(name: str, s: MultiIndex, j: MultiIndex) -> DiffExpr:
        key = (name, s, j)
        if key in d_memo:
            return d_memo[key]
        if j.norm == 0:
            value = zeta.component(name, s)
        else:
            mu = next(p + 1 for p, e in enumerate(j) if e > 0)
            value = total_derivative(
                d_of_component(name, s, j.sub(MultiIndex.unit(mu, ctx.m))), mu
            )
        d_memo[key] = value
        return value

    comps = {}
    for name, i in candidates:
        total = ctx.zero
        for k in k_range:
            coeff = r.binom(k)
            if coeff == 0:
                continue
            source = i.add(k)
            if (name, source) not in zeta.support:
                continue
            j = r.sub(k)
            sign = -1 if k.norm % 2 else 1
            total = total + ctx.const(sign * coeff) * d_of_component(name, source, j)
        comps[(name, i)] = total
    result = VerticalField(ctx, comps)
    if verify:
        iterated = nabla_iterated(zeta, r)
        if result != iterated:
            raise InvariantViolation(
                f"closed-form nabla_{r} disagrees with the iterated computation"
            )
    return result


def epsilon_component(
    ctx: Context, k, phi: Mapping[str, DiffExpr], alpha: str, i
) -> DiffExpr:
    """Component at (alpha, i) of the generator block eps^k_phi:
    C(i,k) * D_{i-k} phi^alpha, zero unless k <= i componentwise."""
    k = ctx.index(k)
    i = ctx.index(i)
    ctx.require_dep(alpha)
    coeff = i.binom(k)
    if coeff == 0:
        return ctx.zero
    source = phi.get(alpha, ctx.zero)
    if source.is_zero:
        return ctx.zero
    diff = i.sub(k)
    return ctx.const(coeff) * total_derivative_multi(source, diff)


class GradedField:
    """A vertical field presented by its generator blocks: a finite map
    k -> phi_k, standing for sum_k eps^k_{phi_k}.

    Component support over i is infinite in general, so consumers ask for an
    explicit truncation via materialize(window).
    """

    __slots__ = ("ctx", "_generators")

    def __init__(self, ctx: Context, generators: Mapping[MultiIndex, Mapping[str, DiffExpr]]):
        gens: dict[MultiIndex, dict[str, DiffExpr]] = {}
        for k, phi in generators.items():
            k = ctx.index(k)
            entry = {}
            for name, value in phi.items():
                ctx.require_dep(name)
                if not value.is_zero:
                    entry[name] = value
            if entry:
                gens[k] = entry
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "_generators", gens)

    def __setattr__(self, name, value):
        raise AttributeError("GradedField is immutable")

    @property
    def generators(self) -> dict[MultiIndex, dict[str, DiffExpr]]:
        return {k: dict(phi) for k, phi in self._generators.items()}

    @property
    def support_norms(self) -> frozenset[int]:
        return frozenset(k.norm for k in self._generators)

    def coefficient(self, k, name: str) -> DiffExpr:
        phi = self._generators.get(self.ctx.index(k))
        if phi is None:
            return self.ctx.zero
        return phi.get(name, self.ctx.zero)

    def __eq__(self, other):
        return (
            isinstance(other, GradedField)
            and self.ctx.compatible(other.ctx)
            and self._generators == other._generators
        )

    def materialize(self, window: int) -> VerticalField:
        """Explicit components for all |i| <= window."""
        if window < 0:
            raise ValueError("window must be >= 0")
        comps: dict[CompKey, DiffExpr] = {}
        for i in enumerate_upto(window, self.ctx.m):
            for name in self.ctx.dep_names:
                total = self.ctx.zero
                for k, phi in self._generators.items():
                    total = total + epsilon_component(self.ctx, k, phi, name, i)
                if not total.is_zero:
                    comps[(name, i)] = total
        return VerticalField(self.ctx, comps)

    def _sorted_items(self):
        return sorted(self._generators.items(), key=lambda kv: kv[0].grlex_key())

    def to_json_obj(self) -> dict:
        return {
            "generators": [
                {
                    "index": list(k),
                    "phi": {name: str(value) for name, value in sorted(phi.items())},
                }
                for k, phi in self._sorted_items()
            ]
        }

    @classmethod
    def from_json_obj(cls, ctx: Context, obj: Mapping) -> "GradedField":
        gens = {}
        for entry in obj["generators"]:
            k = ctx.index(entry["index"])
            gens[k] = {name: ctx.parse(text) for name, text in entry["phi"].items()}
        return cls(ctx, gens)


def epsilon_field(ctx: Context, k, phi: Mapping[str, DiffExpr]) -> GradedField:
    """The single generator block eps^k_phi."""
    return GradedField(ctx, {ctx.index(k): dict(phi)})


def prolong(ctx: Context, phi: Mapping[str, DiffExpr], window: int) -> VerticalField:
    """Truncated prolongation: components D_i phi^a for all |i| <= window."""
    if window < 0:
        raise ValueError("window must be >= 0")
    comps: dict[CompKey, DiffExpr] = {}
    for name, value in phi.items():
        ctx.require_dep(name)
        if value.is_zero:
            continue
        for i in enumerate_upto(window, ctx.m):
            comps[(name, i)] = total_derivative_multi(value, i)
    return VerticalField(ctx, comps)


def decompose(zeta: VerticalField, K: int, *, verify: bool = True) -> GradedField:
    """Generator blocks phi_k for |k| <= K of the unique representation
    zeta = sum_k eps^k_{phi_k}, with

        phi^a_k = sum_{i+j=k} (-1)^|j| C(k,i) D_j zeta^a_i.

    With verify on, reconstruction is re-checked exactly on every component
    with |i| <= K; components that low only involve blocks with |k| <= K,
    so the check is exact rather than truncated.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    ctx = zeta.ctx
    gens: dict[MultiIndex, dict[str, DiffExpr]] = {}
    for k in enumerate_upto(K, ctx.m):
        entry: dict[str, DiffExpr] = {}
        for name in ctx.dep_names:
            total = ctx.zero
            for i in enumerate_upto(k.norm, ctx.m):
                if not i.leq(k):
                    continue
                if (name, i) not in zeta.support:
                    continue
                j = k.sub(i)
                coeff = k.binom(i)
                sign = -1 if j.norm % 2 else 1
                total = total + ctx.const(sign * coeff) * total_derivative_multi(
                    zeta.component(name, i), j
                )
            if not total.is_zero:
                entry[name] = total
        if entry:
            gens[k] = entry
    result = GradedField(ctx, gens)
    if verify:
        reconstruction = result.materialize(K)
        for i in enumerate_upto(K, ctx.m):
            for name in ctx.dep_names:
                if reconstruction.component(name, i) != zeta.component(name, i):
                    raise InvariantViolation(
                        f"decomposition round-trip failed at ({name}, {i})"
                    )
    return result


def lie_baecklund_degree(zeta: VerticalField, K: int) -> Optional[int]:
    """Least filtration level q of the field, judged from blocks |k| <= K.

    None means "exceeds K": the graded support reaches norm K (no finite
    window can then certify the tail vanishes), or the field has components
    the blocks within K do not explain.  A positive answer is cross-checked
    against the recursive definition: all (q+1)-fold nabla iterates vanish
    on the truncation-safe part of the window (truncating an infinite
    prolongation makes the iterates nonzero near the support boundary, so
    only components at norm <= W - (q+1) are conclusive).
    """
    if zeta.is_zero:
        return 0
    graded = decompose(zeta, K)
    norms = graded.support_norms
    q = max(norms) if norms else 0
    if q >= K:
        return None
    window = zeta.max_support_norm()
    if graded.materialize(window) != zeta:
        return None
    safe = window - (q + 1)
    for r in exact_norm(q + 1, zeta.ctx.m):
        iterate = nabla_multi(zeta, r, verify=False)
        for (name, i), value in iterate.components.items():
            if i.norm <= safe and not value.is_zero:
                raise InvariantViolation(
                    f"graded support says degree {q} but nabla_{r} is nonzero "
                    f"at ({name}, {i})"
                )
    return q


def commutator(x: VerticalField, y: VerticalField) -> VerticalField:
    """[X, Y]^a_i = X(eta^a_i) - Y(zeta^a_i); the basis fields commute."""
    ctx = x.ctx
    if not ctx.compatible(y.ctx):
        raise DomainError("fields from incompatible contexts")
    comps = {}
    for key in x.support | y.support:
        name, idx = key
        value = x.apply(y.component(name, idx)) - y.apply(x.component(name, idx))
        comps[key] = value
    return VerticalField(ctx, comps)
