"""Jet coordinates of one dependent variable, total derivatives, and the
reduction of jets modulo the second heavenly equation and its prolongation."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .forms import Form, GeneratorSet
from .symexpr import ONE_P, Poly, Scalar, Var, substitute

__all__ = [
    "JetTruncationError",
    "JetContext",
    "EquationManifold",
    "heavenly_equation",
    "contact_forms",
    "jet2_chart",
]

LETTERS = ("t", "x", "y", "z")

MultiIndex = Tuple[int, ...]


class JetTruncationError(ValueError):
    pass


def jet_name(counts: MultiIndex, letters: Sequence[str], dependent: str = "u") -> str:
    if not any(counts):
        return dependent
    return dependent + "_" + "".join(l * k for l, k in zip(letters, counts))


class JetContext:
    """Independent variables plus lazily registered jets ``u_sigma`` up to order K."""

    def __init__(self, independent: Sequence[str] = LETTERS, jet_order: int = 6,
                 dependent: str = "u", gens: Optional[GeneratorSet] = None):
        if any(len(l) != 1 for l in independent):
            raise ValueError("independent variables must be single letters")
        self.letters = tuple(independent)
        self.n = len(self.letters)
        self.order = jet_order
        self.dependent = dependent
        self.independent = [Var(l) for l in self.letters]
        self.gens = gens if gens is not None else GeneratorSet()
        self.gens.declare(*self.independent)
        self._jet_of: Dict[int, MultiIndex] = {}
        self._var_of: Dict[MultiIndex, Var] = {}
        self.jet((0,) * self.n)

    def direction(self, d) -> int:
        if isinstance(d, int):
            return d
        try:
            return self.letters.index(d)
        except ValueError:
            raise ValueError(f"unknown direction {d!r}") from None

    def jet(self, counts) -> Var:
        """Var for a multi-index given as counts or as a letter string like ``"xy"``."""
        if isinstance(counts, str):
            c = [0] * self.n
            for ch in counts:
                c[self.direction(ch)] += 1
            counts = tuple(c)
        counts = tuple(counts)
        v = self._var_of.get(counts)
        if v is not None:
            return v
        if sum(counts) > self.order:
            raise JetTruncationError(
                f"jet {jet_name(counts, self.letters, self.dependent)} exceeds truncation order {self.order}"
            )
        v = Var(jet_name(counts, self.letters, self.dependent))
        self._var_of[counts] = v
        self._jet_of[v.id] = counts
        return v

    def u(self, letters: str = "") -> Scalar:
        return Scalar.from_var(self.jet(letters))

    def counts(self, v) -> Optional[MultiIndex]:
        if isinstance(v, Var):
            v = v.id
        return self._jet_of.get(v)

    def parse(self, text: str) -> Scalar:
        from .syntax import parse_scalar

        s = parse_scalar(text)
        for v in s.variables():
            self._register_name(v)
        return s

    def _register_name(self, v: Var) -> None:
        name = v.name
        dep = self.dependent
        if name == dep or name.startswith(dep + "_"):
            suffix = name[len(dep) + 1:]
            if all(ch in self.letters for ch in suffix):
                ordered = "".join(sorted(suffix, key=self.letters.index))
                if ordered != suffix:
                    raise ValueError(f"jet name {name!r} not in canonical letter order")
                self.jet(suffix)

    def total_derivative_images(self, s: Scalar, d: int) -> Dict[int, Poly]:
        images = {self.independent[d].id: ONE_P}
        for k in s.var_ids():
            c = self._jet_of.get(k)
            if c is not None:
                c2 = list(c)
                c2[d] += 1
                images[k] = Poly.from_var(self.jet(tuple(c2)))
        return images

    def total_derivative(self, s, d) -> Scalar:
        """``D_d s = ds/dx^d + sum_sigma u_{sigma+d} ds/du_sigma``; other vars are constants."""
        s = Scalar.coerce(s)
        d = self.direction(d)
        return s.derivation(self.total_derivative_images(s, d))


class EquationManifold:
    """A scalar PDE ``u_lhs = rhs`` solved for one principal derivative.

    Jets whose multi-index dominates ``lhs`` are principal; every other jet
    is an internal coordinate.  ``rhs`` must be free of principal jets and of
    the last direction appearing in ``lhs`` so that rewriting terminates.
    """

    def __init__(self, ctx: JetContext, lhs: str, rhs: str):
        self.ctx = ctx
        self.lhs = ctx.counts(ctx.jet(lhs))
        self.solved = ctx.jet(lhs)
        self.rhs = ctx.parse(rhs)
        for v in self.rhs.variables():
            c = ctx.counts(v)
            if c is not None and self.is_principal(c):
                raise ValueError("right-hand side contains principal jets")
        self._normal: Dict[MultiIndex, Scalar] = {}

    def is_principal(self, counts: MultiIndex) -> bool:
        return all(a >= b for a, b in zip(counts, self.lhs))

    def is_internal(self, v) -> bool:
        c = self.ctx.counts(v)
        return c is None or not self.is_principal(c)

    def residual(self) -> Scalar:
        """``E = u_lhs - rhs``."""
        return Scalar.from_var(self.solved) - self.rhs

    def normal_form(self, counts: MultiIndex) -> Scalar:
        counts = tuple(counts)
        if not self.is_principal(counts):
            return Scalar.from_var(self.ctx.jet(counts))
        nf = self._normal.get(counts)
        if nf is not None:
            return nf
        if sum(counts) > self.ctx.order:
            raise JetTruncationError(
                f"jet {jet_name(counts, self.ctx.letters)} exceeds truncation order {self.ctx.order}"
            )
        nf = self.rhs
        extra = [a - b for a, b in zip(counts, self.lhs)]
        for d, k in enumerate(extra):
            for _ in range(k):
                nf = self.reduce(self.ctx.total_derivative(nf, d))
        self._normal[counts] = nf
        return nf

    def reduce(self, s) -> Scalar:
        """Rewrite every principal jet in ``s`` into internal coordinates."""
        s = Scalar.coerce(s)
        images = {}
        for k in s.var_ids():
            c = self.ctx._jet_of.get(k)
            if c is not None and self.is_principal(c):
                images[Var(k)] = self.normal_form(c)
        if not images:
            return s
        return substitute(s, images)

    def restricted_derivative(self, s, d) -> Scalar:
        return self.reduce(self.ctx.total_derivative(self.reduce(s), d))


def heavenly_equation(ctx: JetContext) -> EquationManifold:
    """``u_xz = u_ty + u_xx u_yy - u_xy^2`` on a (t, x, y, z) jet context."""
    if ctx.letters != LETTERS:
        raise ValueError("the heavenly equation needs independent variables t, x, y, z")
    return EquationManifold(ctx, "xz", "u_ty + u_xx*u_yy - u_xy^2")


def jet2_chart(n: int, gens: Optional[GeneratorSet] = None):
    """Coordinates of J^2 for n independent variables (x^i = t, x, y, z).

    Returns (ctx, xs, u, ui, uij) where ``uij[(i, j)]`` is defined for all
    ordered pairs with ``uij[(j, i)] is uij[(i, j)]``.  Differentials are
    declared du, du_i, du_ij, dx^i so that contact forms pivot on the
    jet differentials.
    """
    if not 1 <= n <= 4:
        raise ValueError("n must be between 1 and 4")
    gens = gens if gens is not None else GeneratorSet()
    letters = LETTERS[:n]
    u = Var("u")
    ui = [Var(jet_name(tuple(int(k == i) for k in range(n)), letters)) for i in range(n)]
    uij = {}
    for i in range(n):
        for j in range(i, n):
            c = [0] * n
            c[i] += 1
            c[j] += 1
            v = Var(jet_name(tuple(c), letters))
            uij[(i, j)] = uij[(j, i)] = v
    gens.declare(u, *ui, *[uij[(i, j)] for i in range(n) for j in range(i, n)])
    ctx = JetContext(letters, jet_order=2, gens=gens)
    for v in [u, *ui, *uij.values()]:
        ctx._register_name(v)
    return ctx, ctx.independent, u, ui, uij


def contact_forms(n: int, gens: Optional[GeneratorSet] = None) -> List[Form]:
    """``theta_0 = du - u_i dx^i`` and ``theta_i = du_i - u_ij dx^j`` on J^2."""
    ctx, xs, u, ui, uij = jet2_chart(n, gens)
    g = ctx.gens
    th0 = g.d(u)
    for i in range(n):
        th0 = th0 - g.d(xs[i]) * ui[i]
    out = [th0]
    for i in range(n):
        th = g.d(ui[i])
        for j in range(n):
            th = th - g.d(xs[j]) * uij[(i, j)]
        out.append(th)
    return out
