"""The covering of the second heavenly equation.

Fibre coordinates ``q_i_j`` stand for ``D_x^i D_y^j q``.  The prolonged
fields act on them by index shifts (x, y) or by the prolongations of the
Lax pair right-hand sides (t, z).
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .forms import Form, exterior_derivative, substitute_form
from .jets import LETTERS, EquationManifold, JetContext, heavenly_equation
from .symexpr import ONE_P, Poly, Scalar, Var

__all__ = ["CoveringTruncationError", "CoveringContext"]

T_RHS = "(u_xy - {lam})*q_1_0 - u_xx*q_0_1"
Z_RHS = "u_yy*q_1_0 - (u_xy + {lam})*q_0_1"


class CoveringTruncationError(ValueError):
    pass


def q_name(i: int, j: int) -> str:
    return f"q_{i}_{j}"


class CoveringContext:
    """Jet space of the heavenly equation extended by ``q_{i,j}``, ``i + j <= Q``."""

    def __init__(self, jet_order: int = 6, cov_order: int = 4, lam: str = "lambda",
                 jets: Optional[JetContext] = None):
        self.jets = jets if jets is not None else JetContext(LETTERS, jet_order)
        self.gens = self.jets.gens
        self.eq: EquationManifold = heavenly_equation(self.jets)
        self.lam = Var(lam)
        self.gens.add_constant(self.lam)
        self.order = cov_order
        self._q_of: Dict[int, Tuple[int, int]] = {}
        self._q: Dict[Tuple[int, int], Var] = {}
        for lvl in range(cov_order + 1):
            for i in range(lvl + 1):
                v = Var(q_name(i, lvl - i))
                self._q[(i, lvl - i)] = v
                self._q_of[v.id] = (i, lvl - i)
        self.t_rhs = self.jets.parse(T_RHS.format(lam=lam))
        self.z_rhs = self.jets.parse(Z_RHS.format(lam=lam))
        self._flow: Dict[Tuple[str, bool], Dict[Tuple[int, int], Scalar]] = {
            ("t", True): {(0, 0): self.t_rhs},
            ("t", False): {(0, 0): self.t_rhs},
            ("z", True): {(0, 0): self.z_rhs},
            ("z", False): {(0, 0): self.z_rhs},
        }

    # coordinates --------------------------------------------------------
    def q(self, i: int, j: int) -> Var:
        v = self._q.get((i, j))
        if v is None:
            raise CoveringTruncationError(
                f"{q_name(i, j)} exceeds covering order {self.order}"
            )
        return v

    def qs(self, i: int, j: int) -> Scalar:
        return Scalar.from_var(self.q(i, j))

    def q_index(self, v) -> Optional[Tuple[int, int]]:
        return self._q_of.get(v.id if isinstance(v, Var) else v)

    # prolonged derivatives ---------------------------------------------
    def flow(self, d: str, i: int, j: int, reduce: bool = True) -> Scalar:
        """``D~_d q_{i,j}`` for d in {t, z}: ``D~_x^i D~_y^j`` of the Lax right side."""
        memo = self._flow[(d, reduce)]
        r = memo.get((i, j))
        if r is not None:
            return r
        if i + j + 1 > self.order:
            raise CoveringTruncationError(
                f"D~_{d} {q_name(i, j)} needs q of level {i + j + 1} > {self.order}"
            )
        if i > 0:
            r = self.prolonged_derivative(self.flow(d, i - 1, j, reduce), "x", reduce)
        else:
            r = self.prolonged_derivative(self.flow(d, i, j - 1, reduce), "y", reduce)
        memo[(i, j)] = r
        return r

    def _q_image(self, d: str, i: int, j: int, reduce: bool) -> Poly:
        if i + j + 1 > self.order:
            raise CoveringTruncationError(
                f"D~_{d} {q_name(i, j)} needs q of level {i + j + 1} > {self.order}"
            )
        if d == "x":
            return Poly.from_var(self.q(i + 1, j))
        if d == "y":
            return Poly.from_var(self.q(i, j + 1))
        return self.flow(d, i, j, reduce).num

    def prolonged_derivative(self, s, d: str, reduce: bool = True) -> Scalar:
        """``D~_d s``; with ``reduce`` the base part is the restricted total derivative."""
        s = Scalar.coerce(s)
        di = self.jets.direction(d)
        d = self.jets.letters[di]
        images = {self.jets.independent[di].id: ONE_P}
        for k in s.var_ids():
            c = self.jets.counts(k)
            if c is not None:
                c2 = list(c)
                c2[di] += 1
                img = self.eq.normal_form(tuple(c2)) if reduce else Scalar.from_var(self.jets.jet(tuple(c2)))
                images[k] = img.num
                continue
            qi = self._q_of.get(k)
            if qi is not None:
                images[k] = self._q_image(d, qi[0], qi[1], reduce)
        r = s.derivation(images)
        return self.eq.reduce(r) if reduce else r

    def commutator(self, a: str, b: str, s, reduce: bool = True) -> Scalar:
        s = Scalar.coerce(s)
        return (self.prolonged_derivative(self.prolonged_derivative(s, b, reduce), a, reduce)
                - self.prolonged_derivative(self.prolonged_derivative(s, a, reduce), b, reduce))

    def commutator_table(self, max_level: Optional[int] = None) -> Dict[Tuple[str, str, int, int], Scalar]:
        """All six ``[D~_a, D~_b] q_{i,j}``, reduced, for ``i + j <= max_level``.

        The default level ``Q - 2`` is the deepest one the truncation supports.
        """
        if max_level is None:
            max_level = self.order - 2
        out = {}
        for a, b in combinations(LETTERS, 2):
            for lvl in range(max_level + 1):
                for i in range(lvl + 1):
                    j = lvl - i
                    out[(a, b, i, j)] = self.commutator(a, b, self.qs(i, j))
        return out

    def compatibility_residual(self, reduce: bool = True) -> Scalar:
        """``[D~_t, D~_z] q_{0,0}``, optionally reduced modulo the equation."""
        if self.order < 2 or self.jets.order < 4:
            raise CoveringTruncationError("compatibility needs covering order >= 2 and jet order >= 4")
        t = self.flow("t", 0, 0, reduce)
        z = self.flow("z", 0, 0, reduce)
        r = self.prolonged_derivative(z, "t", reduce) - self.prolonged_derivative(t, "z", reduce)
        return self.eq.reduce(r) if reduce else r

    # Wahlquist-Estabrook forms -------------------------------------------
    def we_form(self, i: int, j: int, reduce: bool = True) -> Form:
        """``dq_ij - (D~_t q_ij) dt - q_{i+1,j} dx - q_{i,j+1} dy - (D~_z q_ij) dz``."""
        if i + j > self.order - 1:
            raise CoveringTruncationError(f"omega_{i},{j} needs q of level {i + j + 1}")
        g = self.gens
        return (g.d(self.q(i, j))
                - g.d("t") * self.flow("t", i, j, reduce)
                - g.d("x") * self.qs(i + 1, j)
                - g.d("y") * self.qs(i, j + 1)
                - g.d("z") * self.flow("z", i, j, reduce))

    def horizontal_map(self, gens_used: List[int], reduce: bool = True) -> Dict[int, Form]:
        """Images of ``du_sigma`` and ``dq_ij`` under horizontalisation."""
        g = self.gens
        base = [g.d(l) for l in LETTERS]
        out = {}
        for gi in gens_used:
            v = g.vars[gi]
            if v is None:
                raise ValueError(f"cannot horizontalise abstract generator {g.names[gi]}")
            if v.id in {w.id for w in self.jets.independent}:
                continue
            if self.jets.counts(v) is not None:
                acc = g.zero()
                for d, dl in zip(LETTERS, base):
                    acc = acc + dl * self.prolonged_derivative(Scalar.from_var(v), d, reduce)
                out[gi] = acc
            elif self.q_index(v) is not None:
                acc = g.zero()
                for d, dl in zip(LETTERS, base):
                    acc = acc + dl * self.prolonged_derivative(Scalar.from_var(v), d, reduce)
                out[gi] = acc
        return out

    def horizontalize(self, f: Form, reduce: bool = True) -> Form:
        h = substitute_form(f, {}, self.horizontal_map(f.generators_used(), reduce))
        return h.map_coeffs(self.eq.reduce) if reduce else h

    def we_flatness(self, reduce: bool = True) -> Form:
        """Horizontalised ``d omega_00``; vanishes iff the covering is compatible."""
        dw = exterior_derivative(self.we_form(0, 0, reduce))
        return self.horizontalize(dw, reduce)

    def lie_derivative(self, f: Form, d: str, reduce: bool = True) -> Form:
        """Action of ``D~_d`` on a coordinate form: ``X(c) dg + c d(X g)``."""
        g = self.gens
        gmap = {}
        for gi in f.generators_used():
            v = g.vars[gi]
            gmap[gi] = exterior_derivative(g.scalar(self.prolonged_derivative(Scalar.from_var(v), d, reduce)))
        out = g.zero()
        for key, c in f.terms.items():
            dc = self.prolonged_derivative(c, d, reduce)
            mono = Form(g, {key: Scalar.coerce(1)})
            if dc:
                out = out + mono * dc
            # Leibniz over the generators of the monomial
            for pos, gi in enumerate(key):
                left = Form(g, {key[:pos]: Scalar.coerce(1)}) if pos else g.scalar(1)
                right = Form(g, {key[pos + 1:]: Scalar.coerce(1)}) if pos + 1 < len(key) else g.scalar(1)
                out = out + (left ^ gmap[gi] ^ right) * c
        return out
