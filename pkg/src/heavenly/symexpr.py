"""Exact multivariate polynomials and rational functions over the rationals.

Variables are interned globally.  Variable ``k`` owns the exponent slot at
bits ``[16k, 16k+16)`` of a packed monomial, so monomials are plain ints and
the hot loops live in :mod:`heavenly.kernel`.

The canonical monomial order is graded, ties broken by the packed integer
(i.e. lexicographic with later-interned variables more significant).  A
:class:`Scalar` is stored as ``num/den`` with ``gcd(num, den) = 1`` and
``den`` monic in that order, so equality is structural.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Union

from . import kernel as K

try:
    from gmpy2 import mpq as QQ
except ImportError:  # pragma: no cover - gmpy2 is optional
    QQ = Fraction

_B = K.SLOT_BITS
_MASK = K.SLOT_MASK
_DEG_MOD = _MASK  # digit sum of a base-2^16 number == value mod (2^16 - 1)

__all__ = [
    "QQ",
    "Var",
    "var",
    "Poly",
    "Scalar",
    "normalize",
    "arith",
    "partial",
    "substitute",
    "gcd",
    "SubstitutionError",
]


class SubstitutionError(ZeroDivisionError):
    """A substitution sent a denominator to zero."""


# ---------------------------------------------------------------------------
# variables


class _Registry:
    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.names: List[str] = []
        self.index: Dict[str, int] = {}
        self.guard = 0

    def intern(self, name: str) -> int:
        i = self.index.get(name)
        if i is not None:
            return i
        with self.lock:
            i = self.index.get(name)
            if i is None:
                i = len(self.names)
                self.names.append(name)
                self.guard |= 1 << (i * _B + _B - 1)
                self.index[name] = i
        return i


_REG = _Registry()


class Var:
    """An interned scalar symbol.  Two ``Var`` objects with one name are equal."""

    __slots__ = ("id",)

    def __init__(self, name: Union[str, int]):
        if isinstance(name, int):
            if not 0 <= name < len(_REG.names):
                raise ValueError(f"no variable with id {name}")
            self.id = name
        else:
            if not name or not (name[0].isalpha() or name[0] == "_") or not name.replace("_", "a").isalnum():
                raise ValueError(f"invalid variable name {name!r}")
            self.id = _REG.intern(name)

    @property
    def name(self) -> str:
        return _REG.names[self.id]

    @property
    def shift(self) -> int:
        return self.id * _B

    def __eq__(self, other):
        return isinstance(other, Var) and other.id == self.id

    def __hash__(self):
        return hash(("Var", self.id))

    def __lt__(self, other):
        return self.name < other.name

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name

    # arithmetic lifts into Scalar
    def _s(self):
        return Scalar.from_var(self)

    def __add__(self, o):
        return self._s() + o

    __radd__ = __add__

    def __sub__(self, o):
        return self._s() - o

    def __rsub__(self, o):
        return Scalar.coerce(o) - self._s()

    def __mul__(self, o):
        return self._s() * o

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._s() / o

    def __rtruediv__(self, o):
        return Scalar.coerce(o) / self._s()

    def __pow__(self, e):
        return self._s() ** e

    def __neg__(self):
        return -self._s()


def var(name: str) -> Var:
    return Var(name)


def _as_var(v) -> Var:
    if isinstance(v, Var):
        return v
    if isinstance(v, str):
        return Var(v)
    if isinstance(v, Scalar):
        vs = v.as_var()
        if vs is None:
            raise TypeError(f"{v} is not a variable")
        return vs
    raise TypeError(f"expected a variable, got {type(v).__name__}")


def _slots(mask: int) -> List[int]:
    """Variable ids whose exponent slot is nonzero in ``mask``."""
    out = []
    while mask:
        low = (mask & -mask).bit_length() - 1
        k = low // _B
        out.append(k)
        mask &= ~(_MASK << (k * _B))
    return out


def _deg(m: int) -> int:
    return m % _DEG_MOD


def _mono_key(m: int):
    return (m % _DEG_MOD, m)


def _render_mono(m: int) -> str:
    parts = []
    for k in _slots(m):
        e = (m >> (k * _B)) & _MASK
        name = _REG.names[k]
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _render_coeff(c) -> str:
    c = Fraction(int(c.numerator), int(c.denominator))
    return str(c)


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Sparse polynomial with rational coefficients.  Immutable."""

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Optional[Dict[int, object]] = None):
        # trusted: coefficients are nonzero QQ
        self._t = terms if terms is not None else {}
        self._hash = None

    # construction -----------------------------------------------------
    @staticmethod
    def const(c) -> "Poly":
        c = QQ(c)
        return Poly({0: c}) if c else Poly()

    @staticmethod
    def from_var(v: Var, exp: int = 1) -> "Poly":
        return Poly({exp << v.shift: QQ(1)})

    # basic queries ----------------------------------------------------
    def __bool__(self):
        return bool(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def is_const(self) -> bool:
        t = self._t
        return not t or (len(t) == 1 and 0 in t)

    def const_value(self):
        return self._t.get(0, QQ(0))

    def nterms(self) -> int:
        return len(self._t)

    def terms(self):
        return self._t.items()

    def mask(self) -> int:
        r = 0
        for m in self._t:
            r |= m
        return r

    def var_ids(self) -> List[int]:
        return _slots(self.mask())

    def variables(self) -> List[Var]:
        return [Var(k) for k in self.var_ids()]

    def degree(self, v: Optional[Var] = None) -> int:
        if not self._t:
            return -1
        if v is None:
            return max(_deg(m) for m in self._t)
        s = v.shift
        return max((m >> s) & _MASK for m in self._t)

    def lead(self):
        """(monomial, coefficient) of the leading term in canonical order."""
        m = max(self._t, key=_mono_key)
        return m, self._t[m]

    def lead_coeff(self):
        if len(self._t) == 1:
            for c in self._t.values():
                return c
        return self.lead()[1]

    # arithmetic -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._t == other._t
        if isinstance(other, (int, Fraction)) or type(other) is type(QQ(0)):
            return self._t == (Poly.const(other)._t)
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash(frozenset(self._t.items()))
        return h

    def __add__(self, o: "Poly") -> "Poly":
        if not isinstance(o, Poly):
            o = Poly.const(o)
        return Poly(K.add(self._t, o._t))

    __radd__ = __add__

    def __sub__(self, o: "Poly") -> "Poly":
        if not isinstance(o, Poly):
            o = Poly.const(o)
        return Poly(K.sub(self._t, o._t))

    def __rsub__(self, o):
        return Poly.const(o) - self

    def __neg__(self):
        return Poly(K.neg(self._t))

    def __mul__(self, o: "Poly") -> "Poly":
        if not isinstance(o, Poly):
            return Poly(K.scale(self._t, QQ(o)))
        return Poly(K.mul(self._t, o._t))

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        return Poly(K.scale(self._t, QQ(c)))

    def mul_term(self, mono: int, c) -> "Poly":
        return Poly(K.mul_term(self._t, mono, c))

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def try_div(self, o: "Poly") -> Optional["Poly"]:
        """Exact quotient ``self / o`` or ``None`` when ``o`` does not divide."""
        if o.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if o.is_const():
            return self.scale(1 / o.const_value())
        q = K.div_exact(self._t, o._t, _REG.guard)
        return None if q is None else Poly(q)

    def exact_div(self, o: "Poly") -> "Poly":
        q = self.try_div(o)
        if q is None:
            raise ArithmeticError(f"{o} does not divide {self}")
        return q

    def diff(self, v: Var) -> "Poly":
        return Poly(K.diff(self._t, v.shift))

    def derivation(self, images: Mapping[int, "Poly"]) -> "Poly":
        """Apply the derivation sending variable id ``k`` to ``images[k]``."""
        acc: Dict[int, object] = {}
        for k in self.var_ids():
            img = images.get(k)
            if img is None or img.is_zero():
                continue
            acc = K.add(acc, K.mul(K.diff(self._t, k * _B), img._t))
        return Poly(acc)

    # normalisation ----------------------------------------------------
    def monic(self) -> "Poly":
        if not self._t:
            return self
        c = self.lead_coeff()
        if c == 1:
            return self
        return self.scale(1 / c)

    def rational_content(self):
        """Positive rational ``c`` with ``self / c`` integral and primitive."""
        from math import gcd as igcd

        num = 0
        den = 1
        for c in self._t.values():
            num = igcd(num, int(c.numerator))
            d = int(c.denominator)
            den = den * d // igcd(den, d)
        return QQ(num, den)

    def coeffs_in(self, ids: Iterable[int]) -> Dict[int, "Poly"]:
        """Split into ``{monomial in ids: coefficient poly in other vars}``."""
        sel = 0
        for k in ids:
            sel |= _MASK << (k * _B)
        out: Dict[int, Dict[int, object]] = {}
        for m, c in self._t.items():
            ms = m & sel
            d = out.get(ms)
            if d is None:
                out[ms] = {m - ms: c}
            else:
                d[m - ms] = c
        return {k: Poly(v) for k, v in out.items()}

    def univariate(self, v: Var) -> List["Poly"]:
        """Coefficients in ``v``, lowest degree first."""
        s = v.shift
        parts = self.coeffs_in([v.id])
        deg = max((m >> s) & _MASK for m in parts) if parts else -1
        out = [Poly() for _ in range(deg + 1)]
        for m, p in parts.items():
            out[(m >> s) & _MASK] = p
        return out

    def monomial_content(self) -> int:
        """Largest monomial dividing every term."""
        return K.mono_min(self._t, _REG.guard)

    # evaluation / substitution ---------------------------------------
    def subs_poly(self, images: Mapping[int, "Poly"]) -> "Poly":
        """Simultaneous substitution of polynomials for variable ids."""
        ids = [k for k in self.var_ids() if k in images]
        if not ids:
            return self
        parts = self.coeffs_in(ids)
        powers: Dict[tuple, Poly] = {}
        acc: Dict[int, object] = {}
        for ms, coeff in parts.items():
            term = coeff._t
            for k in ids:
                e = (ms >> (k * _B)) & _MASK
                if e:
                    p = powers.get((k, e))
                    if p is None:
                        p = powers[(k, e)] = images[k] ** e
                    term = K.mul(term, p._t)
            acc = K.add(acc, term)
        return Poly(acc)

    # display ----------------------------------------------------------
    def sorted_terms(self):
        return sorted(self._t.items(), key=lambda mc: _mono_key(mc[0]), reverse=True)

    def __str__(self):
        if not self._t:
            return "0"
        out = []
        for i, (m, c) in enumerate(self.sorted_terms()):
            neg = c < 0
            a = -c if neg else c
            mono = _render_mono(m)
            if not mono:
                body = _render_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_render_coeff(a)}*{mono}"
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __repr__(self):
        return f"Poly({str(self)!r})"


_QQT = type(QQ(0))
_SCALARISH = (int, Fraction, _QQT, Var, Poly, str)

ZERO_P = Poly()
ONE_P = Poly.const(1)


# ---------------------------------------------------------------------------
# gcd


def gcd(f: Poly, g: Poly) -> Poly:
    """Monic greatest common divisor of two polynomials over QQ.

    Recursive content / primitive-part scheme: variables private to one
    argument are eliminated by taking contents, and the rest is handled by a
    primitive PRS in a chosen main variable.
    """
    if f.is_zero():
        return g.monic()
    if g.is_zero():
        return f.monic()
    if f.is_const() or g.is_const():
        return ONE_P
    if f == g:
        return f.monic()
    key = (f, g) if hash(f) <= hash(g) else (g, f)
    h = _GCD_CACHE.get(key)
    if h is None:
        h = _gcd_uncached(f, g)
        if len(_GCD_CACHE) >= _GCD_CACHE_SIZE:
            _GCD_CACHE.clear()
        _GCD_CACHE[key] = h
    return h


# gcds repeat heavily during elimination over a few denominators
_GCD_CACHE: Dict[tuple, "Poly"] = {}
_GCD_CACHE_SIZE = 20000


def _gcd_uncached(f: Poly, g: Poly) -> Poly:
    mf = f.monomial_content()
    mg = g.monomial_content()
    mono = 0
    if mf or mg:
        mono = K.mono_min((mf, mg), _REG.guard)
        if mf:
            f = Poly({m - mf: c for m, c in f._t.items()})
        if mg:
            g = Poly({m - mg: c for m, c in g._t.items()})
    h = _gcd_core(f, g)
    if mono:
        h = h.mul_term(mono, QQ(1))
    return h.monic()


def _ones_like(m: int) -> int:
    """Mask with every slot that is nonzero in ``m`` fully set."""
    r = 0
    for k in _slots(m):
        r |= _MASK << (k * _B)
    return r


def _gcd_core(f: Poly, g: Poly) -> Poly:
    if f.is_const() or g.is_const():
        return ONE_P
    maskf, maskg = _ones_like(f.mask()), _ones_like(g.mask())
    common = maskf & maskg
    if not common:
        return ONE_P
    if maskf != maskg:
        # gcd(f, g) = gcd(content of f over its private vars, same for g)
        acc = None
        for p, private in ((f, maskf & ~common), (g, maskg & ~common)):
            if not private:
                parts = [p]
            else:
                parts = list(p.coeffs_in(_slots(private)).values())
                parts.sort(key=Poly.nterms)
            for c in parts:
                acc = c if acc is None else gcd(acc, c)
                if acc.is_const():
                    return ONE_P
        return acc.monic()
    # same variable set
    if f.nterms() >= g.nterms():
        q = f.try_div(g)
        if q is not None:
            return g.monic()
    else:
        q = g.try_div(f)
        if q is not None:
            return f.monic()
    ids = _slots(common)
    x = min(ids, key=lambda k: (max(f.degree(Var(k)), g.degree(Var(k))), k))
    xv = Var(x)
    F = f.univariate(xv)
    G = g.univariate(xv)
    cf = _list_content(F)
    cg = _list_content(G)
    c = gcd(cf, cg)
    F = _div_list(F, cf)
    G = _div_list(G, cg)
    H = _prs(F, G)
    h = _from_univariate(H, xv)
    return (c * h).monic()


def _list_content(F: List[Poly]) -> Poly:
    parts = sorted((p for p in F if p), key=Poly.nterms)
    acc = None
    for p in parts:
        acc = p.monic() if acc is None else gcd(acc, p)
        if acc.is_const():
            return ONE_P
    return acc


def _div_list(F: List[Poly], c: Poly) -> List[Poly]:
    if c.is_const():
        return F
    return [p.exact_div(c) if p else p for p in F]


def _primitive_list(F: List[Poly]) -> List[Poly]:
    F = _div_list(F, _list_content(F))
    # strip rational content so coefficients do not grow across PRS steps
    from math import gcd as igcd

    num, den = 0, 1
    for p in F:
        rc = p.rational_content() if p else None
        if rc is not None:
            num = igcd(num, int(rc.numerator))
            d = int(rc.denominator)
            den = den * d // igcd(den, d)
    if num and (num != 1 or den != 1):
        k = QQ(den, num)
        F = [p.scale(k) for p in F]
    return F


def _prs(F: List[Poly], G: List[Poly]) -> List[Poly]:
    """gcd of two primitive univariate (over a polynomial ring) lists."""
    if len(F) < len(G):
        F, G = G, F
    while True:
        R = _prem(F, G)
        if not R:
            return G
        if len(R) == 1:
            return [ONE_P]
        R = _primitive_list(R)
        F, G = G, R


def _prem(F: List[Poly], G: List[Poly]) -> List[Poly]:
    dg = len(G) - 1
    lg = G[-1]
    F = list(F)
    while F and len(F) - 1 >= dg:
        lf = F[-1]
        shift = len(F) - 1 - dg
        F = [p * lg for p in F]
        for i, gc in enumerate(G):
            if gc:
                F[i + shift] = F[i + shift] - lf * gc
        while F and F[-1].is_zero():
            F.pop()
    return F


def _from_univariate(H: List[Poly], x: Var) -> Poly:
    acc: Dict[int, object] = {}
    for e, p in enumerate(H):
        if p:
            acc = K.add(acc, K.mul_term(p._t, e << x.shift, QQ(1)))
    return Poly(acc)


# ---------------------------------------------------------------------------
# rational functions


class Scalar:
    """Normalised rational function ``num/den``.  Immutable."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly = ONE_P, _canonical: bool = False):
        if not _canonical:
            num, den = _normalize_pair(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # construction -----------------------------------------------------
    @staticmethod
    def from_var(v: Union[Var, str]) -> "Scalar":
        v = _as_var(v)
        return Scalar(Poly.from_var(v), ONE_P, True)

    @staticmethod
    def const(c) -> "Scalar":
        if isinstance(c, Fraction):
            c = QQ(c.numerator, c.denominator)
        return Scalar(Poly.const(c), ONE_P, True)

    @staticmethod
    def coerce(x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, Var):
            return Scalar.from_var(x)
        if isinstance(x, Poly):
            return Scalar(x, ONE_P, True)
        if isinstance(x, str):
            from .syntax import parse_scalar

            return parse_scalar(x)
        if isinstance(x, (int, Fraction)) or type(x) is _QQT:
            return Scalar.const(x)
        raise TypeError(f"cannot use {type(x).__name__} as a scalar")

    # queries ----------------------------------------------------------
    def __bool__(self):
        return bool(self.num)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self):
        if not self.is_const():
            raise ValueError(f"{self} is not constant")
        return self.num.const_value()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def as_var(self) -> Optional[Var]:
        if self.den.is_const() and self.num.nterms() == 1:
            (m, c), = self.num.terms()
            ks = _slots(m)
            if c == 1 and len(ks) == 1 and (m >> (ks[0] * _B)) & _MASK == 1:
                return Var(ks[0])
        return None

    def var_ids(self) -> List[int]:
        return _slots(self.num.mask() | self.den.mask())

    def variables(self) -> List[Var]:
        return [Var(k) for k in self.var_ids()]

    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.num, self.den))
        return h

    # arithmetic (Henrici-style: gcds on the smallest possible operands) --
    def __add__(self, o):
        if not isinstance(o, Scalar):
            if not isinstance(o, _SCALARISH):
                return NotImplemented
            o = Scalar.coerce(o)
        a, b, c, d = self.num, self.den, o.num, o.den
        if a.is_zero():
            return o
        if c.is_zero():
            return self
        if b.is_const() and d.is_const():
            return Scalar(a + c, ONE_P, True)
        if b == d:
            return Scalar(a + c, b)
        if b.is_const():
            return Scalar(a * d + c, d, True)
        if d.is_const():
            return Scalar(a + c * b, b, True)
        g = gcd(b, d)
        if g.is_const():
            return Scalar(a * d + c * b, b * d, True)
        b1 = b.exact_div(g)
        d1 = d.exact_div(g)
        n = a * d1 + c * b1
        if n.is_zero():
            return ZERO
        g2 = gcd(n, g)
        if not g2.is_const():
            n = n.exact_div(g2)
            g = g.exact_div(g2)
        return Scalar(n, b1 * d1 * g, True)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.num, self.den, True)

    def __sub__(self, o):
        if not isinstance(o, (Scalar,) + _SCALARISH):
            return NotImplemented
        return self + (-Scalar.coerce(o))

    def __rsub__(self, o):
        return Scalar.coerce(o) - self

    def __mul__(self, o):
        if not isinstance(o, Scalar):
            if isinstance(o, (int, Fraction, _QQT)):
                if isinstance(o, Fraction):
                    o = QQ(o.numerator, o.denominator)
                if not o:
                    return ZERO
                return Scalar(self.num.scale(QQ(o)), self.den, True)
            if not isinstance(o, _SCALARISH):
                return NotImplemented
            o = Scalar.coerce(o)
        a, b, c, d = self.num, self.den, o.num, o.den
        if a.is_zero() or c.is_zero():
            return ZERO
        if b.is_const() and d.is_const():
            return Scalar(a * c, ONE_P, True)
        g1 = ONE_P if d.is_const() else gcd(a, d)
        g2 = ONE_P if b.is_const() else gcd(c, b)
        if not g1.is_const():
            a = a.exact_div(g1)
            d = d.exact_div(g1)
        if not g2.is_const():
            c = c.exact_div(g2)
            b = b.exact_div(g2)
        return Scalar(a * c, b * d, True)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        n, d = self.den, self.num
        lc = d.lead_coeff()
        if lc != 1:
            n = n.scale(1 / lc)
            d = d.scale(1 / lc)
        return Scalar(n, d, True)

    def __truediv__(self, o):
        if not isinstance(o, (Scalar,) + _SCALARISH):
            return NotImplemented
        return self * Scalar.coerce(o).inverse()

    def __rtruediv__(self, o):
        return Scalar.coerce(o) * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("exponent must be an integer")
        if e < 0:
            return self.inverse() ** (-e)
        return Scalar(self.num ** e, self.den ** e, True)

    # calculus ---------------------------------------------------------
    def diff(self, v: Union[Var, str]) -> "Scalar":
        return partial(self, v)

    def derivation(self, images: Mapping[int, Poly]) -> "Scalar":
        """Apply a derivation given by polynomial images of variable ids."""
        dn = self.num.derivation(images)
        if self.den.is_const():
            return Scalar(dn, ONE_P, True)
        dd = self.den.derivation(images)
        if dd.is_zero():
            return Scalar(dn, self.den)
        return Scalar(dn * self.den - self.num * dd, self.den * self.den)

    def subs(self, mapping) -> "Scalar":
        return substitute(self, mapping)

    # display ----------------------------------------------------------
    def __str__(self):
        if self.den.is_const():
            return str(self.num)
        n = str(self.num)
        if self.num.nterms() > 1:
            n = f"({n})"
        d = str(self.den)
        if self.den.nterms() > 1 or "*" in d or "^" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"Scalar({str(self)!r})"


def _normalize_pair(num: Poly, den: Poly):
    if den.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if num.is_zero():
        return ZERO_P, ONE_P
    if den.is_const():
        return num.scale(1 / den.const_value()), ONE_P
    g = gcd(num, den)
    if not g.is_const():
        num = num.exact_div(g)
        den = den.exact_div(g)
    lc = den.lead_coeff()
    if lc != 1:
        num = num.scale(1 / lc)
        den = den.scale(1 / lc)
    return num, den


ZERO = Scalar(ZERO_P, ONE_P, True)
ONE = Scalar(ONE_P, ONE_P, True)


# ---------------------------------------------------------------------------
# module-level operations


def normalize(num: Poly, den: Poly) -> Scalar:
    """Reduced fraction ``num/den`` with monic denominator."""
    return Scalar(num, den)


def arith(a, b, op: str) -> Scalar:
    a, b = Scalar.coerce(a), Scalar.coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def partial(s, v) -> Scalar:
    """Partial derivative treating every variable as independent."""
    s = Scalar.coerce(s)
    v = _as_var(v)
    dn = s.num.diff(v)
    if s.den.is_const():
        return Scalar(dn, ONE_P, True)
    dd = s.den.diff(v)
    if dd.is_zero():
        return Scalar(dn, s.den)
    return Scalar(dn * s.den - s.num * dd, s.den * s.den)


def _subs_poly_rational(p: Poly, images: Dict[int, Scalar]):
    """Substitute rational images into ``p``; return (num, den) polys."""
    ids = [k for k in p.var_ids() if k in images]
    if not ids:
        return p, ONE_P
    if all(images[k].den.is_const() for k in ids):
        return p.subs_poly({k: images[k].num for k in ids}), ONE_P
    top = {k: p.degree(Var(k)) for k in ids}
    parts = p.coeffs_in(ids)
    cache: Dict[tuple, Poly] = {}

    def pw(poly, k, tag, e):
        r = cache.get((k, tag, e))
        if r is None:
            r = cache[(k, tag, e)] = poly ** e
        return r

    acc = ZERO_P
    for ms, coeff in parts.items():
        term = coeff
        for k in ids:
            e = (ms >> (k * _B)) & _MASK
            img = images[k]
            if e:
                term = term * pw(img.num, k, "n", e)
            if top[k] - e:
                term = term * pw(img.den, k, "d", top[k] - e)
        acc = acc + term
    den = ONE_P
    for k in ids:
        den = den * pw(images[k].den, k, "d", top[k])
    return acc, den


def substitute(s, mapping: Mapping) -> Scalar:
    """Simultaneous substitution ``{Var | name: Scalar-like}`` then canonicalise."""
    s = Scalar.coerce(s)
    images = {_as_var(k).id: Scalar.coerce(v) for k, v in mapping.items()}
    if not images:
        return s
    nn, nd = _subs_poly_rational(s.num, images)
    dn, dd = _subs_poly_rational(s.den, images)
    if dn.is_zero():
        raise SubstitutionError(
            f"substitution creates zero denominator: factor {s.den} vanishes"
        )
    return Scalar(nn, nd) * Scalar(dd, dn)
