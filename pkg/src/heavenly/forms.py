"""Exterior algebra over :class:`~heavenly.symexpr.Scalar` coefficients.

A :class:`GeneratorSet` fixes an ordered list of generators.  Coordinate
generators are differentials ``d(v)`` of variables; abstract generators are
opaque symbols (Maurer-Cartan forms, or the degree-2 placeholders used for
unknown differentials).  A :class:`Form` maps strictly increasing generator
tuples to nonzero coefficients; odd generators anticommute.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .symexpr import ONE, ZERO, Scalar, SubstitutionError, Var, _as_var, substitute

__all__ = [
    "GeneratorSet",
    "Form",
    "wedge",
    "exterior_derivative",
    "substitute_form",
    "pullback",
    "solve_structure",
    "StructureSolution",
    "wedge_all",
    "congruent_modulo",
    "parse_form",
]

Key = Tuple[int, ...]


class GeneratorSet:
    """Ordered generator registry; new generators are appended, never reordered."""

    def __init__(self, max_degree: int = 4, constants: Iterable = ()):
        self.max_degree = max_degree
        self.names: List[str] = []
        self.degrees: List[int] = []
        self.vars: List[Optional[Var]] = []  # Var for coordinate generators
        self._index: Dict[str, int] = {}
        self._by_var: Dict[int, int] = {}
        self.constants = {_as_var(c).id for c in constants}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def add_constant(self, v) -> None:
        self.constants.add(_as_var(v).id)

    def is_constant(self, v) -> bool:
        return _as_var(v).id in self.constants

    def _append(self, name: str, degree: int, v: Optional[Var]) -> int:
        with self._lock:
            i = self._index.get(name)
            if i is not None:
                return i
            i = len(self.names)
            self.names.append(name)
            self.degrees.append(degree)
            self.vars.append(v)
            self._index[name] = i
            if v is not None:
                self._by_var[v.id] = i
            return i

    def coordinate(self, v) -> int:
        v = _as_var(v)
        i = self._by_var.get(v.id)
        if i is not None:
            return i
        if v.id in self.constants:
            raise ValueError(f"{v} is declared constant and has no differential")
        return self._append(f"d({v.name})", 1, v)

    def declare(self, *vs) -> None:
        for v in vs:
            self.coordinate(v)

    def has_coordinate(self, v) -> bool:
        return _as_var(v).id in self._by_var

    def abstract(self, name: str, degree: int = 1) -> int:
        if name in self._index:
            i = self._index[name]
            if self.vars[i] is not None or self.degrees[i] != degree:
                raise ValueError(f"generator {name!r} already declared differently")
            return i
        return self._append(name, degree, None)

    def is_coordinate(self, i: int) -> bool:
        return self.vars[i] is not None

    # form constructors ------------------------------------------------
    def d(self, v) -> "Form":
        """The 1-form ``dv`` (zero for declared constants)."""
        v = _as_var(v)
        if v.id in self.constants:
            return Form(self)
        return Form(self, {(self.coordinate(v),): ONE})

    def gen(self, name: str) -> "Form":
        return Form(self, {(self.index(name),): ONE})

    def scalar(self, s) -> "Form":
        s = Scalar.coerce(s)
        return Form(self, {(): s} if s else {})

    def zero(self) -> "Form":
        return Form(self)


def _sort_key(gens: GeneratorSet, idx: Sequence[int]):
    """Sort ``idx`` returning (sorted tuple, sign) or (None, 0) if it vanishes."""
    deg = gens.degrees
    arr = list(idx)
    sign = 1
    # insertion sort; only swaps of two odd generators flip the sign
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] >= arr[j]:
            a, b = arr[j - 1], arr[j]
            if a == b:
                if deg[a] % 2:
                    return None, 0
                break
            if deg[a] % 2 and deg[b] % 2:
                sign = -sign
            arr[j - 1], arr[j] = b, a
            j -= 1
    return tuple(arr), sign


class Form:
    """Element of the exterior algebra on a :class:`GeneratorSet`.  Immutable."""

    __slots__ = ("gens", "terms")

    def __init__(self, gens: GeneratorSet, terms: Optional[Dict[Key, Scalar]] = None):
        self.gens = gens
        self.terms: Dict[Key, Scalar] = terms if terms is not None else {}

    # queries ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def key_degree(self, key: Key) -> int:
        deg = self.gens.degrees
        return sum(deg[i] for i in key)

    @property
    def degree(self) -> int:
        """Degree of a homogeneous form (0 for the zero form)."""
        ds = {self.key_degree(k) for k in self.terms}
        if len(ds) > 1:
            raise ValueError("form is not homogeneous")
        return ds.pop() if ds else 0

    def coeff(self, *names: str) -> Scalar:
        idx = [self.gens.index(n) for n in names]
        key, sign = _sort_key(self.gens, idx)
        if key is None:
            return ZERO
        c = self.terms.get(key)
        return ZERO if c is None else (c if sign > 0 else -c)

    def generators_used(self) -> List[int]:
        s = set()
        for k in self.terms:
            s.update(k)
        return sorted(s)

    def _check(self, other: "Form"):
        if other.gens is not self.gens:
            raise ValueError("forms live on different generator sets")

    def _lift(self, o) -> "Form":
        if isinstance(o, Form):
            self._check(o)
            return o
        return self.gens.scalar(o)

    # linear structure ---------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Form):
            return self.gens is other.gens and self.terms == other.terms
        if isinstance(other, (int, Scalar)) and not other:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, o) -> "Form":
        o = self._lift(o)
        t = dict(self.terms)
        for k, c in o.terms.items():
            s = t.get(k)
            if s is None:
                t[k] = c
            else:
                s = s + c
                if s:
                    t[k] = s
                else:
                    del t[k]
        return Form(self.gens, t)

    __radd__ = __add__

    def __neg__(self) -> "Form":
        return Form(self.gens, {k: -c for k, c in self.terms.items()})

    def __sub__(self, o) -> "Form":
        return self + (-self._lift(o))

    def __rsub__(self, o) -> "Form":
        return self._lift(o) - self

    def __mul__(self, o) -> "Form":
        if isinstance(o, Form):
            return wedge(self, o)
        s = Scalar.coerce(o)
        if not s:
            return Form(self.gens)
        return Form(self.gens, {k: c * s for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, o) -> "Form":
        if isinstance(o, Form):
            raise TypeError("cannot divide by a form")
        return self * Scalar.coerce(o).inverse()

    def __xor__(self, o) -> "Form":
        return wedge(self, self._lift(o))

    def __rxor__(self, o) -> "Form":
        return wedge(self._lift(o), self)

    def map_coeffs(self, fn) -> "Form":
        t = {}
        for k, c in self.terms.items():
            c2 = fn(c)
            if c2:
                t[k] = c2
        return Form(self.gens, t)

    def __str__(self):
        return render_form(self)

    def __repr__(self):
        return f"Form({render_form(self)!r})"


def render_form(f: Form, sort_by_name: bool = False) -> str:
    """Render in the form text syntax accepted by :func:`parse_form`."""
    if not f.terms:
        return "0"
    names = f.gens.names
    items = sorted(f.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))
    out = []
    for i, (key, c) in enumerate(items):
        mono = " ^ ".join(names[j] for j in key)
        neg = False
        if c.is_const():
            v = c.const_value()
            neg = v < 0
            a = -v if neg else v
            cs = "" if (a == 1 and mono) else _render_q(a)
        else:
            if c.num.nterms() == 1 and c.num.lead_coeff() < 0:
                neg, c = True, -c
            cs = str(c)
            if c.num.nterms() > 1 and c.den.is_const():
                cs = f"({cs})"
        body = f"{cs}*{mono}" if cs and mono else (cs or mono)
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def _render_q(v) -> str:
    from fractions import Fraction

    return str(Fraction(int(v.numerator), int(v.denominator)))


# ---------------------------------------------------------------------------
# products and derivatives


def wedge(a: Form, b: Form) -> Form:
    """Graded-anticommutative product ``a ^ b``."""
    if not isinstance(a, Form) or not isinstance(b, Form):
        raise TypeError("wedge expects two forms")
    a._check(b)
    gens = a.gens
    deg = gens.degrees
    cap = gens.max_degree
    out: Dict[Key, Scalar] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            key, sign = _merge(ka, kb, deg)
            if key is None:
                continue
            if sum(deg[i] for i in key) > cap:
                raise ValueError(f"form degree exceeds the configured cap {cap}")
            c = ca * cb
            if sign < 0:
                c = -c
            s = out.get(key)
            if s is None:
                out[key] = c
            else:
                s = s + c
                if s:
                    out[key] = s
                else:
                    del out[key]
    return Form(gens, out)


def _merge(ka: Key, kb: Key, deg: List[int]):
    if not ka:
        return kb, 1
    if not kb:
        return ka, 1
    # count odd-odd inversions between the two sorted tuples
    res = []
    sign = 1
    i = j = 0
    odd_left = sum(deg[x] & 1 for x in ka)
    while i < len(ka) and j < len(kb):
        x, y = ka[i], kb[j]
        if x == y:
            if deg[x] & 1:
                return None, 0
            res.append(x)
            odd_left -= deg[x] & 1
            i += 1
        elif x < y:
            res.append(x)
            odd_left -= deg[x] & 1
            i += 1
        else:
            if deg[y] & 1 and odd_left & 1:
                sign = -sign
            res.append(y)
            j += 1
    res.extend(ka[i:])
    res.extend(kb[j:])
    return tuple(res), sign


def wedge_all(forms: Sequence[Form]) -> Form:
    it = iter(forms)
    acc = next(it)
    for f in it:
        acc = wedge(acc, f)
    return acc


def _dscalar(gens: GeneratorSet, s: Scalar) -> Dict[int, Scalar]:
    """``ds`` as {generator index: coefficient}."""
    out = {}
    for v in s.variables():
        if v.id in gens.constants:
            continue
        c = s.diff(v)
        if c:
            out[gens.coordinate(v)] = c
    return out


def exterior_derivative(a: Form, ctx=None) -> Form:
    """Coordinate exterior derivative ``d(f dx^I) = df ^ dx^I``.

    ``ctx`` is accepted for symmetry with the jet-space API and unused: the
    generator set already knows which variables own differentials.
    """
    gens = a.gens
    for key in a.terms:
        for i in key:
            if not gens.is_coordinate(i):
                raise ValueError(
                    f"abstract generator {gens.names[i]!r} has no coordinate derivative; "
                    "use the abstract structure system instead"
                )
    out = Form(gens)
    for key, c in a.terms.items():
        if c.is_const():
            continue
        dc = _dscalar(gens, c)
        t = {}
        deg = gens.degrees
        for g, cg in dc.items():
            k2, sign = _merge((g,), key, deg)
            if k2 is None:
                continue
            t[k2] = cg if sign > 0 else -cg
        out = out + Form(gens, t)
    return out


# ---------------------------------------------------------------------------
# substitution


def substitute_form(a: Form, scalar_map: Optional[Mapping] = None,
                    gen_map: Optional[Mapping] = None) -> Form:
    """Substitute into coefficients and replace generators by 1-forms.

    ``gen_map`` keys are generator names (``"d(v)"``) or indices.  A variable
    remapped in ``scalar_map`` whose differential is a registered generator
    must have that differential remapped too.
    """
    gens = a.gens
    smap = {_as_var(k): Scalar.coerce(v) for k, v in (scalar_map or {}).items()}
    gmap: Dict[int, Form] = {}
    for k, f in (gen_map or {}).items():
        i = k if isinstance(k, int) else gens.index(k)
        f._check(a) if isinstance(f, Form) else None
        if not isinstance(f, Form):
            raise TypeError("generator images must be forms")
        if f.terms and f.degree != gens.degrees[i]:
            raise ValueError(f"image of {gens.names[i]} has wrong degree")
        gmap[i] = f
    for v in smap:
        if gens.has_coordinate(v) and gens.coordinate(v) not in gmap:
            raise ValueError(
                f"inconsistent substitution: {v} is remapped but d({v}) is not"
            )
    if not smap and not gmap:
        return a
    out = Form(gens)
    for key, c in a.terms.items():
        c2 = substitute(c, smap) if smap else c
        if not c2:
            continue
        acc = gens.scalar(c2)
        for i in key:
            img = gmap.get(i)
            if img is None:
                img = Form(gens, {(i,): ONE})
            acc = wedge(acc, img)
            if not acc:
                break
        out = out + acc
    return out


def pullback(a: Form, scalar_map: Mapping) -> Form:
    """Substitute variables and their differentials consistently (``dv -> d(image)``)."""
    gens = a.gens
    smap = {_as_var(k): Scalar.coerce(v) for k, v in scalar_map.items()}
    gmap = {}
    for v, img in smap.items():
        if gens.has_coordinate(v):
            gmap[gens.coordinate(v)] = exterior_derivative(gens.scalar(img))
    return substitute_form(a, smap, gmap)


# ---------------------------------------------------------------------------
# linear solving


@dataclass
class StructureSolution:
    solvable: bool
    solutions: List[Form] = field(default_factory=list)
    remainder: Optional[Form] = None

    def __bool__(self):
        return self.solvable


def _row_echelon(rows: List[Dict[int, Scalar]]):
    """Reduced row echelon form with the transform matrix.

    Returns (rref rows, pivot columns, transform T) with rref_p = sum_k T[p][k] row_k.
    Pivot = first nonzero column in generator order.
    """
    m = len(rows)
    R = [dict(r) for r in rows]
    T = [{k: ONE} for k in range(m)]
    piv: List[int] = []

    def axpy(dst: Dict, src: Dict, k: Scalar):
        for c, v in src.items():
            s = dst.get(c)
            val = -(k * v) if s is None else s - k * v
            if val:
                dst[c] = val
            elif s is not None:
                del dst[c]

    for r in range(m):
        for q, p in enumerate(piv):
            f = R[r].get(p)
            if f:
                axpy(R[r], R[q], f)
                axpy(T[r], T[q], f)
        if not R[r]:
            raise ValueError("known forms are linearly dependent")
        p = min(R[r])
        inv = R[r][p].inverse()
        if inv != ONE:
            R[r] = {c: v * inv for c, v in R[r].items()}
            T[r] = {c: v * inv for c, v in T[r].items()}
        for q in range(r):
            f = R[q].get(p)
            if f:
                axpy(R[q], R[r], f)
                axpy(T[q], T[r], f)
        piv.append(p)
    return R, piv, T


def solve_structure(r: Form, knowns: Sequence[Form]) -> StructureSolution:
    """Find 1-forms ``alpha_k`` with ``r = sum alpha_k ^ knowns_k``.

    The knowns are completed to a basis by the non-pivot generators of their
    reduced row echelon form.  ``r`` is solvable iff its component along
    (non-pivot ^ non-pivot) vanishes; that component is the remainder.  The
    returned alphas carry no components along the knowns except those forced
    by ``knowns ^ knowns`` terms of ``r``, which go to the later known.
    """
    gens = r.gens
    for k in knowns:
        r._check(k)
        if k.terms and k.degree != 1:
            raise ValueError("knowns must be 1-forms")
    if r.terms and r.degree != 2:
        raise ValueError("right-hand side must be a 2-form")
    m = len(knowns)
    rows = [{key[0]: c for key, c in k.terms.items()} for k in knowns]
    R, piv, T = _row_echelon(rows)
    pivot_row = {p: q for q, p in enumerate(piv)}

    # express each generator in the basis (kappa'_q labelled -1-q, free gens >= 0)
    def expand(g: int) -> Dict[int, Scalar]:
        q = pivot_row.get(g)
        if q is None:
            return {g: ONE}
        e = {-1 - q: ONE}
        for c, v in R[q].items():
            if c != g:
                e[c] = -v
        return e

    cache: Dict[int, Dict[int, Scalar]] = {}
    new: Dict[Tuple[int, int], Scalar] = {}
    for key, c in r.terms.items():
        a, b = key
        ea = cache.get(a) or cache.setdefault(a, expand(a))
        eb = cache.get(b) or cache.setdefault(b, expand(b))
        for la, ca in ea.items():
            for lb, cb in eb.items():
                if la == lb:
                    continue
                val = c * ca * cb
                # canonical label order: kappa' (negative, by q) before free gens
                ka, kb = _label_key(la), _label_key(lb)
                if ka > kb:
                    la2, lb2, val = lb, la, -val
                else:
                    la2, lb2 = la, lb
                s = new.get((la2, lb2))
                s = val if s is None else s + val
                if s:
                    new[(la2, lb2)] = s
                else:
                    new.pop((la2, lb2), None)

    rem_terms = {}
    beta: List[Form] = [Form(gens) for _ in range(m)]
    kappa = [Form(gens, {(c,): v for c, v in R[q].items()}) for q in range(m)]
    for (la, lb), c in new.items():
        if la >= 0 and lb >= 0:
            key, sign = _merge((la,), (lb,), gens.degrees)
            rem_terms[key] = c if sign > 0 else -c
        elif la < 0 and lb >= 0:
            # kappa'_q ^ g = -(g ^ kappa'_q)
            q = -1 - la
            beta[q] = beta[q] + Form(gens, {(lb,): -c})
        else:
            qa, qb = -1 - la, -1 - lb
            # kappa'_qa ^ kappa'_qb with qa < qb: assign to the later one
            beta[qb] = beta[qb] + kappa[qa] * c
    if rem_terms:
        return StructureSolution(False, [], Form(gens, rem_terms))
    alphas = []
    for k in range(m):
        acc = Form(gens)
        for p in range(m):
            t = T[p].get(k)
            if t and beta[p]:
                acc = acc + beta[p] * t
        alphas.append(acc)
    return StructureSolution(True, alphas, Form(gens))


def _label_key(label: int):
    return (0, -1 - label) if label < 0 else (1, label)


def congruent_modulo(a: Form, b: Form, modulo: Sequence[Form]) -> bool:
    """True iff the 1-forms ``a`` and ``b`` differ by a combination of ``modulo``."""
    diff = a - b
    if not diff:
        return True
    if not modulo:
        return False
    return not wedge_all([diff, *modulo])


# ---------------------------------------------------------------------------
# parsing


def parse_form(text: str, gens: GeneratorSet, abstract: bool = False, tokens=None) -> Form:
    """Parse ``coef * g1 ^ g2 + ...``.

    With ``abstract=False`` identifiers are scalar variables and ``d(name)``
    denotes coordinate generators; with ``abstract=True`` identifiers must be
    declared generators of ``gens`` and coefficients are rational constants.
    Pre-tokenized input (with its own line numbers) may be passed as ``tokens``.
    """
    from .syntax import ParseError, Parser, tokenize

    def name(tok):
        if abstract:
            if tok.text not in gens:
                raise ParseError(f"unknown generator {tok.text!r}", tok.line, tok.col)
            return gens.gen(tok.text)
        return Scalar.from_var(tok.text)

    def call(tok, arg):
        if tok.text == "d" and not abstract:
            v = arg.as_var() if isinstance(arg, Scalar) else None
            if v is None:
                raise ParseError("d(...) takes a single variable", tok.line, tok.col)
            return gens.d(v)
        if abstract and tok.text == "D" and isinstance(arg, Form):
            nm = gens.names[arg.generators_used()[0]] if len(arg.terms) == 1 else None
            if nm and f"D({nm})" in gens:
                return gens.gen(f"D({nm})")
        raise ParseError(f"unknown function {tok.text!r}", tok.line, tok.col)

    def caret(a, b, tok):
        if isinstance(a, Form) or isinstance(b, Form):
            a = a if isinstance(a, Form) else gens.scalar(a)
            b = b if isinstance(b, Form) else gens.scalar(b)
            return wedge(a, b)
        from .syntax import _scalar_caret

        return _scalar_caret(a, b, tok)

    p = Parser(tokens if tokens is not None else tokenize(text), name, Scalar.const, caret, call)
    v = p.parse()
    return v if isinstance(v, Form) else gens.scalar(v)
