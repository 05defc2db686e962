"""Formal exterior calculus on abstract Maurer-Cartan generators.

A :class:`StructureSystem` is read from the line-oriented structure-equation
grammar (see ``data/appendix.eds``).  Generators whose differential is not
given are declared ``unknown``; their differentials are represented by opaque
degree-2 generators named ``D(<name>)`` when a computation permits them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .forms import Form, GeneratorSet, parse_form, render_form, wedge
from .report import FAIL, INFO, PASS, Report, timed
from .symexpr import ONE
from .syntax import ParseError, Token, tokenize

__all__ = [
    "StructureSystem",
    "parse_system",
    "load_system",
    "render_system",
    "formal_d",
    "d_squared_check",
    "d_squared_partial",
    "appendix_checks",
    "DEFAULT_CORPUS",
]

KEYWORDS = ("gen", "unknown", "d")
AMBIGUOUS_MARK = "@ambiguous"
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def unknown_symbol(name: str) -> str:
    return f"D({name})"


@dataclass
class StructureSystem:
    gens: GeneratorSet
    order: List[str]
    rules: Dict[str, Form] = field(default_factory=dict)
    unknown: List[str] = field(default_factory=list)
    ambiguous: Dict[str, str] = field(default_factory=dict)
    lines: Dict[str, int] = field(default_factory=dict)

    def gen(self, name: str) -> Form:
        return self.gens.gen(name)

    def is_unknown(self, name: str) -> bool:
        return name in self.unknown

    def known(self) -> List[str]:
        return [n for n in self.order if n in self.rules]

    def __eq__(self, other):
        if not isinstance(other, StructureSystem):
            return NotImplemented
        if self.order != other.order or self.unknown != other.unknown:
            return False
        if set(self.rules) != set(other.rules):
            return False
        # the two systems own different generator sets; compare renderings
        return all(render_form(self.rules[k]) == render_form(other.rules[k]) for k in self.rules)


def _split_statements(text: str):
    """Yield (keyword, first line, [(line number, text)], ambiguity note)."""
    stmt = None
    pending_note: List[str] = []
    note_active = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        comment = comment.strip()
        if comment.startswith(AMBIGUOUS_MARK):
            pending_note = [comment[len(AMBIGUOUS_MARK):].strip()]
            note_active = True
            if not body.strip():
                continue
        elif note_active and comment and not body.strip():
            pending_note.append(comment)
            continue
        if not body.strip():
            continue
        stripped = body.strip()
        word = stripped.split(None, 1)[0]
        if word in KEYWORDS and (len(stripped) == len(word) or stripped[len(word)].isspace()):
            if stmt is not None:
                yield stmt
            note = " ".join(pending_note) if note_active else ""
            pending_note, note_active = [], False
            stmt = (word, lineno, [(lineno, body)], note)
        else:
            if stmt is None or stmt[0] != "d":
                col = len(body) - len(body.lstrip()) + 1
                raise ParseError(f"unexpected text {stripped[:20]!r}", lineno, col)
            stmt[2].append((lineno, body))
    if stmt is not None:
        yield stmt


def _tokens(parts: Sequence[Tuple[int, str]], skip: int) -> List[Token]:
    """Tokenize a multi-line statement, skipping ``skip`` chars of its first line."""
    toks: List[Token] = []
    for k, (lineno, body) in enumerate(parts):
        off = skip if k == 0 else 0
        toks.extend(t for t in tokenize(body[off:], lineno, off + 1) if t.kind != "END")
    last_line, last_body = parts[-1]
    toks.append(Token("END", "", last_line, len(last_body) + 1))
    return toks


def parse_system(text: str, max_degree: int = 4) -> StructureSystem:
    """Parse structure equations; see the module docstring for the grammar."""
    gens = GeneratorSet(max_degree=max_degree)
    order: List[str] = []
    unknown: List[str] = []
    pending_rules = []
    for word, lineno, parts, note in _split_statements(text):
        body = parts[0][1]
        start = body.index(word) + len(word)
        if word in ("gen", "unknown"):
            if len(parts) > 1:
                raise ParseError("declarations must fit on one line", parts[1][0], 1)
            for m in re.finditer(r"\S+", body[start:]):
                name = m.group(0)
                col = start + m.start() + 1
                if not _NAME_RE.match(name) or name in KEYWORDS:
                    raise ParseError(f"invalid generator name {name!r}", lineno, col)
                if name in gens:
                    raise ParseError(f"generator {name!r} declared twice", lineno, col)
                gens.abstract(name, 1)
                order.append(name)
                if word == "unknown":
                    unknown.append(name)
            continue
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=", body[start:])
        if not m:
            raise ParseError("expected 'd <name> = <sum>'", lineno, start + 1)
        name = m.group(1)
        col = start + m.start(1) + 1
        pending_rules.append((name, lineno, col, parts, start + m.end(), note))

    for name in unknown:
        gens.abstract(unknown_symbol(name), 2)
    sys = StructureSystem(gens, order, unknown=unknown)
    for name, lineno, col, parts, skip, note in pending_rules:
        if name not in gens or name not in order:
            raise ParseError(f"unknown generator {name!r}", lineno, col)
        if name in sys.unknown:
            raise ParseError(f"{name!r} is declared unknown but has a rule", lineno, col)
        if name in sys.rules:
            raise ParseError(f"second rule for {name!r}", lineno, col)
        toks = _tokens(parts, skip)
        rhs = parse_form("", gens, abstract=True, tokens=toks)
        for key in rhs.terms:
            if sum(gens.degrees[i] for i in key) != 2:
                raise ParseError(f"right-hand side of d {name} is not a 2-form", lineno, col)
            if any(gens.degrees[i] != 1 for i in key):
                raise ParseError(f"right-hand side of d {name} uses an opaque differential", lineno, col)
        sys.rules[name] = rhs
        sys.lines[name] = lineno
        if note:
            sys.ambiguous[name] = note
    return sys


DEFAULT_CORPUS = "appendix.eds"


def corpus_text(path: Optional[str] = None) -> str:
    if path:
        return Path(path).read_text()
    return resources.files("heavenly").joinpath("data").joinpath(DEFAULT_CORPUS).read_text()


def load_system(path: Optional[str] = None) -> StructureSystem:
    """The bundled structure-equation corpus, or the file at ``path``."""
    return parse_system(corpus_text(path))


def render_system(sys: StructureSystem) -> str:
    """Canonical text: one ``gen``/``unknown`` line per run, rules fully expanded."""
    lines = []
    run_kind, run = None, []
    for name in sys.order:
        kind = "unknown" if sys.is_unknown(name) else "gen"
        if kind != run_kind and run:
            lines.append(f"{run_kind} " + " ".join(run))
            run = []
        run_kind = kind
        run.append(name)
    if run:
        lines.append(f"{run_kind} " + " ".join(run))
    for name in sys.order:
        if name in sys.rules:
            if name in sys.ambiguous:
                lines.append(f"# {AMBIGUOUS_MARK} {sys.ambiguous[name]}")
            lines.append(f"d {name} = {render_form(sys.rules[name])}")
    return "\n".join(lines) + "\n"


def _unit(gens: GeneratorSet, key: Tuple[int, ...]) -> Form:
    return Form(gens, {key: ONE})


def formal_d(f: Form, sys: StructureSystem, allow_unknown: bool = False) -> Form:
    """Graded Leibniz extension of the generator rules; constants pass through."""
    gens = sys.gens
    if f.gens is not gens:
        raise ValueError("form does not belong to this structure system")
    images: Dict[int, Form] = {}
    out = Form(gens)
    for key, c in f.terms.items():
        if not c.is_const():
            raise ValueError("abstract forms must have constant coefficients")
        before = 0
        for pos, gi in enumerate(key):
            img = images.get(gi)
            if img is None:
                img = images[gi] = _generator_d(gi, sys, allow_unknown)
            if img:
                term = wedge(wedge(_unit(gens, key[:pos]), img), _unit(gens, key[pos + 1:]))
                out = out + (term * c if before % 2 == 0 else term * (-c))
            before += gens.degrees[gi]
    return out


def _generator_d(gi: int, sys: StructureSystem, allow_unknown: bool) -> Form:
    gens = sys.gens
    name = gens.names[gi]
    rule = sys.rules.get(name)
    if rule is not None:
        return rule
    if sys.is_unknown(name):
        if not allow_unknown:
            raise ValueError(f"the differential of {name} is unknown; use the partial check")
        return gens.gen(unknown_symbol(name))
    if name.startswith("D("):
        raise ValueError(f"cannot differentiate the opaque differential {name}")
    raise ValueError(f"no rule for d {name}")


def _names_in(f: Form) -> Set[str]:
    return {f.gens.names[i] for i in f.generators_used()}


def _ambiguity(gen: str, sys: StructureSystem) -> List[str]:
    """Flagged rules that the computation of d(d gen) reads."""
    used = {gen} | _names_in(sys.rules[gen])
    return sorted((n for n in used if n in sys.ambiguous), key=sys.order.index)


def _verdict(check_id, residual: Form, ms, gen, sys, note="") -> Report:
    cfg = {"generator": gen}
    if not residual:
        return Report(check_id, PASS, "", ms, cfg, note)
    flagged = _ambiguity(gen, sys)
    if flagged:
        extra = "reads ambiguous rule(s) " + ", ".join(flagged)
        return Report(check_id, INFO, render_form(residual), ms, cfg,
                      f"{note}; {extra}" if note else extra)
    return Report(check_id, FAIL, render_form(residual), ms, cfg, note)


def d_squared_check(gen: str, sys: StructureSystem) -> Report:
    """``d(d gen)`` with every differential taken from the rules."""
    if gen not in sys.rules:
        raise ValueError(f"no rule for d {gen}")
    missing = [n for n in _names_in(sys.rules[gen]) if sys.is_unknown(n)]
    if missing:
        raise ValueError(
            f"d {gen} involves generators with unknown differentials "
            f"({', '.join(sorted(missing, key=sys.order.index))}); use d_squared_partial"
        )
    with timed() as t:
        dd = formal_d(sys.rules[gen], sys)
    return _verdict(f"appendix.d2.{gen}", dd, t[0], gen, sys)


def d_squared_partial(gen: str, sys: StructureSystem,
                      absorbers: Optional[Iterable[str]] = None) -> Report:
    """d^2 = 0 modulo the ideal generated by ``absorbers``.

    Each unknown generator in ``d gen`` must appear only wedged with an
    absorber, so the opaque differentials land in the ideal.  When
    ``absorbers`` is None they are the partners of the unknowns.
    """
    if gen not in sys.rules:
        raise ValueError(f"no rule for d {gen}")
    gens = sys.gens
    rule = sys.rules[gen]
    partners: Dict[str, Set[str]] = {}
    for key in rule.terms:
        names = [gens.names[i] for i in key]
        unk = [n for n in names if sys.is_unknown(n)]
        if not unk:
            continue
        if len(unk) == 2:
            raise ValueError(f"term {' ^ '.join(names)} of d {gen} wedges two unknowns")
        other = names[1] if names[0] == unk[0] else names[0]
        partners.setdefault(unk[0], set()).add(other)
    if absorbers is None:
        absorb = set().union(*partners.values()) if partners else set()
    else:
        absorb = set(absorbers)
        for u, ps in partners.items():
            bad = sorted(ps - absorb, key=sys.order.index)
            if bad:
                raise ValueError(f"unknown {u} is wedged against non-absorber {bad[0]}")
    for a in absorb:
        gens.index(a)
    idx = {gens.index(a) for a in absorb}
    with timed() as t:
        dd = formal_d(rule, sys, allow_unknown=True)
        free = Form(gens, {k: c for k, c in dd.terms.items() if not idx.intersection(k)})
    note = ""
    if partners:
        order = sorted(absorb, key=sys.order.index)
        note = (f"absorbed {', '.join(unknown_symbol(u) for u in sorted(partners, key=sys.order.index))}"
                f" modulo {', '.join(order)}")
    rep = _verdict(f"appendix.d2.{gen}", free, t[0], gen, sys, note)
    rep.config["absorbers"] = sorted(absorb, key=sys.order.index)
    return rep


def determined_set(sys: StructureSystem) -> List[str]:
    """Generators whose rule mentions no unknown generator."""
    return [g for g in sys.known() if not any(sys.is_unknown(n) for n in _names_in(sys.rules[g]))]


def partial_set(sys: StructureSystem) -> List[str]:
    det = set(determined_set(sys))
    return [g for g in sys.known() if g not in det]


def appendix_checks(which: str = "all", sys: Optional[StructureSystem] = None,
                    corpus: Optional[str] = None) -> List[Report]:
    sys = sys or load_system(corpus)
    out: List[Report] = []
    if which in ("determined", "all"):
        out.extend(d_squared_check(g, sys) for g in determined_set(sys))
    if which in ("partial", "all"):
        out.extend(d_squared_partial(g, sys) for g in partial_set(sys))
    if which not in ("determined", "partial", "all"):
        raise ValueError(f"unknown appendix set {which!r}")
    return out
