"""Stage 1: Presentation DSL Parsing & Printing"""

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..algebra.generators import Alphabet, Generator
from ..algebra.polynomials import CommPoly, NCPoly, Poly, format_poly, term_homdeg
from ..algebra.presentation import AlgebraPresentation, DGPresentation
from ..utils.errors import DSLSyntaxError, PresentationError
from ..utils.types import Flavor

logger = logging.getLogger(__name__)

IDENTIFIER = r"[A-Za-z][A-Za-z0-9_]*"

_TOKEN = re.compile(r"\s*(?:(?P<number>\d+(?:/\d+)?)|(?P<ident>" + IDENTIFIER + r")|(?P<op>[-+*^]))")
_SECTION = re.compile(r"^\[(?P<section>[a-z]+)\]$")
_NAME = re.compile(r"^name\s+(?P<name>" + IDENTIFIER + r")$")
_GEN = re.compile(
    r"^gen\s+(?P<names>" + IDENTIFIER + r"(?:\s*,\s*" + IDENTIFIER + r")*)"
    r"\s+deg\s+(?P<deg>\d+)(?:\s+weight\s+(?P<weight>\d+))?$"
)
_DIFF = re.compile(r"^d\s+(?P<gen>" + IDENTIFIER + r")\s*=\s*(?P<body>.*)$")
_REL = re.compile(r"^rel\s+(?P<body>.*)$")
_FLAVOR = re.compile(r"^flavor\s+(?P<flavor>nc|comm)$")
_REP_LINE = re.compile(r"^(?P<gen>" + IDENTIFIER + r")\s*=\s*(?P<matrix>\[.*\])$")

SECTIONS = ("algebra", "resolution")


@dataclass
class PresentationFile:
    """Parsed `.drep` file: an algebra with relations and its almost free resolution"""
    name: str = ""
    algebra: Optional[AlgebraPresentation] = None
    resolution: Optional[DGPresentation] = None
    source: Optional[str] = None
    digest: str = ""

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'algebra_generators': list(self.algebra.alphabet.names) if self.algebra else [],
            'relations': len(self.algebra.relations) if self.algebra else 0,
            'resolution_generators': list(self.resolution.alphabet.names) if self.resolution else [],
            'flavor': self.resolution.flavor.value if self.resolution else None,
        }


@dataclass
class _Statement:
    line: int
    column: int
    text: str


@dataclass
class _Section:
    gens: List[Tuple[Generator, int]] = field(default_factory=list)
    rels: List[_Statement] = field(default_factory=list)
    diffs: List[Tuple[str, _Statement]] = field(default_factory=list)
    flavor: Flavor = Flavor.NONCOMMUTATIVE
    seen: bool = False


class PresentationParser:
    """Line-oriented parser for the presentation DSL"""

    def parse(self, text: str, source: Optional[str] = None) -> PresentationFile:
        sections = {name: _Section() for name in SECTIONS}
        current: Optional[str] = None
        name = ""
        for line_no, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.split("#", 1)[0].strip()
            if not stripped:
                continue
            column = raw.index(stripped[0]) + 1
            header = _SECTION.match(stripped)
            if header:
                current = header.group("section")
                if current not in sections:
                    raise DSLSyntaxError(f"unknown section [{current}]", line_no, column)
                if sections[current].seen:
                    raise DSLSyntaxError(f"section [{current}] appears twice", line_no, column)
                sections[current].seen = True
                continue
            match = _NAME.match(stripped)
            if match and current is None:
                name = match.group("name")
                continue
            if current is None:
                raise DSLSyntaxError("statement outside of a section", line_no, column)
            self._statement(sections[current], current, stripped, line_no, column)

        if not any(s.seen for s in sections.values()):
            raise DSLSyntaxError("no [algebra] or [resolution] section found")
        result = PresentationFile(name=name, source=source)
        if sections["algebra"].seen:
            result.algebra = self._build_algebra(sections["algebra"], name)
        if sections["resolution"].seen:
            result.resolution = self._build_resolution(sections["resolution"], name)
        if result.algebra and result.resolution:
            self._check_surjective(result)
        logger.debug(f"Parsed presentation '{name}' from {source or '<text>'}")
        return result

    def _statement(self, section: _Section, kind: str, text: str, line_no: int, column: int) -> None:
        gen = _GEN.match(text)
        if gen:
            deg = int(gen.group("deg"))
            weight = int(gen.group("weight")) if gen.group("weight") else 1
            for gen_name in re.split(r"\s*,\s*", gen.group("names")):
                try:
                    section.gens.append((Generator(gen_name, deg, weight), line_no))
                except PresentationError as e:
                    raise DSLSyntaxError(str(e), line_no, column) from e
            return
        if kind == "algebra":
            rel = _REL.match(text)
            if rel:
                section.rels.append(_Statement(line_no, column + rel.start("body"), rel.group("body")))
                return
        else:
            diff = _DIFF.match(text)
            if diff:
                section.diffs.append((diff.group("gen"), _Statement(line_no, column + diff.start("body"), diff.group("body"))))
                return
            flavor = _FLAVOR.match(text)
            if flavor:
                section.flavor = Flavor.COMMUTATIVE if flavor.group("flavor") == "comm" else Flavor.NONCOMMUTATIVE
                return
        raise DSLSyntaxError(f"cannot parse statement '{text}' in [{kind}]", line_no, column)

    def _alphabet(self, section: _Section) -> Alphabet:
        seen: Dict[str, int] = {}
        for gen, line_no in section.gens:
            if gen.name in seen:
                raise DSLSyntaxError(f"duplicate generator '{gen.name}' (first declared on line {seen[gen.name]})", line_no)
            seen[gen.name] = line_no
        return Alphabet(gen for gen, _ in section.gens)

    def _build_algebra(self, section: _Section, name: str) -> AlgebraPresentation:
        alphabet = self._alphabet(section)
        relations = []
        for stmt in section.rels:
            if "=" in stmt.text:
                lhs, rhs = stmt.text.split("=", 1)
                poly = self.parse_poly(lhs, alphabet, Flavor.NONCOMMUTATIVE, stmt.line, stmt.column)
                poly = poly - self.parse_poly(rhs, alphabet, Flavor.NONCOMMUTATIVE, stmt.line,
                                              stmt.column + len(lhs) + 1)
            else:
                poly = self.parse_poly(stmt.text, alphabet, Flavor.NONCOMMUTATIVE, stmt.line, stmt.column)
            relations.append(poly)
        try:
            return AlgebraPresentation(alphabet, relations, name=name)
        except PresentationError as e:
            raise DSLSyntaxError(str(e)) from e

    def _build_resolution(self, section: _Section, name: str) -> DGPresentation:
        alphabet = self._alphabet(section)
        differential: Dict[str, Poly] = {}
        for gen_name, stmt in section.diffs:
            if gen_name not in alphabet:
                raise DSLSyntaxError(f"d line for undeclared generator '{gen_name}'", stmt.line)
            if gen_name in differential:
                raise DSLSyntaxError(f"second d line for '{gen_name}'", stmt.line)
            poly = self.parse_poly(stmt.text, alphabet, section.flavor, stmt.line, stmt.column)
            expected = alphabet.homdeg(gen_name) - 1
            for key in poly:
                found = term_homdeg(key, alphabet)
                if found != expected:
                    raise DSLSyntaxError(
                        f"degree mismatch: d {gen_name} must have degree {expected}, found a term of degree {found}",
                        stmt.line, stmt.column,
                    )
            differential[gen_name] = poly
        try:
            return DGPresentation(alphabet, differential, section.flavor, name=name)
        except PresentationError as e:
            raise DSLSyntaxError(str(e)) from e

    def _check_surjective(self, pf: PresentationFile) -> None:
        algebra_names = set(pf.algebra.alphabet.names)
        degree_zero = {g.name for g in pf.resolution.alphabet.of_degree(0)}
        if algebra_names != degree_zero:
            missing = sorted(algebra_names - degree_zero)
            extra = sorted(degree_zero - algebra_names)
            raise DSLSyntaxError(
                f"resolution degree-0 generators must match the algebra generators "
                f"(missing: {missing or '-'}, extra: {extra or '-'})"
            )

    # --- expressions --------------------------------------------------------------

    def _tokenize(self, text: str, line_no: int, column: int) -> List[Tuple[str, str, int]]:
        tokens = []
        pos = 0
        while pos < len(text):
            if not text[pos:].strip():
                break
            match = _TOKEN.match(text, pos)
            if not match or match.end() == pos:
                offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise DSLSyntaxError(f"unexpected character '{text[offset]}'", line_no, column + offset)
            kind = match.lastgroup
            tokens.append((kind, match.group(kind), column + match.start(kind)))
            pos = match.end()
        return tokens

    def parse_poly(self, text: str, alphabet: Alphabet, flavor: Flavor,
                   line_no: Optional[int] = None, column: int = 1) -> Poly:
        tokens = self._tokenize(text, line_no, column)
        if not tokens:
            raise DSLSyntaxError("empty expression", line_no, column)
        result: Poly = NCPoly() if flavor is Flavor.NONCOMMUTATIVE else CommPoly(alphabet)
        pos = 0
        first = True
        while pos < len(tokens):
            sign = 1
            if tokens[pos][0] == "op" and tokens[pos][1] in "+-":
                sign = -1 if tokens[pos][1] == "-" else 1
                pos += 1
            elif not first:
                raise DSLSyntaxError(f"expected '+' or '-' before '{tokens[pos][1]}'", line_no, tokens[pos][2])
            first = False
            coeff, factors, pos = self._term(tokens, pos, alphabet, flavor, line_no)
            if flavor is Flavor.NONCOMMUTATIVE:
                result.add_scaled(NCPoly.monomial(factors), coeff * sign)
            else:
                result.add_scaled(CommPoly.monomial(alphabet, factors), coeff * sign)
        return result

    def _term(self, tokens, pos: int, alphabet: Alphabet, flavor: Flavor, line_no: Optional[int]):
        coeff = Fraction(1)
        factors: List[str] = []
        expect_factor = True
        while pos < len(tokens):
            kind, value, col = tokens[pos]
            if expect_factor:
                if kind == "number":
                    _, _, denominator = value.partition("/")
                    if denominator and int(denominator) == 0:
                        raise DSLSyntaxError(f"zero denominator in coefficient '{value}'", line_no, col)
                    coeff *= Fraction(value)
                elif kind == "ident":
                    if value not in alphabet:
                        raise DSLSyntaxError(f"unknown generator '{value}'", line_no, col)
                    exponent = 1
                    if pos + 1 < len(tokens) and tokens[pos + 1][1] == "^":
                        if pos + 2 >= len(tokens) or tokens[pos + 2][0] != "number" or "/" in tokens[pos + 2][1]:
                            raise DSLSyntaxError("'^' needs a non-negative integer exponent", line_no, tokens[pos + 1][2])
                        if flavor is not Flavor.COMMUTATIVE or alphabet.parity(value):
                            raise DSLSyntaxError(
                                f"'^' is only allowed on even generators of a commutative presentation ('{value}')",
                                line_no, tokens[pos + 1][2],
                            )
                        exponent = int(tokens[pos + 2][1])
                        pos += 2
                    factors.extend([value] * exponent)
                else:
                    raise DSLSyntaxError(f"expected a coefficient or generator, found '{value}'", line_no, col)
                expect_factor = False
                pos += 1
            elif value == "*":
                expect_factor = True
                pos += 1
            elif value in "+-":
                break
            else:
                raise DSLSyntaxError(f"unexpected '{value}'", line_no, col)
        if expect_factor:
            col = tokens[pos - 1][2] if pos else None
            raise DSLSyntaxError("expression ends where a factor was expected", line_no, col)
        return coeff, factors, pos


def parse_presentation(text: str, source: Optional[str] = None) -> PresentationFile:
    return PresentationParser().parse(text, source)


def load_presentation(path) -> PresentationFile:
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        return parse_presentation(f.read(), source=str(path))


def _gen_line(gen: Generator) -> str:
    return f"gen {gen.name} deg {gen.homdeg} weight {gen.weight}"


def print_presentation(pf: PresentationFile) -> str:
    """Canonical DSL text; parse(print(parse(x))) == parse(x)"""
    lines: List[str] = []
    if pf.name:
        lines.append(f"name {pf.name}")
    if pf.algebra is not None:
        if lines:
            lines.append("")
        lines.append("[algebra]")
        lines.extend(_gen_line(g) for g in pf.algebra.generators)
        lines.extend(f"rel {format_poly(rel, pf.algebra.alphabet)}" for rel in pf.algebra.relations)
    if pf.resolution is not None:
        if lines:
            lines.append("")
        res = pf.resolution
        lines.append("[resolution]")
        lines.append(f"flavor {res.flavor.value}")
        lines.extend(_gen_line(g) for g in res.generators)
        for gen in res.generators:
            image = res.d_of(gen.name)
            if image:
                lines.append(f"d {gen.name} = {format_poly(image, res.alphabet)}")
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, line_no: Optional[int] = None) -> List[List[Fraction]]:
    """`[[a,b],[c,d]]` with integer or p/q (optionally signed) rationals"""
    body = text.strip()
    if not (body.startswith("[[") and body.endswith("]]")):
        raise DSLSyntaxError(f"matrix must look like [[a,b],[c,d]], got '{text}'", line_no)
    rows = []
    for row_text in re.findall(r"\[([^\[\]]*)\]", body):
        try:
            rows.append([Fraction(entry.strip()) for entry in row_text.split(",")])
        except (ValueError, ZeroDivisionError) as e:
            raise DSLSyntaxError(f"bad matrix entry in '{row_text}': {e}", line_no) from e
    size = len(rows)
    if any(len(row) != size for row in rows):
        raise DSLSyntaxError(f"matrix must be square, got rows of lengths {[len(r) for r in rows]}", line_no)
    return rows


def parse_rep_file(text: str) -> Dict[str, List[List[Fraction]]]:
    """Rep file: one `x = [[a,b],[c,d]]` line per degree-0 generator"""
    matrices: Dict[str, List[List[Fraction]]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        match = _REP_LINE.match(stripped)
        if not match:
            raise DSLSyntaxError(f"cannot parse rep line '{stripped}'", line_no)
        gen = match.group("gen")
        if gen in matrices:
            raise DSLSyntaxError(f"duplicate matrix for '{gen}'", line_no)
        matrices[gen] = parse_matrix(match.group("matrix"), line_no)
    return matrices
