"""Reaction network data model: species, complexes, reactions, temperings,
network parsing/serialization, and graph-level structure (linkage classes,
weak reversibility, stoichiometric subspace, reactant polytope).

Stoichiometric coefficients are exact rationals throughout; anything numeric
that downstream modules need in floating point is converted there.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import (
    RationalVector,
    lp_feasible_nonneg,
    nullspace,
    row_space_basis,
    vec,
)


class ParseError(ValueError):
    """Syntax or semantic error in a network file, with 1-based position."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Species:
    name: str
    index: int


@dataclass(frozen=True)
class Complex:
    """A formal nonnegative rational combination of species."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        for c in self.coeffs:
            if c < 0:
                raise ValueError(f"complex coefficients must be nonnegative, got {self.coeffs}")

    def __len__(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class Reaction:
    source: Complex
    target: Complex

    @property
    def flux(self) -> RationalVector:
        """Reaction vector target - source (derived, never stored)."""
        return tuple(t - s for s, t in zip(self.source.coeffs, self.target.coeffs))


@dataclass(frozen=True)
class Tempering:
    """Per-reaction compact positive rate intervals [lo, hi]."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        for i, (lo, hi) in enumerate(self.intervals):
            if not (0 < lo <= hi):
                raise ValueError(f"interval {i} must satisfy 0 < lo <= hi, got [{lo}, {hi}]")

    def __len__(self):
        return len(self.intervals)

    def contains(self, rates) -> bool:
        return all(lo <= Fraction(k) <= hi for (lo, hi), k in zip(self.intervals, rates))

    def midpoints(self) -> np.ndarray:
        return np.array([float((lo + hi) / 2) for lo, hi in self.intervals])

    def lows(self) -> np.ndarray:
        return np.array([float(lo) for lo, _ in self.intervals])

    def highs(self) -> np.ndarray:
        return np.array([float(hi) for _, hi in self.intervals])


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[Species, ...]
    complexes: tuple[Complex, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate species names in {names}")
        for i, s in enumerate(self.species):
            if s.index != i:
                raise ValueError(f"species {s.name} has index {s.index}, expected {i}")
        n = len(self.species)
        for c in self.complexes:
            if len(c) != n:
                raise ValueError(f"complex {c.coeffs} has length {len(c)}, expected {n}")
        known = set(self.complexes)
        for r in self.reactions:
            if r.source not in known or r.target not in known:
                raise ValueError("reaction endpoints must be listed in complexes")

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @property
    def species_names(self) -> list[str]:
        return [s.name for s in self.species]

    def exact_sources(self) -> list[RationalVector]:
        return [r.source.coeffs for r in self.reactions]

    def exact_fluxes(self) -> list[RationalVector]:
        return [r.flux for r in self.reactions]

    def source_matrix(self) -> np.ndarray:
        """Reactions-by-species float matrix of source coefficients."""
        return np.array([[float(c) for c in r.source.coeffs] for r in self.reactions])

    def flux_matrix(self) -> np.ndarray:
        """Reactions-by-species float matrix of reaction vectors."""
        return np.array([[float(c) for c in r.flux] for r in self.reactions])


@dataclass(frozen=True)
class StoichiometryInfo:
    """Exact bases for the stoichiometric subspace H and its orthogonal
    complement (the conservation laws)."""

    H_basis: tuple[RationalVector, ...]
    Hperp_basis: tuple[RationalVector, ...]
    dimension: int

    @property
    def n_species(self) -> int:
        for basis in (self.H_basis, self.Hperp_basis):
            if basis:
                return len(basis[0])
        return 0

    def H_matrix(self) -> np.ndarray:
        return np.array(
            [[float(x) for x in v] for v in self.H_basis], dtype=float
        ).reshape(len(self.H_basis), self.n_species)

    def Hperp_matrix(self) -> np.ndarray:
        return np.array(
            [[float(x) for x in v] for v in self.Hperp_basis], dtype=float
        ).reshape(len(self.Hperp_basis), self.n_species)


@dataclass(frozen=True)
class InvariantPolyhedron:
    """(x0 + H) intersected with the nonnegative orthant."""

    x0: tuple[float, ...]
    stoich: StoichiometryInfo

    def __post_init__(self):
        if any(x <= 0 for x in self.x0):
            raise ValueError(f"x0 must be strictly positive, got {self.x0}")

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if np.any(x < -tol):
            return False
        A = self.stoich.Hperp_matrix()
        if A.shape[0] == 0:
            return True
        return bool(np.max(np.abs(A @ (x - np.array(self.x0)))) <= tol)


@dataclass(frozen=True)
class LinkageInfo:
    """Partition of the complexes into linkage classes plus weak
    reversibility and each class's own stoichiometric subspace basis."""

    classes: tuple[tuple[int, ...], ...]
    weakly_reversible: bool
    class_subspaces: tuple[tuple[RationalVector, ...], ...]


# ---------------------------------------------------------------------------
# parsing

_NUMBER = re.compile(r"(\d+/\d+|\d+\.\d+|\.\d+|\d+)")
_SCI = re.compile(r"(\d+\.?\d*|\.\d+)[eE][+-]?\d+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INTERVAL = re.compile(r"\[\s*([^\],]+?)\s*(?:,\s*([^\],]+?)\s*)?\]")


def _parse_side(text: str, line_no: int, col0: int, species_order: list[str],
                fixed: bool) -> dict[str, Fraction]:
    """Parse one side of a reaction into a species -> coefficient map."""
    stripped = text.strip()
    if stripped == "0":
        return {}
    if not stripped:
        raise ParseError("empty complex", line_no, col0 + 1)
    coeffs: dict[str, Fraction] = {}
    for term in stripped.split("+"):
        pos = col0 + text.find(term)
        term_s = term.strip()
        if not term_s:
            raise ParseError("empty term in complex", line_no, pos + 1)
        if _SCI.match(term_s):
            raise ParseError(
                f"scientific notation not allowed in {term_s!r}", line_no, pos + 1
            )
        m = _NUMBER.match(term_s)
        if m:
            coeff = Fraction(m.group(1))
            rest = term_s[m.end():].lstrip()
            if rest.startswith("*"):
                rest = rest[1:].lstrip()
        else:
            coeff = Fraction(1)
            rest = term_s
        name_m = _NAME.fullmatch(rest)
        if name_m is None:
            raise ParseError(f"cannot read term {term_s!r}", line_no, pos + 1)
        name = name_m.group(0)
        if fixed and name not in species_order:
            raise ParseError(f"unknown species {name!r}", line_no, pos + 1)
        if name not in species_order:
            species_order.append(name)
        coeffs[name] = coeffs.get(name, Fraction(0)) + coeff
    return coeffs


def _parse_number(text: str, line_no: int, col: int) -> Fraction:
    t = text.strip()
    if _SCI.fullmatch(t):
        raise ParseError(f"scientific notation not allowed in {t!r}", line_no, col)
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"cannot read number {t!r}", line_no, col) from None


def _parse_intervals(text: str, line_no: int, col0: int):
    out = []
    pos = 0
    while pos < len(text):
        chunk = text[pos:]
        if not chunk.strip():
            break
        m = _INTERVAL.match(chunk.lstrip())
        if m is None:
            raise ParseError(
                f"expected interval like [lo,hi], got {chunk.strip()!r}",
                line_no,
                col0 + pos + 1,
            )
        lo = _parse_number(m.group(1), line_no, col0 + pos + 1)
        hi = _parse_number(m.group(2), line_no, col0 + pos + 1) if m.group(2) else lo
        if not (0 < lo <= hi):
            raise ParseError(
                f"interval must satisfy 0 < lo <= hi, got [{lo},{hi}]",
                line_no,
                col0 + pos + 1,
            )
        out.append((lo, hi))
        pos += len(chunk) - len(chunk.lstrip()) + m.end()
    return out


def parse_network(text: str) -> tuple[ReactionNetwork, Tempering | None]:
    """Parse the line-oriented network format.

    Grammar (UTF-8, '#' starts a comment):

        species: A B C              # optional, fixes species order
        2A + B -> C  rate [1,2]     # rate interval optional
        A <-> B      rate [1] [3,3] # reversible: one interval per direction

    A complex is ``0`` or a '+'-separated sum of ``coeff*Name`` terms; the
    ``*`` is optional and coefficients may be integers, fractions ``p/q``,
    or finite decimals (read exactly).  ``<->`` expands to two reactions,
    forward first.  If any reaction carries a rate interval, a Tempering is
    returned with unspecified reactions defaulting to [1, 1].

    Returns:
        (network, tempering) with tempering None when no rates appear.

    Raises:
        ParseError: with 1-based line and column of the offending token.
    """
    species_order: list[str] = []
    fixed = False
    raw: list[tuple[dict, dict, object]] = []  # (lhs, rhs, intervals-or-None)
    any_rate = False
    for line_no, full_line in enumerate(text.splitlines(), start=1):
        line = full_line.split("#", 1)[0]
        if not line.strip():
            continue
        if line.strip().startswith("species:"):
            if raw or fixed:
                raise ParseError(
                    "species header must precede all reactions",
                    line_no,
                    line.find("species:") + 1,
                )
            names = line.strip()[len("species:"):].split()
            if not names:
                raise ParseError("empty species header", line_no, 1)
            for name in names:
                if not _NAME.fullmatch(name):
                    raise ParseError(f"bad species name {name!r}", line_no, 1)
                if name in species_order:
                    raise ParseError(f"duplicate species {name!r}", line_no, 1)
                species_order.append(name)
            fixed = True
            continue
        reversible = "<->" in line
        arrow = "<->" if reversible else "->"
        if "->" not in line:
            raise ParseError("expected '->' or '<->'", line_no, 1)
        lhs_text, rhs_full = line.split(arrow, 1)
        rate_m = re.search(r"\brate\b", rhs_full)
        if rate_m:
            rhs_text = rhs_full[: rate_m.start()]
            intervals = _parse_intervals(
                rhs_full[rate_m.end():],
                line_no,
                len(lhs_text) + len(arrow) + rate_m.end(),
            )
            if not intervals:
                raise ParseError("'rate' with no interval", line_no,
                                 len(lhs_text) + len(arrow) + rate_m.start() + 1)
            want = 2 if reversible else 1
            if len(intervals) > want:
                raise ParseError(
                    f"expected at most {want} interval(s), got {len(intervals)}",
                    line_no,
                    len(lhs_text) + len(arrow) + rate_m.start() + 1,
                )
            if reversible and len(intervals) == 1:
                intervals = [intervals[0], intervals[0]]
            any_rate = True
        else:
            rhs_text = rhs_full
            intervals = None
        lhs = _parse_side(lhs_text, line_no, 0, species_order, fixed)
        rhs = _parse_side(rhs_text, line_no, len(lhs_text) + len(arrow), species_order, fixed)
        raw.append((lhs, rhs, intervals[0] if intervals else None))
        if reversible:
            raw.append((rhs, lhs, intervals[1] if intervals else None))
    if not raw:
        raise ParseError("no reactions found", max(1, text.count("\n") + 1), 1)

    species = tuple(Species(name, i) for i, name in enumerate(species_order))

    def to_complex(side: dict) -> Complex:
        return Complex(tuple(side.get(name, Fraction(0)) for name in species_order))

    complexes: list[Complex] = []
    seen: set[Complex] = set()
    reactions = []
    intervals_out = []
    for lhs, rhs, interval in raw:
        src, tgt = to_complex(lhs), to_complex(rhs)
        for c in (src, tgt):
            if c not in seen:
                seen.add(c)
                complexes.append(c)
        reactions.append(Reaction(src, tgt))
        intervals_out.append(interval if interval else (Fraction(1), Fraction(1)))
    net = ReactionNetwork(species, tuple(complexes), tuple(reactions))
    tempering = Tempering(tuple(intervals_out)) if any_rate else None
    return net, tempering


def _format_coeff(c: Fraction) -> str:
    return str(c)  # Fraction renders as 'p' or 'p/q'


def _format_complex(cx: Complex, names: list[str]) -> str:
    terms = []
    for c, name in zip(cx.coeffs, names):
        if c == 0:
            continue
        terms.append(name if c == 1 else f"{_format_coeff(c)}{name}")
    return " + ".join(terms) if terms else "0"


def serialize_network(net: ReactionNetwork, tempering: Tempering | None = None) -> str:
    """Render a network (one line per reaction) so that parse_network
    round-trips to an equal network and tempering."""
    names = net.species_names
    lines = ["species: " + " ".join(names)]
    for i, r in enumerate(net.reactions):
        line = f"{_format_complex(r.source, names)} -> {_format_complex(r.target, names)}"
        if tempering is not None:
            lo, hi = tempering.intervals[i]
            line += f" rate [{_format_coeff(lo)},{_format_coeff(hi)}]"
        lines.append(line)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structure


def stoichiometric_subspace(net: ReactionNetwork) -> StoichiometryInfo:
    """Exact bases for H = span of the reaction vectors and for H-perp.

    dim(H) + |Hperp_basis| = n always (rank-nullity over the rationals).
    """
    n = net.n_species
    fluxes = [list(f) for f in net.exact_fluxes()]
    H = row_space_basis(fluxes, n)
    Hperp = [vec(v) for v in nullspace(fluxes, n)]
    return StoichiometryInfo(tuple(H), tuple(Hperp), len(H))


def linkage_classes(net: ReactionNetwork) -> LinkageInfo:
    """Linkage classes (weakly connected components of the reaction graph),
    weak reversibility (every class strongly connected), and each class's
    stoichiometric subspace."""
    n_cx = len(net.complexes)
    index = {c: i for i, c in enumerate(net.complexes)}
    out_edges: list[set[int]] = [set() for _ in range(n_cx)]
    und: list[set[int]] = [set() for _ in range(n_cx)]
    for r in net.reactions:
        a, b = index[r.source], index[r.target]
        out_edges[a].add(b)
        und[a].add(b)
        und[b].add(a)

    comp = [-1] * n_cx
    classes: list[list[int]] = []
    for start in range(n_cx):
        if comp[start] != -1:
            continue
        cid = len(classes)
        stack, members = [start], []
        comp[start] = cid
        while stack:
            u = stack.pop()
            members.append(u)
            for v in und[u]:
                if comp[v] == -1:
                    comp[v] = cid
                    stack.append(v)
        classes.append(sorted(members))

    def strongly_connected(members: list[int]) -> bool:
        mset = set(members)
        for s in members:
            reached = {s}
            stack = [s]
            while stack:
                u = stack.pop()
                for v in out_edges[u]:
                    if v in mset and v not in reached:
                        reached.add(v)
                        stack.append(v)
            if reached != mset:
                return False
        return True

    wr = all(strongly_connected(m) for m in classes)
    subspaces = []
    for cid, members in enumerate(classes):
        mset = set(members)
        fluxes = [list(r.flux) for r in net.reactions if index[r.source] in mset]
        subspaces.append(tuple(row_space_basis(fluxes, net.n_species)))
    return LinkageInfo(
        tuple(tuple(m) for m in classes), wr, tuple(subspaces)
    )


def reactant_polytope_vertices(net: ReactionNetwork) -> list[Complex]:
    """Source complexes that are vertices of the convex hull of all sources
    (decided exactly: a point is a vertex iff it is not a convex combination
    of the other sources).

    Raises:
        ValueError: network with no reactions.
    """
    if not net.reactions:
        raise ValueError("network has no reactions")
    sources: list[Complex] = []
    for r in net.reactions:
        if r.source not in sources:
            sources.append(r.source)
    if len(sources) == 1:
        return list(sources)
    verts = []
    for i, p in enumerate(sources):
        others = [q for j, q in enumerate(sources) if j != i]
        A = [[q.coeffs[k] for q in others] for k in range(net.n_species)]
        A.append([Fraction(1)] * len(others))
        b = list(p.coeffs) + [Fraction(1)]
        feasible, _ = lp_feasible_nonneg(A, b)
        if not feasible:
            verts.append(p)
    return verts
