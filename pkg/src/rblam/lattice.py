"""Resource lattices: partially ordered cost domains with sequential
composition (combine), worst-case branching (join), and a least element.

Shipped instances: naturals, saturating naturals, (time, memory, depth)
triples, gas, finite table-driven lattices, and products of instances.
`check_laws` executes every axiom over a sample and reports witnesses
for failures instead of assuming lawfulness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence


class LatticeError(Exception):
    """Malformed lattice, foreign element, or unparseable literal."""


@dataclass(frozen=True)
class LatticeElement:
    """An immutable cost value owned by a specific lattice instance."""

    instance: "LatticeInstance"
    payload: Any

    def __repr__(self) -> str:
        return f"<{self.instance.name}:{self.instance.format(self)}>"


class LatticeInstance:
    """Base class for concrete lattices. Instances compare by identity;
    elements are only usable with the instance that created them."""

    name: str
    kind: str

    def _own(self, el: LatticeElement) -> Any:
        if not isinstance(el, LatticeElement) or el.instance is not self:
            other = el.instance.name if isinstance(el, LatticeElement) else type(el).__name__
            raise LatticeError(
                f"element of {other!r} used with lattice {self.name!r}"
            )
        return el.payload

    def element(self, payload: Any) -> LatticeElement:
        return LatticeElement(self, self._check_payload(payload))

    def _check_payload(self, payload: Any) -> Any:
        raise NotImplementedError

    def leq(self, a: LatticeElement, b: LatticeElement) -> bool:
        return self._leq(self._own(a), self._own(b))

    def combine(self, a: LatticeElement, b: LatticeElement) -> LatticeElement:
        return LatticeElement(self, self._combine(self._own(a), self._own(b)))

    def join(self, a: LatticeElement, b: LatticeElement) -> LatticeElement:
        return LatticeElement(self, self._join(self._own(a), self._own(b)))

    def bottom(self) -> LatticeElement:
        return LatticeElement(self, self._bottom())

    def _leq(self, a: Any, b: Any) -> bool:
        raise NotImplementedError

    def _combine(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def _join(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def _bottom(self) -> Any:
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return False

    def enumerate(self) -> list[LatticeElement]:
        raise LatticeError(f"lattice {self.name!r} is not finite")

    def top(self) -> LatticeElement | None:
        """Greatest element, if the instance has a unique one."""
        return None

    def from_literal(self, lit: Any) -> LatticeElement:
        """Build an element from a parsed surface literal
        (a natural, an element name, or a tuple of literals)."""
        raise NotImplementedError

    def format(self, el: LatticeElement) -> str:
        """Render an element as a surface literal."""
        raise NotImplementedError

    def unit_step(self) -> LatticeElement:
        """Smallest nonzero step where one exists; bottom otherwise.
        Used as the default per-operation cost."""
        return self.bottom()

    def random_element(self, rng) -> LatticeElement:
        """A small random element, for fuzzing grades and budgets."""
        raise NotImplementedError

    def large_budget(self) -> LatticeElement:
        """A budget comfortably above any bound the fuzzer can synthesize."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<lattice {self.name}>"


class NatLattice(LatticeInstance):
    """Naturals under <= with + and max. Also used for gas."""

    def __init__(self, name: str = "nat", kind: str = "nat"):
        self.name = name
        self.kind = kind

    def _check_payload(self, payload):
        if not isinstance(payload, int) or payload < 0:
            raise LatticeError(f"{self.name}: expected a natural, got {payload!r}")
        return payload

    def _leq(self, a, b):
        return a <= b

    def _combine(self, a, b):
        return a + b

    def _join(self, a, b):
        return max(a, b)

    def _bottom(self):
        return 0

    def from_literal(self, lit):
        if not isinstance(lit, int):
            raise LatticeError(f"{self.name}: literal must be a natural, got {lit!r}")
        return self.element(lit)

    def format(self, el):
        return str(self._own(el))

    def unit_step(self):
        return self.element(1)

    def random_element(self, rng):
        return self.element(rng.randint(0, 6))

    def large_budget(self):
        return self.element(10**6)


class SaturatingNatLattice(LatticeInstance):
    """Naturals 0..cap with cap-clamped addition. Finite, so usable by the
    exhaustive model checker while keeping combine distinct from join."""

    def __init__(self, cap: int, name: str | None = None):
        if cap < 0:
            raise LatticeError("saturating cap must be a natural")
        self.cap = cap
        self.name = name or f"sat{cap}"
        self.kind = "nat-saturating"

    def _check_payload(self, payload):
        if not isinstance(payload, int) or not (0 <= payload <= self.cap):
            raise LatticeError(f"{self.name}: expected 0..{self.cap}, got {payload!r}")
        return payload

    def _leq(self, a, b):
        return a <= b

    def _combine(self, a, b):
        return min(a + b, self.cap)

    def _join(self, a, b):
        return max(a, b)

    def _bottom(self):
        return 0

    @property
    def is_finite(self):
        return True

    def enumerate(self):
        return [self.element(i) for i in range(self.cap + 1)]

    def top(self):
        return self.element(self.cap)

    def from_literal(self, lit):
        if not isinstance(lit, int):
            raise LatticeError(f"{self.name}: literal must be a natural, got {lit!r}")
        return self.element(lit)

    def format(self, el):
        return str(self._own(el))

    def unit_step(self):
        return self.element(min(1, self.cap))

    def random_element(self, rng):
        return self.element(rng.randint(0, self.cap))

    def large_budget(self):
        return self.element(self.cap)


class TripleLattice(LatticeInstance):
    """(time, memory, depth) triples with pointwise order, + and max."""

    def __init__(self, name: str = "triple"):
        self.name = name
        self.kind = "triple"

    def _check_payload(self, payload):
        if (
            not isinstance(payload, tuple)
            or len(payload) != 3
            or not all(isinstance(c, int) and c >= 0 for c in payload)
        ):
            raise LatticeError(f"{self.name}: expected a triple of naturals, got {payload!r}")
        return payload

    def _leq(self, a, b):
        return all(x <= y for x, y in zip(a, b))

    def _combine(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _join(self, a, b):
        return tuple(max(x, y) for x, y in zip(a, b))

    def _bottom(self):
        return (0, 0, 0)

    def from_literal(self, lit):
        if not (isinstance(lit, tuple) and len(lit) == 3 and all(isinstance(c, int) for c in lit)):
            raise LatticeError(f"{self.name}: literal must be (t,m,d), got {lit!r}")
        return self.element(lit)

    def format(self, el):
        return "({},{},{})".format(*self._own(el))

    def unit_step(self):
        # one time tick, no memory or depth
        return self.element((1, 0, 0))

    def random_element(self, rng):
        return self.element((rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3)))

    def large_budget(self):
        return self.element((10**6, 10**6, 10**6))


class FiniteLattice(LatticeInstance):
    """Lattice given by explicit tables over named elements.

    The constructor validates structure only (totality, known names);
    lawfulness is `check_laws`'s job so deliberately broken tables can be
    built for checker self-tests.
    """

    def __init__(
        self,
        name: str,
        elements: Sequence[str],
        leq_pairs: Iterable[tuple[str, str]],
        combine_table: dict[tuple[str, str], str],
        join_table: dict[tuple[str, str], str],
        bottom_name: str,
    ):
        self.name = name
        self.kind = "finite"
        self.names = list(elements)
        known = set(self.names)
        if len(known) != len(self.names):
            raise LatticeError(f"{name}: duplicate element names")
        if bottom_name not in known:
            raise LatticeError(f"{name}: bottom {bottom_name!r} is not an element")
        for a, b in leq_pairs:
            if a not in known or b not in known:
                raise LatticeError(f"{name}: leq pair ({a}, {b}) mentions unknown element")
        self.leq_set = frozenset(leq_pairs)
        for label, table in (("combine", combine_table), ("join", join_table)):
            for (a, b), c in table.items():
                if a not in known or b not in known or c not in known:
                    raise LatticeError(f"{name}: {label} entry {a} {b} -> {c} mentions unknown element")
            missing = [
                (a, b) for a in self.names for b in self.names if (a, b) not in table
            ]
            if missing:
                detail = "not a join-semilattice: " if label == "join" else ""
                raise LatticeError(
                    f"{name}: {detail}{label} table missing entry for {missing[0][0]} {missing[0][1]}"
                )
        self.combine_table = dict(combine_table)
        self.join_table = dict(join_table)
        self.bottom_name = bottom_name

    def _check_payload(self, payload):
        if payload not in self.names:
            raise LatticeError(f"{self.name}: unknown element {payload!r}")
        return payload

    def _leq(self, a, b):
        return (a, b) in self.leq_set

    def _combine(self, a, b):
        return self.combine_table[(a, b)]

    def _join(self, a, b):
        return self.join_table[(a, b)]

    def _bottom(self):
        return self.bottom_name

    @property
    def is_finite(self):
        return True

    def enumerate(self):
        return [self.element(n) for n in self.names]

    def top(self):
        maximal = [
            n for n in self.names
            if all((m, n) in self.leq_set for m in self.names)
        ]
        if len(maximal) == 1:
            return self.element(maximal[0])
        return None

    def from_literal(self, lit):
        if not isinstance(lit, str):
            raise LatticeError(f"{self.name}: literal must be an element name, got {lit!r}")
        return self.element(lit)

    def format(self, el):
        return self._own(el)

    def unit_step(self):
        # unique minimal element strictly above bottom, when there is one
        above = [
            n for n in self.names
            if n != self.bottom_name and (self.bottom_name, n) in self.leq_set
        ]
        minimal = [
            n for n in above
            if not any(m != n and (m, n) in self.leq_set for m in above)
        ]
        if len(minimal) == 1:
            return self.element(minimal[0])
        return self.bottom()

    def random_element(self, rng):
        return self.element(rng.choice(self.names))

    def large_budget(self):
        t = self.top()
        if t is not None:
            return t
        for n in self.names:  # first maximal element, deterministically
            if not any(m != n and (n, m) in self.leq_set for m in self.names):
                return self.element(n)
        return self.element(self.names[-1])


class ProductLattice(LatticeInstance):
    """Componentwise product of lattices; payloads are tuples of the
    component instances' elements."""

    def __init__(self, components: Sequence[LatticeInstance], name: str | None = None):
        if not components:
            raise LatticeError("product lattice needs at least one component")
        self.components = list(components)
        self.name = name or "product({})".format(",".join(c.name for c in components))
        self.kind = "product"

    def _check_payload(self, payload):
        if not isinstance(payload, tuple) or len(payload) != len(self.components):
            raise LatticeError(f"{self.name}: expected a {len(self.components)}-tuple of elements")
        for comp, el in zip(self.components, payload):
            comp._own(el)
        return payload

    def _leq(self, a, b):
        return all(c.leq(x, y) for c, x, y in zip(self.components, a, b))

    def _combine(self, a, b):
        return tuple(c.combine(x, y) for c, x, y in zip(self.components, a, b))

    def _join(self, a, b):
        return tuple(c.join(x, y) for c, x, y in zip(self.components, a, b))

    def _bottom(self):
        return tuple(c.bottom() for c in self.components)

    @property
    def is_finite(self):
        return all(c.is_finite for c in self.components)

    def enumerate(self):
        if not self.is_finite:
            raise LatticeError(f"lattice {self.name!r} is not finite")
        parts = [c.enumerate() for c in self.components]
        return [self.element(tuple(combo)) for combo in itertools.product(*parts)]

    def top(self):
        tops = [c.top() for c in self.components]
        if any(t is None for t in tops):
            return None
        return self.element(tuple(tops))

    def from_literal(self, lit):
        if not isinstance(lit, tuple) or len(lit) != len(self.components):
            raise LatticeError(
                f"{self.name}: literal must be a {len(self.components)}-tuple, got {lit!r}"
            )
        return self.element(tuple(c.from_literal(x) for c, x in zip(self.components, lit)))

    def format(self, el):
        parts = (c.format(x) for c, x in zip(self.components, self._own(el)))
        return "({})".format(",".join(parts))

    def unit_step(self):
        # one step in the first component, like the triple's time tick
        first = self.components[0].unit_step()
        rest = tuple(c.bottom() for c in self.components[1:])
        return self.element((first,) + rest)

    def random_element(self, rng):
        return self.element(tuple(c.random_element(rng) for c in self.components))

    def large_budget(self):
        return self.element(tuple(c.large_budget() for c in self.components))


NAT = NatLattice("nat", "nat")
GAS = NatLattice("gas", "gas")
TRIPLE = TripleLattice()


def builtin_lattice(spec: str) -> LatticeInstance:
    """Resolve a builtin lattice name: nat, gas, triple, sat<cap>."""
    if spec == "nat":
        return NAT
    if spec == "gas":
        return GAS
    if spec == "triple":
        return TRIPLE
    if spec.startswith("sat"):
        try:
            return SaturatingNatLattice(int(spec[3:]))
        except ValueError:
            pass
    raise LatticeError(f"unknown lattice {spec!r} (expected nat, gas, triple, or sat<cap>)")


# ---------------------------------------------------------------------------
# Law checking


@dataclass
class LawResult:
    law: str
    ok: bool
    witness: tuple | None
    checked: int

    def describe(self) -> str:
        if self.ok:
            return f"{self.law}: pass ({self.checked} cases)"
        parts = ", ".join(repr(w) for w in self.witness)
        return f"{self.law}: FAIL at ({parts})"


@dataclass
class LawReport:
    lattice: str
    sample_size: int
    results: list[LawResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self) -> list[LawResult]:
        return [r for r in self.results if not r.ok]

    def __str__(self) -> str:
        head = f"laws for {self.lattice} over {self.sample_size} elements"
        return "\n".join([head] + ["  " + r.describe() for r in self.results])

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice,
            "sample_size": self.sample_size,
            "passed": self.passed,
            "laws": [
                {
                    "law": r.law,
                    "ok": r.ok,
                    "checked": r.checked,
                    "witness": None if r.witness is None else [repr(w) for w in r.witness],
                }
                for r in self.results
            ],
        }


def check_laws(inst: LatticeInstance, sample: Sequence[LatticeElement] | None = None) -> LawReport:
    """Execute every lattice axiom over the sample; failures carry witnesses.

    Finite instances default to their full element list. The sample need not
    be closed under the operations: each law only compares computed results.
    """
    if sample is None:
        if inst.is_finite:
            sample = inst.enumerate()
        else:
            raise LatticeError(f"lattice {inst.name!r} is infinite; a sample is required")
    els = list(dict.fromkeys(sample))
    if not els:
        raise LatticeError("law check needs a nonempty sample")
    for el in els:
        inst._own(el)

    report = LawReport(lattice=inst.name, sample_size=len(els))
    bot = inst.bottom()

    def run(law: str, witness: tuple | None, checked: int):
        report.results.append(LawResult(law, witness is None, witness, checked))

    # order axioms
    w, n = None, 0
    for a in els:
        n += 1
        if not inst.leq(a, a):
            w = (a,)
            break
    run("leq-reflexive", w, n)

    leq_pairs = [(a, b) for a in els for b in els if inst.leq(a, b)]
    succs: dict[LatticeElement, list[LatticeElement]] = {}
    for a, b in leq_pairs:
        succs.setdefault(a, []).append(b)

    w, n = None, 0
    for a, b in leq_pairs:
        for c in succs.get(b, ()):
            n += 1
            if not inst.leq(a, c):
                w = (a, b, c)
                break
        if w:
            break
    run("leq-transitive", w, n)

    w, n = None, 0
    for a, b in leq_pairs:
        n += 1
        if a != b and inst.leq(b, a):
            w = (a, b)
            break
    run("leq-antisymmetric", w, n)

    # combine axioms
    w, n = None, 0
    for a in els:
        for b in els:
            n += 1
            if inst.combine(a, b) != inst.combine(b, a):
                w = (a, b)
                break
        if w:
            break
    run("combine-commutative", w, n)

    w, n = None, 0
    for a in els:
        for b in els:
            ab = inst.combine(a, b)
            for c in els:
                n += 1
                if inst.combine(ab, c) != inst.combine(a, inst.combine(b, c)):
                    w = (a, b, c)
                    break
            if w:
                break
        if w:
            break
    run("combine-associative", w, n)

    w, n = None, 0
    for a in els:
        n += 1
        if inst.combine(a, bot) != a:
            w = (a,)
            break
    run("combine-bottom-identity", w, n)

    w, n = None, 0
    for a, a2 in leq_pairs:
        for b, b2 in leq_pairs:
            n += 1
            if not inst.leq(inst.combine(a, b), inst.combine(a2, b2)):
                w = (a, a2, b, b2)
                break
        if w:
            break
    run("combine-monotone", w, n)

    # join axioms: least upper bound
    w, n = None, 0
    for a in els:
        for b in els:
            n += 1
            j = inst.join(a, b)
            if not (inst.leq(a, j) and inst.leq(b, j)):
                w = (a, b)
                break
        if w:
            break
    run("join-upper-bound", w, n)

    w, n = None, 0
    for a in els:
        for b in els:
            j = inst.join(a, b)
            for c in els:
                n += 1
                if inst.leq(a, c) and inst.leq(b, c) and not inst.leq(j, c):
                    w = (a, b, c)
                    break
            if w:
                break
        if w:
            break
    run("join-least", w, n)

    w, n = None, 0
    for a in els:
        n += 1
        if not inst.leq(bot, a):
            w = (a,)
            break
    run("bottom-least", w, n)

    return report


# ---------------------------------------------------------------------------
# Table file format


def parse_lattice_table(text: str, name: str = "finite") -> FiniteLattice:
    """Parse the plain-text table format:

        elements: a b c
        bottom: a
        leq:
        a a
        a b
        combine:
        a b -> c
        join:
        a b -> c

    Entries may follow the header on the same line or on subsequent lines;
    `#` starts a comment. The constructor validates totality.
    """
    elements: list[str] = []
    bottom: str | None = None
    leq_pairs: list[tuple[str, str]] = []
    combine: dict[tuple[str, str], str] = {}
    join: dict[tuple[str, str], str] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lowered = line.lower()
        matched_header = False
        for header in ("elements:", "bottom:", "leq:", "combine:", "join:"):
            if lowered.startswith(header):
                section = header[:-1]
                line = line[len(header):].strip()
                matched_header = True
                break
        if matched_header and not line:
            continue
        if section is None:
            raise LatticeError(f"line {lineno}: entry before any section header")
        if section == "elements":
            elements.extend(line.split())
        elif section == "bottom":
            if bottom is not None:
                raise LatticeError(f"line {lineno}: bottom declared twice")
            bottom = line
        elif section == "leq":
            parts = line.split()
            if len(parts) != 2:
                raise LatticeError(f"line {lineno}: leq entries are 'a b', got {line!r}")
            leq_pairs.append((parts[0], parts[1]))
        else:
            if "->" not in line:
                raise LatticeError(f"line {lineno}: table entries are 'a b -> c', got {line!r}")
            lhs, rhs = line.split("->", 1)
            parts = lhs.split()
            if len(parts) != 2 or not rhs.split():
                raise LatticeError(f"line {lineno}: table entries are 'a b -> c', got {line!r}")
            target = combine if section == "combine" else join
            key = (parts[0], parts[1])
            if key in target:
                raise LatticeError(f"line {lineno}: duplicate {section} entry for {key[0]} {key[1]}")
            target[key] = rhs.strip()
    if not elements:
        raise LatticeError("table declares no elements")
    if bottom is None:
        raise LatticeError("table declares no bottom")
    return FiniteLattice(name, elements, leq_pairs, combine, join, bottom)


def load_lattice(path: str, check: bool = True) -> FiniteLattice:
    """Load a finite lattice from a table file; by default also run the law
    checker and refuse unlawful tables."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    import os

    inst = parse_lattice_table(text, name=os.path.splitext(os.path.basename(path))[0])
    if check:
        report = check_laws(inst)
        if not report.passed:
            bad = report.failures()[0]
            raise LatticeError(f"{inst.name}: law {bad.law} fails at {bad.witness!r}")
    return inst
