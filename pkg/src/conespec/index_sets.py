"""Exact calculus of polyhomogeneous index sets.

An index set is represented by a finite antichain of generator pairs
(beta, j); the represented set is the closure under
(beta, j) -> (beta+1, j) and (beta, j) -> (beta, j-1). Exponents are exact
rationals (fractions.Fraction), which keeps equality and reduction
decidable; irrational orders are outside this calculus and must be
approximated by the caller.

Index families map the boundary-face labels
zf, bf0, lb0, rb0, bf, lb, rb to index sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Tuple

from conespec.errors import ConfigError

FACES = ("zf", "bf0", "lb0", "rb0", "bf", "lb", "rb")
ZERO_FACES = ("zf", "bf0", "lb0", "rb0")


def _to_frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 12)
    raise ConfigError(f"cannot interpret exponent {x!r}")


def _implies(g1, g2):
    """Does generator g1 = (b1, j1) imply g2 under the closure rules?"""
    b1, j1 = g1
    b2, j2 = g2
    d = b2 - b1
    return d >= 0 and d.denominator == 1 and j2 <= j1


class IndexSet:
    """Finite-generator polyhomogeneous index set (immutable)."""

    __slots__ = ("generators",)

    def __init__(self, pairs: Iterable[Tuple] = ()):
        raw = [(_to_frac(b), int(j)) for b, j in pairs]
        for _, j in raw:
            if j < 0:
                raise ConfigError("log orders must be nonnegative")
        uniq = sorted(set(raw))
        reduced = [g for g in uniq
                   if not any(h != g and _implies(h, g) for h in uniq)]
        object.__setattr__(self, "generators", tuple(reduced))

    def __setattr__(self, *a):  # immutability
        raise AttributeError("IndexSet is immutable")

    # -- basic protocol ------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, IndexSet) and self.generators == other.generators

    def __hash__(self):
        return hash(self.generators)

    def __repr__(self):
        if not self.generators:
            return "IndexSet(EMPTY)"
        inside = ", ".join(f"({b}, {j})" for b, j in self.generators)
        return f"IndexSet([{inside}])"

    def is_empty(self):
        return not self.generators

    # -- predicates ----------------------------------------------------
    def min_e(self):
        """min beta over the represented set; +inf for the empty set."""
        if not self.generators:
            return math.inf
        return min(b for b, _ in self.generators)

    def geq(self, q):
        """E >= q: every (beta, j) has beta >= q, with j = 0 when beta = q."""
        if not self.generators:
            return True
        q = _to_frac(q)
        return all(b > q or (b == q and j == 0) for b, j in self.generators)

    def gt(self, q):
        """E > q: E >= q + eps for some eps > 0."""
        if not self.generators:
            return True
        return self.min_e() > _to_frac(q)

    def is_integral(self):
        return all(b.denominator == 1 for b, _ in self.generators)

    def is_one_step(self):
        """E = E' + (alpha, 0) with E' integral: all exponents congruent
        mod 1."""
        if len(self.generators) <= 1:
            return True
        res = {b - Fraction(math.floor(b)) for b, _ in self.generators}
        return len(res) == 1

    def contains(self, beta, j=0):
        beta = _to_frac(beta)
        return any(_implies(g, (beta, int(j))) for g in self.generators)

    def is_subset(self, other):
        return all(other.contains(b, j) for b, j in self.generators)

    def is_log_extension_of(self, base):
        """Is self a logarithmic extension of base: base subset of self and
        every (beta, j) in self has (beta, 0) in base."""
        if not base.is_subset(self):
            return False
        return all(base.contains(b, 0) for b, _ in self.generators)

    def represented(self, beta_max, j_cap=12):
        """Enumerate the represented pairs with beta <= beta_max (for
        brute-force verification)."""
        beta_max = _to_frac(beta_max)
        out = set()
        for b, j in self.generators:
            k = 0
            while b + k <= beta_max:
                for jj in range(min(j, j_cap) + 1):
                    out.add((b + k, jj))
                k += 1
        return out

    # -- algebra ---------------------------------------------------------
    def add(self, other):
        """Index-set sum: pairwise (b1+b2, j1+j2)."""
        return IndexSet([(b1 + b2, j1 + j2)
                         for b1, j1 in self.generators
                         for b2, j2 in other.generators])

    def ext_union(self, other):
        """Extended union: the union plus (beta, j1+j2+1) whenever both
        sets contain exponent beta (matching happens along the integer
        closure, so generator exponents congruent mod 1 interact)."""
        pairs = list(self.generators) + list(other.generators)
        for b1, j1 in self.generators:
            for b2, j2 in other.generators:
                if (b1 - b2).denominator == 1:
                    pairs.append((max(b1, b2), j1 + j2 + 1))
        return IndexSet(pairs)

    def shifted(self, beta, j=0):
        """self + {(beta, j)} as a singleton-set sum."""
        return self.add(IndexSet([(beta, j)]))


EMPTY = IndexSet()


def smooth(q=0):
    """The shorthand set q = {(q + k, 0) | k in N}."""
    return IndexSet([(q, 0)])


def closure_reduce(pairs):
    """Canonical reduced representation of raw generator pairs."""
    return IndexSet(pairs)


@dataclass(frozen=True)
class IndexFamily:
    """Index sets attached to the boundary faces."""

    sets: Dict[str, IndexSet]

    def __post_init__(self):
        for face in self.sets:
            if face not in FACES:
                raise ConfigError(f"unknown face label {face!r}")
        filled = {face: self.sets.get(face, EMPTY) for face in FACES}
        object.__setattr__(self, "sets", filled)

    def __getitem__(self, face):
        return self.sets[face]

    def mins(self):
        return {face: self.sets[face].min_e() for face in FACES}


def compose_step(current: IndexFamily, base: IndexFamily) -> IndexFamily:
    """One step of the error-composition recursion on the zero-energy
    faces:

      lb0 <- (lb0 + zf) extu (bf0 + lb0)
      rb0 <- (rb0 + bf0) extu (zf + rb0)
      bf0 <- (bf0 + bf0) extu (lb0 + rb0)
      zf  <- (zf + zf)  extu (rb0 + lb0)

    where the left operand of each + is taken from `current` and the right
    from `base`.
    """
    c, b = current.sets, base.sets
    return IndexFamily({
        "lb0": c["lb0"].add(b["zf"]).ext_union(c["bf0"].add(b["lb0"])),
        "rb0": c["rb0"].add(b["bf0"]).ext_union(c["zf"].add(b["rb0"])),
        "bf0": c["bf0"].add(b["bf0"]).ext_union(c["lb0"].add(b["rb0"])),
        "zf": c["zf"].add(b["zf"]).ext_union(c["rb0"].add(b["lb0"])),
        "bf": c["bf"], "lb": c["lb"], "rb": c["rb"],
    })


def parametrix_error_family(nu0) -> IndexFamily:
    """The leading error index family of the low-energy construction:
    mins zf = 1, bf0 = 1, lb0 = nu0 + 2, rb0 = nu0."""
    nu0 = _to_frac(nu0)
    return IndexFamily({
        "zf": smooth(1), "bf0": smooth(1),
        "lb0": smooth(nu0 + 2), "rb0": smooth(nu0),
    })


def iterated_error_families(nu0, steps):
    """[F_0, F_1, ..., F_steps] with F_0 the base error family and
    F_{j+1} = compose_step(F_j, F_0)."""
    base = parametrix_error_family(nu0)
    fams = [base]
    for _ in range(steps):
        fams.append(compose_step(fams[-1], base))
    return fams


def error_induction_bounds(nu0, j):
    """Lower bounds for the face minima after j composition steps
    (tight at bf0/lb0/rb0): zf >= j, bf0 >= 1+j, lb0 >= nu0+2+j,
    rb0 >= nu0+j."""
    nu0 = _to_frac(nu0)
    return {"zf": Fraction(j), "bf0": Fraction(1 + j),
            "lb0": nu0 + 2 + j, "rb0": nu0 + j}


@dataclass(frozen=True)
class OrderLedger:
    """Leading-order bookkeeping for the resolvent and spectral measure."""

    resolvent: IndexFamily
    spectral: IndexFamily
    m: float = -0.5
    p: float = 0.0
    r_lb: float = 0.0
    r_rb: float = 0.0


def mainres_ledger(nu0, n) -> OrderLedger:
    """Resolvent order ledger: min zf = 0, bf0 = -2, lb0 = rb0 = nu0 - 1,
    lb = rb = (n-1)/2, bf empty; companion spectral-measure ledger shifted
    by +1 on the lambda = 0 faces with the zf floor at 2 nu0 + 1."""
    nu0 = _to_frac(nu0)
    if nu0 <= 0:
        raise ConfigError("nu0 must be positive")
    half = Fraction(n - 1, 2)
    res = IndexFamily({
        "zf": smooth(0), "bf0": smooth(-2),
        "lb0": smooth(nu0 - 1), "rb0": smooth(nu0 - 1),
        "bf": EMPTY, "lb": smooth(half), "rb": smooth(half),
    })
    spec = IndexFamily({
        "zf": smooth(2 * nu0 + 1), "bf0": smooth(-1),
        "lb0": smooth(nu0), "rb0": smooth(nu0),
        "bf": EMPTY, "lb": smooth(half), "rb": smooth(half),
    })
    return OrderLedger(res, spec, m=-0.5, p=(n - 2) / 2.0,
                       r_lb=(n - 1) / 2.0, r_rb=(n - 1) / 2.0)


# ----------------------------------------------------------------------
# tiny prefix grammar for the CLI:
#   expr := literal | (add expr expr) | (extu expr expr)
#         | (step family) | (step family family)
#   literal := [(b, j), (b, j), ...]   with b rational like 3/2 or 0.25
#   family  := {zf: literal, bf0: literal, lb0: literal, rb0: literal}


def _tokenize(text):
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace() or ch == ",":
            i += 1
        elif ch in "()[]{}:":
            out.append(ch)
            i += 1
        else:
            j = i
            while j < len(text) and (text[j] not in "()[]{}:," and
                                     not text[j].isspace()):
                j += 1
            out.append(text[i:j])
            i = j
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ConfigError(f"indexset syntax error near token {tok!r}")
        self.pos += 1
        return tok

    def parse_expr(self):
        tok = self.peek()
        if tok == "[":
            return self.parse_literal()
        if tok == "(":
            self.take("(")
            op = self.take()
            if op in ("add", "extu"):
                a = self.parse_expr()
                b = self.parse_expr()
                self.take(")")
                return a.add(b) if op == "add" else a.ext_union(b)
            if op == "step":
                fam = self.parse_family()
                if self.peek() == "{":
                    base = self.parse_family()
                else:
                    base = fam
                self.take(")")
                return compose_step(fam, base)
            raise ConfigError(f"unknown indexset operator {op!r}")
        raise ConfigError(f"indexset syntax error near token {tok!r}")

    def parse_literal(self):
        self.take("[")
        pairs = []
        while self.peek() != "]":
            self.take("(")
            b = self.take()
            j = self.take()
            self.take(")")
            pairs.append((Fraction(b), int(j)))
        self.take("]")
        return IndexSet(pairs)

    def parse_family(self):
        self.take("{")
        sets = {}
        while self.peek() != "}":
            face = self.take()
            self.take(":")
            sets[face] = self.parse_literal()
        self.take("}")
        return IndexFamily(sets)


def evaluate_expression(text):
    """Evaluate a prefix indexset expression; returns IndexSet or
    IndexFamily."""
    parser = _Parser(_tokenize(text))
    result = parser.parse_expr()
    if parser.peek() is not None:
        raise ConfigError("trailing tokens in indexset expression")
    return result


def format_result(obj):
    if isinstance(obj, IndexSet):
        return repr(obj)
    lines = [f"{face}: {obj[face]!r}" for face in FACES]
    return "\n".join(lines)
