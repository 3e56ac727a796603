"""Exact symbolic Svetlichny and Mermin-Klyshko correlation polynomials.

A polynomial maps per-party setting tuples (party 1 first) to dyadic
rational coefficients.  The recursions cancel exactly over the rationals,
so term counts and signs are structural facts, not numerical ones.

Sign convention: S2- = A0 A0 + A0 A1 + A1 A0 - A1 A1 and S2+ = -(S2-)'
where ' flips every setting label.  This is the convention under which the
N-partite recursion reproduces the standard GHZ saturation values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType

import numpy as np

from .linalg import FileFormatError, InvariantViolation, kron_chain
from .observables import MeasurementScenario
from .rng import SplitMix64

_PERMUTATION_SAMPLE_SEED = 0x9E3779B9  # fixed draw for the N > 6 spot check


class BellPolynomial:
    """Signed sum of full correlators, keyed by per-party setting tuples.

    Coefficients are exact dyadic rationals; zero coefficients are dropped
    at construction.  ``terms`` is a read-only mapping; equality compares
    party count and terms exactly (labels are metadata).
    """

    __slots__ = ("n_parties", "terms", "label")

    def __init__(self, n_parties: int, terms, label: str = "custom"):
        if n_parties < 1:
            raise ValueError(f"party count must be >= 1, got {n_parties}")
        clean = {}
        for settings, coeff in dict(terms).items():
            key = tuple(int(b) for b in settings)
            if len(key) != n_parties or any(b not in (0, 1) for b in key):
                raise ValueError(f"bad settings tuple {settings!r} for {n_parties} parties")
            value = Fraction(coeff)
            if value == 0:
                continue
            denominator = value.denominator
            if denominator & (denominator - 1):
                raise ValueError(f"coefficient {value} is not a dyadic rational")
            clean[key] = value
        self.n_parties = n_parties
        self.terms = MappingProxyType(clean)
        self.label = label

    def __eq__(self, other):
        if not isinstance(other, BellPolynomial):
            return NotImplemented
        return self.n_parties == other.n_parties and dict(self.terms) == dict(other.terms)

    __hash__ = None

    def __repr__(self):
        return (
            f"BellPolynomial(n_parties={self.n_parties}, "
            f"terms={len(self.terms)}, label={self.label!r})"
        )

    def scaled(self, factor) -> "BellPolynomial":
        """Same terms with every coefficient multiplied by a dyadic factor."""
        f = Fraction(factor)
        label = self.label if f == 1 else "custom"
        return BellPolynomial(
            self.n_parties, {k: c * f for k, c in self.terms.items()}, label
        )

    def __neg__(self):
        return self.scaled(-1)


def _flip(settings: tuple) -> tuple:
    return tuple(1 - b for b in settings)


def _weighted_sum(n_parties: int, contributions, label: str) -> BellPolynomial:
    """Sum of (weight, polynomial, appended setting bit) products."""
    total: dict = {}
    for weight, poly, setting in contributions:
        w = Fraction(weight)
        for settings, coeff in poly.terms.items():
            key = settings + (setting,)
            value = total.get(key, Fraction(0)) + w * coeff
            if value == 0:
                total.pop(key, None)
            else:
                total[key] = value
    return BellPolynomial(n_parties, total, label)


def _require_unit_coefficients(poly: BellPolynomial, expected_count: int) -> None:
    if len(poly.terms) != expected_count:
        raise InvariantViolation(
            f"{poly.label}({poly.n_parties}) built {len(poly.terms)} terms, "
            f"expected {expected_count}"
        )
    if any(abs(c) != 1 for c in poly.terms.values()):
        raise InvariantViolation(
            f"{poly.label}({poly.n_parties}) has a coefficient outside +/-1"
        )


def svetlichny(n_parties: int, parity: str) -> BellPolynomial:
    """S_N^+ or S_N^- via S_N^{+/-} = S_{N-1}^{+/-} A0 -/+ S_{N-1}^{-/+} A1.

    2**N terms, all coefficients +/-1.
    """
    if parity not in ("+", "-"):
        raise ValueError(f"parity must be '+' or '-', got {parity!r}")
    if not 2 <= n_parties <= 12:
        raise ValueError(f"party count must be in [2, 12], got {n_parties}")
    minus = BellPolynomial(
        2, {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}, "svetlichny-"
    )
    plus = BellPolynomial(
        2, {_flip(k): -c for k, c in minus.terms.items()}, "svetlichny+"
    )
    for m in range(3, n_parties + 1):
        new_plus = _weighted_sum(m, [(1, plus, 0), (-1, minus, 1)], "svetlichny+")
        new_minus = _weighted_sum(m, [(1, minus, 0), (1, plus, 1)], "svetlichny-")
        plus, minus = new_plus, new_minus
    result = plus if parity == "+" else minus
    _require_unit_coefficients(result, 1 << n_parties)
    return result


def mk(n_parties: int) -> BellPolynomial:
    """M_N from M_1 = A0 and the halved two-term recursion, normalized.

    M_N = (M_{N-1}(A0 + A1) + M'_{N-1}(A0 - A1))/2, then scaled by
    2**(N/2) for even N and 2**((N-1)/2) for odd N so every surviving
    coefficient is +/-1.  Odd N keeps 2**(N-1) terms (exact cancellation),
    even N keeps all 2**N.
    """
    if not 1 <= n_parties <= 12:
        raise ValueError(f"party count must be in [1, 12], got {n_parties}")
    current = BellPolynomial(1, {(0,): 1}, "mk")
    half = Fraction(1, 2)
    for m in range(2, n_parties + 1):
        primed = relabel(current)
        current = _weighted_sum(
            m,
            [(half, current, 0), (half, current, 1), (half, primed, 0), (-half, primed, 1)],
            "mk",
        )
    scale = 1 << (n_parties // 2)
    result = BellPolynomial(
        n_parties, {k: c * scale for k, c in current.terms.items()}, "mk"
    )
    expected = 1 << (n_parties - 1) if n_parties % 2 else 1 << n_parties
    _require_unit_coefficients(result, expected)
    return result


_RELABELED = {"mk": "mk-primed", "mk-primed": "mk"}


def relabel(polynomial: BellPolynomial) -> BellPolynomial:
    """Flip every setting label 0 <-> 1 (the prime operation); an involution."""
    label = _RELABELED.get(polynomial.label, "custom")
    return BellPolynomial(
        polynomial.n_parties,
        {_flip(k): c for k, c in polynomial.terms.items()},
        label,
    )


def realize(polynomial: BellPolynomial, scenario: MeasurementScenario) -> np.ndarray:
    """Dense matrix sum of coeff * (tensor of party locals at the term's settings).

    Terms are accumulated per {settings, flipped settings} pair in sorted
    order, so a relabeled polynomial on a setting-swapped scenario sums the
    same floats in a commuted order and lands on the identical matrix.
    """
    if polynomial.n_parties != scenario.n_parties:
        raise ValueError(
            f"polynomial spans {polynomial.n_parties} parties, "
            f"scenario {scenario.n_parties}"
        )
    n = polynomial.n_parties
    dim = 1 << n
    if not polynomial.terms:
        return np.zeros((dim, dim), dtype=complex)
    groups: dict = {}
    for settings in polynomial.terms:
        canon = min(settings, _flip(settings))
        groups.setdefault(canon, []).append(settings)
    total = None
    for canon in sorted(groups):
        block = None
        for settings in groups[canon]:
            coeff = float(polynomial.terms[settings])
            factors = [
                scenario.observable(party, settings[party - 1]).local
                for party in range(1, n + 1)
            ]
            term = coeff * kron_chain(factors)
            block = term if block is None else block + term
        total = block if total is None else total + block
    return total


@dataclass(frozen=True)
class EvenEquivalence:
    """mk(N) = sign * svetlichny(N, parity), exact over the rationals."""

    parity: str
    sign: int


def check_equivalence_even(n_parties: int) -> EvenEquivalence:
    """Find the signed Svetlichny operator equal to mk(N) for even N <= 10."""
    if n_parties % 2 or not 2 <= n_parties <= 10:
        raise ValueError(f"need an even party count in [2, 10], got {n_parties}")
    target = mk(n_parties)
    for parity in ("+", "-"):
        candidate = svetlichny(n_parties, parity)
        for sign in (1, -1):
            if target == candidate.scaled(sign):
                return EvenEquivalence(parity, sign)
    raise InvariantViolation(
        f"mk({n_parties}) matches no signed Svetlichny operator"
    )


def _random_permutation(rng: SplitMix64, n: int) -> tuple:
    order = list(range(n))
    for i in range(n - 1, 0, -1):  # Fisher-Yates on the shared stream
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return tuple(order)


def is_permutation_invariant(polynomial: BellPolynomial) -> bool:
    """Whether the term map is unchanged under every party-slot permutation.

    Exhaustive over all N! permutations for N <= 6; a fixed sample of 100
    seeded random permutations above that.
    """
    n = polynomial.n_parties
    if n <= 6:
        candidates = itertools.permutations(range(n))
    else:
        rng = SplitMix64(_PERMUTATION_SAMPLE_SEED)
        candidates = [_random_permutation(rng, n) for _ in range(100)]
    reference = dict(polynomial.terms)
    for perm in candidates:
        permuted = {
            tuple(key[perm[i]] for i in range(n)): coeff
            for key, coeff in reference.items()
        }
        if permuted != reference:
            return False
    return True


def dump_terms(polynomial: BellPolynomial) -> str:
    """One ``+1 bits`` / ``-1 bits`` line per term, sorted by bitstring."""
    lines = []
    for settings in sorted(polynomial.terms):
        coeff = polynomial.terms[settings]
        if coeff == 1:
            sign = "+1"
        elif coeff == -1:
            sign = "-1"
        else:
            raise ValueError(f"dump format needs +/-1 coefficients, found {coeff}")
        lines.append(f"{sign} {''.join(str(b) for b in settings)}")
    return "\n".join(lines) + "\n"


def parse_terms(text: str, label: str = "custom") -> BellPolynomial:
    """Inverse of dump_terms; the round-trip is exact."""
    terms: dict = {}
    n = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if (
            len(parts) != 2
            or parts[0] not in ("+1", "-1")
            or not parts[1]
            or set(parts[1]) - {"0", "1"}
        ):
            raise FileFormatError(f"line {line_no}: expected '+/-1 bits', got {raw!r}")
        bits = tuple(int(ch) for ch in parts[1])
        if n is None:
            n = len(bits)
        elif len(bits) != n:
            raise FileFormatError(f"line {line_no}: inconsistent bit width")
        if bits in terms:
            raise FileFormatError(f"line {line_no}: duplicate settings {parts[1]}")
        terms[bits] = 1 if parts[0] == "+1" else -1
    if not terms:
        raise FileFormatError("no terms found")
    return BellPolynomial(n, terms, label)
