"""Overlay codes: per-message noise-level assignments with guaranteed
pairwise separation.

An overlay over n coordinates picks a strictly increasing set of levels
K inside [0,1) (level 1 is implicit) and gives every message exactly
ell = floor(n / (|K|+1)) coordinates at each level of K, the remainder
at level 1.  The defining pairwise property: for any two distinct
messages there is a level k whose shared-k coordinate count is at most
gamma*ell while the first message's k-coordinates avoid every lower
level of the second entirely.

Construction: levels are filled in ascending order; at each level a
uniformly random ell-subset of the *surviving* coordinate slots is
drawn per level-message, then mapped order-preservingly into the actual
unassigned coordinates.  Built codes are verified and resampled until
the pairwise property holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from . import numerics
from .streams import Role, one_shot_rng

MAX_TOTAL_MESSAGES = 1 << 20  # materialization guard
DEFECT_COEFF = {"construction": 1.0 / 3.0, "theorem": 4.0 / 3.0}


class OverlayError(ValueError):
    pass


@dataclass(frozen=True)
class LevelSet:
    """Strictly increasing levels in [0,1); level 1.0 joins implicitly."""

    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        ks = tuple(float(k) for k in self.levels)
        if not ks:
            raise OverlayError("at least one level below 1 is required")
        if any(not 0.0 <= k < 1.0 for k in ks):
            raise OverlayError(f"levels must lie in [0,1), got {ks}")
        if any(a >= b for a, b in zip(ks, ks[1:])):
            raise OverlayError(f"levels must be strictly increasing, got {ks}")
        object.__setattr__(self, "levels", ks)

    @classmethod
    def uniform(cls, ktilde_size: int) -> "LevelSet":
        """{0, 1/s, ..., (s-1)/s} for extended size s."""
        if ktilde_size < 2:
            raise OverlayError("extended level count must be at least 2")
        return cls(tuple(i / ktilde_size for i in range(ktilde_size)))

    @property
    def extended(self) -> tuple[float, ...]:
        return self.levels + (1.0,)

    def __len__(self) -> int:
        return len(self.levels)

    def next_above(self, k: float) -> float:
        """Smallest extended level strictly above k."""
        for d in self.extended:
            if d > k:
                return d
        raise OverlayError(f"no level above {k}")


def _as_fraction(gamma: float | Fraction) -> Fraction:
    return gamma if isinstance(gamma, Fraction) else Fraction(float(gamma))


def _check_gamma(gamma_exact: Fraction) -> None:
    if not Fraction(1, 2) < gamma_exact < 1:
        raise OverlayError(
            f"gamma must lie strictly between 1/2 and 1, got {gamma_exact}")


@dataclass(frozen=True, eq=False)
class OverlayCode:
    """A concrete overlay: per message, one coordinate set per level in K.

    ``assignment[m][j]`` is the frozenset of 1-based coordinates that
    message ``m`` carries at ``level_set.levels[j]``; coordinates in no
    set sit at level 1.  ``gamma_exact`` preserves the threshold as a
    rational so boundary overlap comparisons are exact.
    """

    n: int
    level_set: LevelSet
    gamma: float
    gamma_exact: Fraction
    assignment: tuple[tuple[frozenset[int], ...], ...]
    radices: tuple[int, ...] | None = None
    attempts: int = 1

    def __post_init__(self) -> None:
        if self.n < len(self.level_set.extended):
            raise OverlayError("n must be at least the extended level count")
        for row in self.assignment:
            if len(row) != len(self.level_set):
                raise OverlayError("assignment row arity != level count")
            seen: set[int] = set()
            for coords in row:
                if any(not 1 <= i <= self.n for i in coords):
                    raise OverlayError("coordinate index out of range")
                if seen & coords:
                    raise OverlayError("levels assign overlapping coordinates")
                seen |= coords

    @property
    def ell(self) -> int:
        return self.n // len(self.level_set.extended)

    @property
    def message_count(self) -> int:
        return len(self.assignment)

    @property
    def max_overlap(self) -> int:
        """Largest integer overlap count not exceeding gamma*ell."""
        return math.floor(self.gamma_exact * self.ell)

    def level_coords(self, m: int, k: float) -> frozenset[int]:
        """Coordinates of message m at level k (k may be 1.0)."""
        if k == 1.0:
            assigned = frozenset().union(*self.assignment[m]) if self.assignment[m] else frozenset()
            return frozenset(range(1, self.n + 1)) - assigned
        return self.assignment[m][self.level_set.levels.index(k)]

    def levels_vector(self, m: int) -> np.ndarray:
        """Length-n vector of level values for message m."""
        f = np.ones(self.n)
        for j, coords in enumerate(self.assignment[m]):
            f[np.fromiter(coords, int) - 1] = self.level_set.levels[j]
        return f

    def level_matrix(self) -> np.ndarray:
        """(message_count, n) matrix of level values."""
        return np.stack([self.levels_vector(m) for m in range(self.message_count)])

    def decompose(self, m: int) -> tuple[int, ...]:
        """Per-level digits of message m (ascending levels, first digit
        most significant); requires radices."""
        if self.radices is None:
            raise OverlayError("code carries no per-level radices")
        digits = []
        rem = m
        for radix in reversed(self.radices):
            digits.append(rem % radix)
            rem //= radix
        if rem:
            raise OverlayError(f"message id {m} out of range")
        return tuple(reversed(digits))


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of exhaustive ordered-pair verification."""

    passed: bool
    ell: int
    max_overlap_allowed: int
    witness_level: np.ndarray       # (M, M) index into K; -1 diagonal, -2 none
    witness_overlap: np.ndarray     # (M, M) overlap count at the witness level
    violations: tuple[str, ...] = ()

    def witness(self, m: int, m_prime: int) -> tuple[float, int] | None:
        idx = int(self.witness_level[m, m_prime])
        if idx < 0:
            return None
        return idx, int(self.witness_overlap[m, m_prime])


def order_preserving_map(source: Iterable[int], target: Iterable[int],
                         subset: Iterable[int]) -> frozenset[int]:
    """Image of ``subset`` under the unique increasing bijection from
    ``source`` onto ``target`` (equal sizes required)."""
    src = sorted(source)
    tgt = sorted(target)
    if len(src) != len(tgt):
        raise OverlayError("source and target must have equal size")
    if len(set(src)) != len(src) or len(set(tgt)) != len(tgt):
        raise OverlayError("source and target must not contain duplicates")
    lut = dict(zip(src, tgt))
    try:
        return frozenset(lut[s] for s in subset)
    except KeyError as e:
        raise OverlayError(f"subset element {e.args[0]} not in source") from None


def default_level_message_counts(n: int, level_set: LevelSet,
                                 gamma: float | Fraction,
                                 defect: str = "construction") -> list[int]:
    """Per-level message counts floor(exp(n_k * r_k)) from the displayed
    per-level rate r_k = |i2(gamma || ell/n_k) - coef/n_k - (2/n_k) ln(n_k sqrt(ell))|+.
    """
    coef = DEFECT_COEFF[defect]
    g = float(gamma)
    ell = n // len(level_set.extended)
    counts = []
    for j in range(len(level_set)):
        n_k = n - ell * j
        bracket = (numerics.i2(g, ell / n_k)
                   - coef / n_k
                   - (2.0 / n_k) * math.log(n_k * math.sqrt(ell)))
        exponent = n_k * max(0.0, bracket)
        if exponent > math.log(MAX_TOTAL_MESSAGES) + 1:
            counts.append(MAX_TOTAL_MESSAGES + 1)  # triggers the guard upstream
        else:
            counts.append(max(1, math.floor(math.exp(exponent))))
    return counts


def overlay_rate_finite(n: int, level_set: LevelSet, gamma: float,
                        defect: str = "theorem") -> float:
    """Guaranteed finite-blocklength overlay rate (nats/symbol):
    (1/n) sum_k n_k |i2(gamma||ell/n_k) - coef/n_k - (2/n_k) ln(n_k sqrt(ell))|+.

    ``defect`` selects the additive-defect coefficient: the conservative
    4/3 (default) or the construction's 1/3.
    """
    coef = DEFECT_COEFF[defect]
    _check_gamma(_as_fraction(gamma))
    ell = n // len(level_set.extended)
    if ell < 1:
        raise OverlayError("n too small for the level count")
    total = 0.0
    for j in range(len(level_set)):
        n_k = n - ell * j
        bracket = (numerics.i2(float(gamma), ell / n_k)
                   - coef / n_k
                   - (2.0 / n_k) * math.log(n_k * math.sqrt(ell)))
        total += n_k * max(0.0, bracket)
    return total / n


def overlay_rate_asymptotic(ktilde_size: int, gamma: float) -> float:
    """Large-n overlay rate limit |gamma ln|K~| - gamma - h2(gamma)|+."""
    if ktilde_size < 2:
        raise OverlayError("extended level count must be at least 2")
    _check_gamma(_as_fraction(gamma))
    return max(0.0, gamma * math.log(ktilde_size) - gamma - numerics.h2(gamma))


def _resolve_counts(n: int, level_set: LevelSet, gamma: float | Fraction,
                    rates_per_level: Sequence[float] | None,
                    counts_per_level: Sequence[int] | None,
                    max_messages_per_level: int | None) -> list[int]:
    ell = n // len(level_set.extended)
    if rates_per_level is not None and counts_per_level is not None:
        raise OverlayError("give rates_per_level or counts_per_level, not both")
    if counts_per_level is not None:
        counts = [int(c) for c in counts_per_level]
    elif rates_per_level is not None:
        if len(rates_per_level) != len(level_set):
            raise OverlayError("one rate per level in K is required")
        counts = [max(1, math.floor(math.exp((n - ell * j) * max(0.0, r))))
                  for j, r in enumerate(rates_per_level)]
    else:
        counts = default_level_message_counts(n, level_set, gamma)
    if len(counts) != len(level_set):
        raise OverlayError("one message count per level in K is required")
    if any(c < 1 for c in counts):
        raise OverlayError("per-level message counts must be >= 1")
    if max_messages_per_level is not None:
        counts = [min(c, int(max_messages_per_level)) for c in counts]
    for j, c in enumerate(counts):
        n_k = n - ell * j
        if c > math.comb(n_k, ell):
            raise OverlayError(
                f"level {level_set.levels[j]}: {c} messages exceed "
                f"C({n_k},{ell}) available subsets")
    total = math.prod(counts)
    if total > MAX_TOTAL_MESSAGES:
        raise OverlayError(
            f"requested {total} messages exceeds the materialization guard "
            f"({MAX_TOTAL_MESSAGES}); pass counts_per_level, rates_per_level "
            f"or max_messages_per_level")
    return counts


def _assemble(n: int, level_set: LevelSet, counts: Sequence[int],
              tables: Sequence[Sequence[frozenset[int]]]) -> tuple[tuple[frozenset[int], ...], ...]:
    """Build every message row from per-level subset tables by following
    ascending levels through the shrinking pool of unassigned coordinates."""
    rows = []
    for m in range(math.prod(counts)):
        digits = []
        rem = m
        for radix in reversed(counts):
            digits.append(rem % radix)
            rem //= radix
        digits.reverse()
        pool = list(range(1, n + 1))  # stays sorted; slot s -> pool[s-1]
        row = []
        for j, d in enumerate(digits):
            image = frozenset(pool[s - 1] for s in tables[j][d])
            row.append(image)
            pool = [i for i in pool if i not in image]
        rows.append(tuple(row))
    return tuple(rows)


def construct_overlay(n: int, level_set: LevelSet, gamma: float | Fraction,
                      rates_per_level: Sequence[float] | None = None,
                      seed: int = 0, *,
                      counts_per_level: Sequence[int] | None = None,
                      subset_tables: Sequence[Sequence[Iterable[int]]] | None = None,
                      max_messages_per_level: int | None = None,
                      retry_limit: int = 64) -> OverlayCode:
    """Construct an overlay code by iterated random subsets.

    Per level k (ascending), each level-message draws a uniform
    ell-subset of {1..n_k} where n_k counts the slots not consumed by
    lower levels; the subset is mapped order-preservingly into the
    remaining coordinates.  The full product code is verified and the
    subsets resampled until verification passes (`retry_limit` caps the
    attempts).  Explicit ``subset_tables`` (one table per level, each a
    list of 1-based slot subsets) bypass sampling.
    """
    gamma_exact = _as_fraction(gamma)
    _check_gamma(gamma_exact)
    if n < len(level_set.extended):
        raise OverlayError("n must be at least the extended level count")
    ell = n // len(level_set.extended)

    if subset_tables is not None:
        tables = [[frozenset(map(int, s)) for s in per_level]
                  for per_level in subset_tables]
        if len(tables) != len(level_set):
            raise OverlayError("one subset table per level in K is required")
        counts = [len(t) for t in tables]
        for j, table in enumerate(tables):
            n_k = n - ell * j
            for s in table:
                if len(s) != ell or any(not 1 <= v <= n_k for v in s):
                    raise OverlayError(
                        f"level {level_set.levels[j]}: subsets must be "
                        f"ell={ell} slots within 1..{n_k}")
        assignment = _assemble(n, level_set, counts, tables)
        code = OverlayCode(n, level_set, float(gamma_exact), gamma_exact,
                           assignment, radices=tuple(counts))
        report = verify_overlay(code)
        if not report.passed:
            raise OverlayError(
                "explicit subset tables fail verification: "
                + "; ".join(report.violations[:3]))
        return code

    counts = _resolve_counts(n, level_set, gamma_exact, rates_per_level,
                             counts_per_level, max_messages_per_level)
    for attempt in range(retry_limit):
        rng = one_shot_rng(seed, Role.OVERLAY, attempt)
        tables = []
        for j, c in enumerate(counts):
            n_k = n - ell * j
            tables.append([frozenset(rng.choice(n_k, size=ell, replace=False) + 1)
                           for _ in range(c)])
        assignment = _assemble(n, level_set, counts, tables)
        code = OverlayCode(n, level_set, float(gamma_exact), gamma_exact,
                           assignment, radices=tuple(counts),
                           attempts=attempt + 1)
        if verify_overlay(code).passed:
            return code
    raise OverlayError(f"verification failed for {retry_limit} attempts; "
                       f"rates are likely too aggressive for n={n}")


def verify_overlay(code: OverlayCode, block: int = 1024) -> VerifyReport:
    """Exhaustively check the pairwise overlay property over all ordered
    message pairs, recording the first (lowest) witness level per pair,
    plus the per-level cardinality requirement."""
    m_count = code.message_count
    ell = code.ell
    levels = code.level_set.levels
    allowed = code.max_overlap

    violations: list[str] = []
    masks = []
    for j, k in enumerate(levels):
        bk = np.zeros((m_count, code.n), dtype=np.float32)
        for m, row in enumerate(code.assignment):
            coords = row[j]
            if len(coords) != ell:
                violations.append(
                    f"message {m} has {len(coords)} coordinates at level {k}, "
                    f"expected {ell}")
            if coords:
                bk[m, np.fromiter(coords, int) - 1] = 1.0
        masks.append(bk)

    witness_level = np.full((m_count, m_count), -2, dtype=np.int8)
    witness_overlap = np.zeros((m_count, m_count), dtype=np.int32)
    np.fill_diagonal(witness_level, -1)

    for r0 in range(0, m_count, block):
        r1 = min(r0 + block, m_count)
        found = np.zeros((r1 - r0, m_count), dtype=bool)
        for kidx in range(len(levels)):
            overlap = np.rint(masks[kidx][r0:r1] @ masks[kidx].T).astype(np.int32)
            ok = overlap <= allowed
            for jidx in range(kidx):
                cross = masks[kidx][r0:r1] @ masks[jidx].T
                ok &= np.rint(cross).astype(np.int32) == 0
            newly = ok & ~found
            newly[:, r0:r1] &= ~np.eye(r1 - r0, dtype=bool)
            witness_level[r0:r1][newly] = kidx
            witness_overlap[r0:r1][newly] = overlap[newly]
            found |= ok

    pair_fail = witness_level == -2
    if pair_fail.any():
        bad = np.argwhere(pair_fail)
        for m, mp in bad[:8]:
            violations.append(f"no witness level for ordered pair ({m}, {mp})")
        if len(bad) > 8:
            violations.append(f"... and {len(bad) - 8} more failing pairs")

    return VerifyReport(passed=not violations, ell=ell,
                        max_overlap_allowed=allowed,
                        witness_level=witness_level,
                        witness_overlap=witness_overlap,
                        violations=tuple(violations))


def to_json_dict(code: OverlayCode) -> dict[str, Any]:
    """JSON form: levels listed ascending, coordinates 1-based."""
    out: dict[str, Any] = {
        "n": code.n,
        "gamma": code.gamma,
        "levels": list(code.level_set.levels),
        "messages": [
            {"level_coords": {repr(code.level_set.levels[j]): sorted(row[j])
                              for j in range(len(code.level_set))}}
            for row in code.assignment
        ],
    }
    out["gamma_exact"] = f"{code.gamma_exact.numerator}/{code.gamma_exact.denominator}"
    if code.radices is not None:
        out["radices"] = list(code.radices)
    return out


def from_json_dict(data: dict[str, Any]) -> OverlayCode:
    level_set = LevelSet(tuple(data["levels"]))
    if "gamma_exact" in data:
        num, den = data["gamma_exact"].split("/")
        gamma_exact = Fraction(int(num), int(den))
    else:
        gamma_exact = Fraction(float(data["gamma"]))
    key = [repr(k) for k in level_set.levels]
    assignment = tuple(
        tuple(frozenset(msg["level_coords"][key[j]])
              for j in range(len(level_set)))
        for msg in data["messages"])
    radices = tuple(data["radices"]) if "radices" in data else None
    return OverlayCode(int(data["n"]), level_set, float(data["gamma"]),
                       gamma_exact, assignment, radices=radices)
