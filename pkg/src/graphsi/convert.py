"""Conversion from Moebius interactions to the classic indices.

Every supported index is a fixed linear redistribution of the Moebius
mass: an interaction m(S~) contributes to the subsets of S~ up to the
explanation order, with a weight depending only on |S|, |S~| and k. The
weights are assembled in exact rational arithmetic (Bernoulli numbers
cancel catastrophically in floats) and realized to float64 once.

Cost is linear in the number of stored interactions times the subsets
enumerated inside each support set, never in 2^n.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb

from .coalitions import iter_members, mask_of
from .interactions import InteractionValues


@lru_cache(maxsize=None)
def bernoulli_numbers(m: int) -> tuple[Fraction, ...]:
    """B_0..B_m as exact rationals, first-kind convention B_1 = -1/2.

    Akiyama-Tanigawa in rational arithmetic (which produces the
    second-kind B_1 = +1/2; index 1 is negated to fix the convention).
    """
    row: list[Fraction] = []
    out: list[Fraction] = []
    for i in range(m + 1):
        row.append(Fraction(1, i + 1))
        for j in range(i, 0, -1):
            row[j - 1] = j * (row[j - 1] - row[j])
        out.append(row[0])
    if m >= 1:
        out[1] = -out[1]
    return tuple(out)


@lru_cache(maxsize=None)
def _ksii_weight(s: int, s_tilde: int, k: int) -> float:
    """Share of m(S~) that lands on a size-s subset under order-k aggregation.

    Collapsing the Bernoulli recursion over the order hierarchy onto the
    Moebius basis gives, for s <= k <= |S~| universes,

        w = sum_{r=0}^{min(k-s, s_tilde-s)} B_r * C(s_tilde-s, r) / (s_tilde-s-r+1)

    which reduces to 1/s_tilde at k=1 (the Shapley value) and to an
    indicator of s_tilde = s at k = n (the Moebius values themselves).
    """
    gap = s_tilde - s
    bern = bernoulli_numbers(min(k - s, gap))
    total = Fraction(0)
    for r in range(min(k - s, gap) + 1):
        total += bern[r] * comb(gap, r) * Fraction(1, gap - r + 1)
    return float(total)


def mi_to_sv(mi: InteractionValues) -> InteractionValues:
    """Shapley values: each interaction is split equally among its members."""
    out: dict[int, float] = {1 << i: 0.0 for i in range(mi.n)}
    for s_tilde, value in mi.values.items():
        size = s_tilde.bit_count()
        if size == 0:
            continue
        share = value / size
        for i in iter_members(s_tilde):
            out[1 << i] += share
    return InteractionValues(kind="sv", k=1, n=mi.n, values=out, ell=mi.ell,
                             lam=mi.lam, call_count=mi.call_count)


def _distribute(mi: InteractionValues, k: int, weight) -> dict[int, float]:
    """Accumulate weight(|S|, |S~|) * m(S~) onto subsets S of each support set."""
    out: dict[int, float] = {}
    for s_tilde, value in mi.values.items():
        members = list(iter_members(s_tilde))
        for size in range(1, min(k, len(members)) + 1):
            w = weight(size, len(members))
            if w == 0.0:
                continue
            contribution = value * w
            for combo in combinations(members, size):
                key = mask_of(combo)
                out[key] = out.get(key, 0.0) + contribution
    return out


def mi_to_sii(mi: InteractionValues, k: int) -> InteractionValues:
    """Shapley interaction index for every set of size 1..k."""
    _check_order(mi, k)
    values = _distribute(mi, k, lambda s, s_tilde: 1.0 / (s_tilde - s + 1))
    return InteractionValues(kind="sii", k=k, n=mi.n, values=values, ell=mi.ell,
                             lam=mi.lam, call_count=mi.call_count)


def mi_to_ksii(mi: InteractionValues, k: int) -> InteractionValues:
    """k-Shapley interactions: SII at the top order, Bernoulli-aggregated below."""
    _check_order(mi, k)
    values = _distribute(mi, k, lambda s, s_tilde: _ksii_weight(s, s_tilde, k))
    return InteractionValues(kind="ksii", k=k, n=mi.n, values=values, ell=mi.ell,
                             lam=mi.lam, call_count=mi.call_count)


def mi_to_stii(mi: InteractionValues, k: int) -> InteractionValues:
    """Shapley-Taylor interactions: Moebius values below order k, the
    remaining mass spread over the size-k subsets of each support set."""
    _check_order(mi, k)
    out: dict[int, float] = {}
    for s_tilde, value in mi.values.items():
        size = s_tilde.bit_count()
        if size == 0:
            continue
        if size < k:
            out[s_tilde] = out.get(s_tilde, 0.0) + value
        else:
            share = value / comb(size, k)
            for combo in combinations(list(iter_members(s_tilde)), k):
                key = mask_of(combo)
                out[key] = out.get(key, 0.0) + share
    return InteractionValues(kind="stii", k=k, n=mi.n, values=out, ell=mi.ell,
                             lam=mi.lam, call_count=mi.call_count)


def convert_mi(mi: InteractionValues, index: str, k: int) -> InteractionValues:
    """Dispatch to the requested index; "mi" returns the input unchanged."""
    if mi.kind != "mi":
        raise ValueError(f"conversion starts from Moebius values, got kind {mi.kind!r}")
    if index == "mi":
        return mi
    if index == "sv":
        if k != 1:
            raise ValueError("the Shapley value is an order-1 index; use k=1")
        return mi_to_sv(mi)
    if index == "sii":
        return mi_to_sii(mi, k)
    if index == "ksii":
        return mi_to_ksii(mi, k)
    if index == "stii":
        return mi_to_stii(mi, k)
    raise ValueError(f"unknown index {index!r}")


def efficiency_check(si: InteractionValues, nu_full: float, nu_empty: float) -> float:
    """Absolute efficiency residual of an interaction map.

    Moebius values (which carry the empty set) must sum to nu(N);
    converted indices must sum to nu(N) - nu(empty) over their non-empty
    sets. SII is not an efficient index, so its residual is honest
    information rather than a defect.
    """
    if si.kind == "mi":
        return abs(si.total() - nu_full)
    total = sum(v for s, v in si.values.items() if s != 0)
    return abs(total - (nu_full - nu_empty))


def _check_order(mi: InteractionValues, k: int) -> None:
    if not 1 <= k <= mi.n:
        raise ValueError(f"order k must be in 1..{mi.n}, got {k}")
