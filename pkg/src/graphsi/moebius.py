"""Sparse exact and truncated-order interaction computation.

The central fact: with a linear readout, the graph game's Moebius
interactions vanish outside the union of the power sets of the
receptive fields. The exact routine therefore evaluates the game on
that union only, which is typically exponentially smaller than the full
power set, and still recovers every interaction index exactly.

The truncated variant caps the interaction order at lambda, evaluates
the surviving sets plus each full receptive field, and repairs the
efficiency gap so the recovered values still sum to the full
prediction.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

from .coalitions import full_mask, is_subset, iter_members, iter_subsets, mask_of, sort_key
from .errors import BudgetExceeded, NonlinearReadout
from .graph import NeighborhoodIndex
from .interactions import InteractionSet, InteractionValues

DEFAULT_CEILING = 2 ** 24


def _unique_maximal(masks) -> list[int]:
    """Drop masks contained in another mask; keep one copy of each survivor."""
    unique = sorted(set(masks), key=sort_key, reverse=True)  # big first
    kept: list[int] = []
    for m in unique:
        if not any(is_subset(m, big) for big in kept):
            kept.append(m)
    return kept


def suggest_lambda(hoods: NeighborhoodIndex, ceiling: int) -> int:
    """Largest order cap whose evaluation count provably fits the ceiling.

    The truncated run evaluates at most sum_i C(|N_i|, <= lam) sets plus
    one per distinct oversized neighborhood.
    """
    sizes = [h.bit_count() for h in hoods.hoods]
    n_max = max(sizes)
    best = 1
    for lam in range(1, n_max + 1):
        cost = sum(sum(comb(h, j) for j in range(min(h, lam) + 1)) for h in sizes)
        cost += len(set(hoods.hoods))
        if cost <= ceiling:
            best = lam
        else:
            break
    return best


def build_interaction_set(hoods: NeighborhoodIndex,
                          ceiling: int = DEFAULT_CEILING) -> InteractionSet:
    """Union of the power sets of all receptive fields, canonically ordered.

    Guarded: when sum_i 2^|N_i| exceeds the ceiling, raises
    BudgetExceeded carrying the bound chain and a workable lambda, so
    callers can fall back to the truncated computation.
    """
    sizes = [h.bit_count() for h in hoods.hoods]
    n = len(sizes)
    n_max = max(sizes)
    bound_sum = sum(1 << s for s in sizes)
    bound_nmax = n * (1 << n_max)
    if bound_sum > ceiling:
        raise BudgetExceeded(bound_sum, bound_nmax, None, ceiling,
                             suggested_lambda=suggest_lambda(hoods, ceiling))
    maximal = _unique_maximal(hoods.hoods)
    members: set[int] = set()
    for hood in maximal:
        members.update(iter_subsets(hood))
    ordered = tuple(sorted(members, key=sort_key))
    return InteractionSet(members=ordered, maximal_hoods=tuple(maximal))


def moebius_transform(game, coalition: int, values: dict[int, float] | None = None) -> float:
    """Inclusion-exclusion sum m(S) = sum_{T subset S} (-1)^{|S|-|T|} nu(T).

    Reads nu from `values` when given (a missing subset is a caller
    bug), otherwise evaluates through the game's cache.
    """
    s = coalition.bit_count()
    total = 0.0
    if values is None:
        for sub in iter_subsets(coalition):
            term = game.evaluate(sub)
            total += term if (s - sub.bit_count()) % 2 == 0 else -term
        return total
    try:
        for sub in iter_subsets(coalition):
            term = values[sub]
            total += term if (s - sub.bit_count()) % 2 == 0 else -term
    except KeyError as exc:
        raise RuntimeError(
            f"internal error: subset {exc.args[0]!r} of {coalition:#x} was never evaluated") from exc
    return total


def _evaluate_all(game, coalitions) -> dict[int, float]:
    if hasattr(game, "evaluate_batch"):
        vals = game.evaluate_batch(coalitions)
    else:
        vals = [game.evaluate(t) for t in coalitions]
    return dict(zip(coalitions, vals))


def _check_readout(game) -> None:
    model = getattr(game, "model", None)
    if model is not None and getattr(model.readout, "kind", "linear") != "linear":
        raise NonlinearReadout(
            "the sparse computation is only exact for linear readouts; this model's "
            "readout is nonlinear and produces interactions outside the receptive "
            "fields (run the readout audit to quantify them)")


def _grand_value(game, n: int) -> float:
    # GraphGame knows its full-coalition value from construction; for
    # plain oracles, evaluate (and cache) the grand coalition.
    nu_full = getattr(game, "nu_full", None)
    if nu_full is not None:
        return nu_full
    return game.evaluate(full_mask(n))


def graphshapiq_exact(game, hoods: NeighborhoodIndex, k: int, index: str = "ksii",
                      ceiling: int = DEFAULT_CEILING,
                      ) -> tuple[InteractionValues, InteractionValues]:
    """Exact interactions from one game evaluation per non-trivial set.

    Evaluates nu on every member of the interaction set (and nothing
    else), computes the Moebius interactions there, and converts them to
    the requested index at order k. Interactions outside the set are
    exactly zero and never materialized.

    Returns (mi, si). Raises NonlinearReadout for mlp2 readouts and
    BudgetExceeded when the interaction set is too large.
    """
    from .convert import convert_mi

    _check_readout(game)
    n = len(hoods.hoods)
    if not 1 <= k <= n:
        raise ValueError(f"order k must be in 1..{n}, got {k}")
    iset = build_interaction_set(hoods, ceiling)
    values = _evaluate_all(game, list(iset.members))
    mi_values = {s: moebius_transform(None, s, values) for s in iset.members}
    calls = game.call_count() if hasattr(game, "call_count") else len(values)
    mi = InteractionValues(kind="mi", k=n, n=n, values=mi_values,
                           ell=hoods.ell, lam=None, call_count=calls)
    si = convert_mi(mi, index, k)
    return mi, si


def graphshapiq_approx(game, hoods: NeighborhoodIndex, lam: int, k: int,
                       index: str = "ksii",
                       ) -> tuple[InteractionValues, InteractionValues]:
    """Order-truncated interactions with an efficiency repair.

    Keeps interaction-set members of size at most lam, evaluates them
    plus each distinct oversized receptive field, and recovers one
    surrogate Moebius value per such field from the recovery identity.
    The largest field (ties: smallest bitmask) absorbs the remaining gap
    tau so the values sum to nu(N) exactly. Exact whenever
    lam >= n_max - 1.
    """
    from .convert import convert_mi

    _check_readout(game)
    n = len(hoods.hoods)
    if not 1 <= lam <= n:
        raise ValueError(f"lambda must be in 1..{n}, got {lam}")
    if not 1 <= k <= n:
        raise ValueError(f"order k must be in 1..{n}, got {k}")

    maximal = _unique_maximal(hoods.hoods)
    truncated: set[int] = set()
    for hood in maximal:
        nodes = list(iter_members(hood))
        for size in range(0, min(lam, len(nodes)) + 1):
            for combo in combinations(nodes, size):
                truncated.add(mask_of(combo))
    kept = sorted(truncated, key=sort_key)

    oversized = sorted({h for h in hoods.hoods if h.bit_count() > lam}, key=sort_key)

    values = _evaluate_all(game, kept + oversized)
    mi_hat = {s: moebius_transform(None, s, values) for s in kept}

    # Surrogate values for the oversized fields, smallest first: each one
    # takes whatever the recovery identity leaves unexplained by the
    # values assigned so far (truncated sets and smaller fields alike).
    for hood in oversized:
        explained = sum(v for t, v in mi_hat.items() if is_subset(t, hood))
        mi_hat[hood] = values[hood] - explained

    if oversized:
        top_size = max(h.bit_count() for h in oversized)
        star = min(h for h in oversized if h.bit_count() == top_size)
        tau = _grand_value(game, n) - sum(mi_hat.values())
        mi_hat[star] += tau

    calls = game.call_count() if hasattr(game, "call_count") else len(values)
    mi = InteractionValues(kind="mi", k=n, n=n, values=mi_hat,
                           ell=hoods.ell, lam=lam, call_count=calls)
    si = convert_mi(mi, index, k)
    return mi, si
