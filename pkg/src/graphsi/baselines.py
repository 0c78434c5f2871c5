"""Exhaustive oracles, permutation-sampling estimators, and the readout audit.

The brute-force routines are deliberately plain: they follow the
defining sums term by term over the full power set so they can serve as
ground truth for everything else. The samplers draw discrete
derivatives with the exact Shapley distribution over predecessor sets;
budgets count nominal evaluations under the documented schedule while
actual model calls still dedupe through the game cache.
"""

from __future__ import annotations

from itertools import combinations
from math import comb, factorial, inf, sqrt

import numpy as np

from .coalitions import full_mask, iter_members, iter_subsets, mask_of, sort_key
from .graph import Graph, khop_neighborhoods
from .interactions import InteractionSet, InteractionValues
from .moebius import build_interaction_set, moebius_transform

BRUTE_FORCE_MI_MAX = 16
BRUTE_FORCE_SI_MAX = 14


def _rng(seed: int) -> np.random.Generator:
    # counter-based generator: replicates across platforms for a fixed seed
    return np.random.Generator(np.random.Philox(seed))


def _all_values(game, n: int) -> dict[int, float]:
    masks = list(range(1 << n))
    if hasattr(game, "evaluate_batch"):
        return dict(zip(masks, game.evaluate_batch(masks)))
    return {t: game.evaluate(t) for t in masks}


def discrete_derivative(values: dict[int, float], s_mask: int, t_mask: int) -> float:
    """Delta_S(T) = sum_{L subset S} (-1)^{|S|-|L|} nu(T u L); T disjoint from S."""
    s = s_mask.bit_count()
    total = 0.0
    for sub in iter_subsets(s_mask):
        term = values[t_mask | sub]
        total += term if (s - sub.bit_count()) % 2 == 0 else -term
    return total


def brute_force_mi(game, n: int) -> InteractionValues:
    """Exact Moebius interactions of every subset, by inclusion-exclusion."""
    if n > BRUTE_FORCE_MI_MAX:
        raise ValueError(f"brute-force MI is capped at n={BRUTE_FORCE_MI_MAX}, got {n}")
    values = _all_values(game, n)
    mi = {s: moebius_transform(None, s, values) for s in range(1 << n)}
    return InteractionValues(kind="mi", k=n, n=n, values=mi,
                             call_count=_maybe_calls(game))


def brute_force_sv(game, n: int) -> InteractionValues:
    """Shapley values by the weighted marginal-contribution sum."""
    if n > BRUTE_FORCE_SI_MAX:
        raise ValueError(f"brute force is capped at n={BRUTE_FORCE_SI_MAX}, got {n}")
    values = _all_values(game, n)
    fact = [factorial(j) for j in range(n + 1)]
    out: dict[int, float] = {}
    for i in range(n):
        rest = full_mask(n) & ~(1 << i)
        total = 0.0
        for t in iter_subsets(rest):
            size = t.bit_count()
            weight = fact[size] * fact[n - size - 1] / fact[n]
            total += weight * (values[t | (1 << i)] - values[t])
        out[1 << i] = total
    return InteractionValues(kind="sv", k=1, n=n, values=out,
                             call_count=_maybe_calls(game))


def brute_force_sii(game, n: int, k: int) -> InteractionValues:
    """Shapley interaction index for every set of size 1..k, by definition."""
    if n > BRUTE_FORCE_SI_MAX:
        raise ValueError(f"brute force is capped at n={BRUTE_FORCE_SI_MAX}, got {n}")
    values = _all_values(game, n)
    fact = [factorial(j) for j in range(n + 1)]
    out: dict[int, float] = {}
    grand = full_mask(n)
    for size in range(1, k + 1):
        for combo in combinations(range(n), size):
            s_mask = mask_of(combo)
            rest = grand & ~s_mask
            total = 0.0
            for t in iter_subsets(rest):
                tsize = t.bit_count()
                weight = fact[tsize] * fact[n - tsize - size] / fact[n - size + 1]
                total += weight * discrete_derivative(values, s_mask, t)
            out[s_mask] = total
    return InteractionValues(kind="sii", k=k, n=n, values=out,
                             call_count=_maybe_calls(game))


def brute_force_stii(game, n: int, k: int) -> InteractionValues:
    """Shapley-Taylor interactions by definition: Moebius values below the
    top order, the weighted discrete-derivative sum at order k."""
    if n > BRUTE_FORCE_SI_MAX:
        raise ValueError(f"brute force is capped at n={BRUTE_FORCE_SI_MAX}, got {n}")
    values = _all_values(game, n)
    out: dict[int, float] = {}
    grand = full_mask(n)
    for size in range(1, k):
        for combo in combinations(range(n), size):
            s_mask = mask_of(combo)
            out[s_mask] = moebius_transform(None, s_mask, values)
    for combo in combinations(range(n), k):
        s_mask = mask_of(combo)
        rest = grand & ~s_mask
        total = 0.0
        for t in iter_subsets(rest):
            total += discrete_derivative(values, s_mask, t) / comb(n - 1, t.bit_count())
        out[s_mask] = total * k / n
    return InteractionValues(kind="stii", k=k, n=n, values=out,
                             call_count=_maybe_calls(game))


def permutation_sampling_sv(game, budget: int, seed: int,
                            ) -> tuple[InteractionValues, dict[int, float]]:
    """Castro-style Shapley value estimator.

    Walks random permutations from the empty set to the grand coalition;
    each player's estimate is the mean of its marginal contributions.
    A full permutation is charged n+1 nominal evaluations; a new one
    starts only while the budget allows it.

    Returns (estimates, stderr map). Fixed seed, fixed output.
    """
    n = game.n_players
    if budget < n + 1:
        raise ValueError(f"budget must be at least n+1 = {n + 1}, got {budget}")
    rng = _rng(seed)
    sums = np.zeros(n)
    squares = np.zeros(n)
    rounds = 0
    spent = 0
    while spent + n + 1 <= budget:
        spent += n + 1
        order = rng.permutation(n)
        prefix = 0
        before = game.evaluate(prefix)
        for player in order:
            prefix |= 1 << int(player)
            after = game.evaluate(prefix)
            delta = after - before
            sums[player] += delta
            squares[player] += delta * delta
            before = after
        rounds += 1
    means = sums / rounds
    stderr: dict[int, float] = {}
    for i in range(n):
        if rounds >= 2:
            var = (squares[i] - rounds * means[i] ** 2) / (rounds - 1)
            stderr[i] = sqrt(max(var, 0.0) / rounds)
        else:
            stderr[i] = inf
    values = {1 << i: float(means[i]) for i in range(n)}
    iv = InteractionValues(kind="sv", k=1, n=n, values=values,
                           call_count=_maybe_calls(game))
    return iv, stderr


def permutation_sampling_sii(game, k: int, budget: int, seed: int,
                             informed: InteractionSet | None = None) -> InteractionValues:
    """Sampled Shapley interaction index for every set of size 1..k.

    Per target set S, one draw samples a predecessor set T with the
    exact SII distribution (uniform size, then uniform set of that size
    from the non-members) and evaluates the discrete derivative, at a
    nominal cost of 2^|S|. Draws go round-robin over target sets in
    canonical order until the next draw would exceed the budget.

    With `informed`, sets outside it are never sampled and are reported
    as exact zeros, so the whole budget goes to the survivors.
    """
    n = game.n_players
    if k < 1:
        raise ValueError(f"order k must be >= 1, got {k}")
    targets: list[int] = []
    zeros: list[int] = []
    for size in range(1, k + 1):
        for combo in combinations(range(n), size):
            s_mask = mask_of(combo)
            if informed is not None and s_mask not in informed:
                zeros.append(s_mask)
            else:
                targets.append(s_mask)
    targets.sort(key=sort_key)
    round_cost = sum(1 << t.bit_count() for t in targets)
    if targets and budget < round_cost:
        raise ValueError(
            f"budget {budget} cannot afford one draw per target set (needs {round_cost})")

    rng = _rng(seed)
    sums = {s: 0.0 for s in targets}
    draws = {s: 0 for s in targets}
    spent = 0
    position = 0
    while targets:
        s_mask = targets[position]
        cost = 1 << s_mask.bit_count()
        if spent + cost > budget:
            break
        spent += cost
        others = np.array([i for i in range(n) if not s_mask & (1 << i)], dtype=np.int64)
        t_size = int(rng.integers(0, len(others) + 1))
        t_mask = mask_of(int(j) for j in rng.permutation(others)[:t_size])
        values = {t_mask | sub: game.evaluate(t_mask | sub)
                  for sub in iter_subsets(s_mask)}
        sums[s_mask] += discrete_derivative(values, s_mask, t_mask)
        draws[s_mask] += 1
        position = (position + 1) % len(targets)

    out = {s: (sums[s] / draws[s] if draws[s] else 0.0) for s in targets}
    for s in zeros:
        out[s] = 0.0
    return InteractionValues(kind="sii", k=k, n=n, values=out,
                             call_count=_maybe_calls(game))


def audit_nonlinear_readout(model_linear, model_mlp2, g: Graph,
                            baseline=None) -> dict:
    """Largest Moebius interaction outside the receptive-field family,
    for a linear-readout model and an mlp2-readout sibling.

    The linear model's off-family mass must vanish (< 1e-8); the mlp2
    model's mass is the reported finding, with no threshold.
    """
    from .game import GraphGame

    if g.n > BRUTE_FORCE_SI_MAX:
        raise ValueError(f"audit is capped at n={BRUTE_FORCE_SI_MAX}, got {g.n}")
    if model_linear.num_layers != model_mlp2.num_layers:
        raise ValueError("models must share the conv layer count")
    ell = model_linear.num_layers
    hoods = khop_neighborhoods(g, ell)
    iset = build_interaction_set(hoods)

    report: dict = {"n": g.n, "ell": ell, "interaction_set_size": len(iset)}
    for label, model in (("linear", model_linear), ("mlp2", model_mlp2)):
        game = GraphGame(model, g, baseline=baseline)
        mi = brute_force_mi(game, g.n)
        off = max((abs(v) for s, v in mi.values.items() if s not in iset), default=0.0)
        report[f"max_abs_mi_outside_{label}"] = off
    report["linear_ok"] = report["max_abs_mi_outside_linear"] < 1e-8
    return report


def _maybe_calls(game):
    return game.call_count() if hasattr(game, "call_count") else None
