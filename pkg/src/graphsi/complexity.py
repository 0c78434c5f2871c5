"""Pre-flight call estimation and dataset-scale scaling studies.

Everything here works from neighborhood sizes alone, so arbitrary node
counts are fine; nothing ever touches a model. Bounds are reported with
saturated arithmetic: anything beyond 2^63-1 becomes an explicit marker
instead of a silently huge number.
"""

from __future__ import annotations

import csv
import io
import math
from typing import NamedTuple

from .graph import Graph, graph_stats, khop_neighborhoods
from .moebius import _unique_maximal

SATURATION_LIMIT = 2 ** 63 - 1
SATURATED = "saturated"
NOT_ENUMERATED = "not enumerated"
INAPPLICABLE = "inapplicable"

# enumeration cutoff on the largest neighborhood size; beyond it the
# bound stands in for the exact count so scaling tables stay comparable
# with the usual experimental convention
ENUMERATION_MAX_HOOD = 23

# recursion-step allowance for the exact interaction-set count; graphs
# whose receptive fields overlap too intricately fall back to the bounds
COUNT_STEP_BUDGET = 200_000


class _OutOfSteps(Exception):
    pass


def _union_powerset_size(masks: list[int], steps: list[int]) -> int:
    """|P(m_1) u ... u P(m_k)| for mutually incomparable masks, counted
    without materializing any subset.

    Sequential difference: mask i contributes 2^|m_i| minus whatever it
    shares with earlier masks, and the shared part is again a union of
    power sets over the pairwise intersections (strictly smaller, so the
    recursion terminates). The empty set is shared by every pair, which
    the zero mask accounts for.
    """
    total = 0
    for i, h in enumerate(masks):
        steps[0] -= 1
        if steps[0] < 0:
            raise _OutOfSteps
        shared = [x for x in (h & masks[j] for j in range(i)) if x]
        if shared:
            overlap = _union_powerset_size(_unique_maximal(shared), steps)
        elif i:
            overlap = 1  # only the empty set
        else:
            overlap = 0
        total += (1 << h.bit_count()) - overlap
    return total


def count_interaction_set(maximal_hoods: list[int],
                          step_budget: int = COUNT_STEP_BUDGET) -> int | None:
    """Exact |I| from the maximal receptive fields, or None if counting
    would exceed step_budget recursion steps."""
    try:
        return _union_powerset_size(maximal_hoods, [step_budget])
    except _OutOfSteps:
        return None


class CallEstimate(NamedTuple):
    exact_I: int | str  # exact interaction-set size, or "not enumerated"
    bound_sum: int | str  # sum_i 2^|N_i|
    bound_nmax: int | str  # n * 2^n_max
    bound_dmax: int | str  # n * 2^((d_max^(ell+1)-1)/(d_max-1)), or "inapplicable"


def _saturate(value: int) -> int | str:
    return value if value <= SATURATION_LIMIT else SATURATED


def _pow2_times(n: int, exponent: int) -> int | str:
    if exponent > 63 or n << exponent > SATURATION_LIMIT:
        return SATURATED
    return n << exponent


def estimate_calls(g: Graph, ell: int) -> CallEstimate:
    """The full complexity bound chain for an exact run on g at range ell.

    exact_I is counted combinatorially from the maximal receptive fields
    when the largest neighborhood has at most 23 members; larger
    receptive fields, or overlap structure that defeats the counting
    budget, fall back to the bound chain.
    """
    hoods = khop_neighborhoods(g, ell)
    sizes = [h.bit_count() for h in hoods.hoods]
    n = g.n
    n_max = max(sizes)
    d_max = max(g.degree(i) for i in range(n))

    if n_max > 63:
        bound_sum: int | str = SATURATED
    else:
        bound_sum = _saturate(sum(1 << s for s in sizes))
    bound_nmax = _pow2_times(n, n_max)

    if d_max <= 1:
        bound_dmax: int | str = INAPPLICABLE
    else:
        bound_dmax = _pow2_times(n, (d_max ** (ell + 1) - 1) // (d_max - 1))

    if n_max > ENUMERATION_MAX_HOOD:
        counted = None
    else:
        counted = count_interaction_set(_unique_maximal(hoods.hoods))
    exact: int | str = NOT_ENUMERATED if counted is None else counted
    return CallEstimate(exact, bound_sum, bound_nmax, bound_dmax)


def _row_calls(est: CallEstimate) -> tuple[int | str, bool]:
    """(calls, is_exact) for one study row: the exact count when
    enumerated, else the tightest available bound."""
    if isinstance(est.exact_I, int):
        return est.exact_I, True
    for bound in (est.bound_sum, est.bound_nmax, est.bound_dmax):
        if isinstance(bound, int):
            return bound, False
    return SATURATED, False


def _fit_log_linear(xs: list[float], ys: list[float]) -> dict:
    """Least-squares line with R^2; degenerate inputs are flagged, not fit."""
    count = len(xs)
    fit = {"count": count, "slope": None, "intercept": None,
           "r2": None, "degenerate": True}
    if count < 2:
        return fit
    mean_x = sum(xs) / count
    mean_y = sum(ys) / count
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        return fit
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = cov / var_x
    fit.update(slope=slope, intercept=mean_y - slope * mean_x,
               r2=cov * cov / (var_x * var_y), degenerate=False)
    return fit


def scaling_study(graphs: list[Graph], ell_values: list[int], out=None,
                  ids: list[str] | None = None) -> tuple[list[dict], dict[int, dict]]:
    """One row per (graph, ell) plus a log-linear fit per ell.

    Rows carry graph_id, n, ell, calls, is_exact, density and the
    saving over the full power set in log10 units. The fit regresses
    log10(calls) on n; a zero-variance column makes it degenerate.
    When `out` is a path or file object, rows are written there as CSV.
    """
    if ids is None:
        ids = [str(i) for i in range(len(graphs))]
    rows: list[dict] = []
    for graph_id, g in zip(ids, graphs):
        for ell in ell_values:
            est = estimate_calls(g, ell)
            calls, is_exact = _row_calls(est)
            _, _, density = graph_stats(g, ell)
            if isinstance(calls, int):
                speedup = g.n * math.log10(2.0) - math.log10(calls)
            else:
                speedup = None
            rows.append({"graph_id": graph_id, "n": g.n, "ell": ell,
                         "calls": calls, "is_exact": is_exact,
                         "density": density, "speedup_log10": speedup})

    fits: dict[int, dict] = {}
    for ell in ell_values:
        pts = [(r["n"], math.log10(r["calls"])) for r in rows
               if r["ell"] == ell and isinstance(r["calls"], int)]
        fits[ell] = _fit_log_linear([p[0] for p in pts], [p[1] for p in pts])

    if out is not None:
        _write_csv(rows, out)
    return rows, fits


def _write_csv(rows: list[dict], out) -> None:
    from .export import format_float, atomic_write_text

    def render(buf) -> None:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["graph_id", "n", "ell", "calls", "is_exact",
                         "density", "speedup_log10"])
        for r in rows:
            writer.writerow([
                r["graph_id"], r["n"], r["ell"], r["calls"],
                "true" if r["is_exact"] else "false",
                format_float(r["density"]),
                "" if r["speedup_log10"] is None else format_float(r["speedup_log10"]),
            ])

    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        buf = io.StringIO()
        render(buf)
        atomic_write_text(out, buf.getvalue())
    else:
        render(out)
