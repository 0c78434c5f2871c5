"""Error types shared across the package."""

from __future__ import annotations


class ParseError(ValueError):
    """Malformed input: graph file, weights file, or config."""


class BudgetExceeded(RuntimeError):
    """Exact interaction-set enumeration would exceed the evaluation ceiling.

    Carries the complexity bound chain so callers can report it and fall
    back to a truncated-order approximation.
    """

    def __init__(self, bound_sum: int, bound_nmax: int, bound_dmax,
                 ceiling: int, suggested_lambda: int | None = None):
        self.bound_sum = bound_sum
        self.bound_nmax = bound_nmax
        self.bound_dmax = bound_dmax  # None when d_max <= 1
        self.ceiling = ceiling
        self.suggested_lambda = suggested_lambda
        chain = f"sum_i 2^|N_i| = {bound_sum} <= n*2^n_max = {bound_nmax}"
        if bound_dmax is not None:
            chain += f" <= degree bound = {bound_dmax}"
        msg = f"evaluation budget exceeded: {chain} > ceiling {ceiling}"
        if suggested_lambda is not None:
            msg += f"; try --lambda {suggested_lambda}"
        super().__init__(msg)


class NonlinearReadout(RuntimeError):
    """Exact sparse computation requested on a model whose readout is not linear."""
