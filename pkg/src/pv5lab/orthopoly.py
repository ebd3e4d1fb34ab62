"""Monic orthogonal polynomials for the deformed weight.

The even weight gives the three-term recurrence

    z P_n(z) = P_{n+1}(z) + beta_n P_{n-1}(z),      beta_0 P_{-1} := 0,

with no z P_n cross term.  ``build`` runs the Stieltjes procedure: the
squared norms h_n = <P_n, P_n> come from quadrature, beta_n = h_n/h_{n-1},
and the sub-leading coefficients p(n) (coefficient of z^{n-2} in P_n)
follow the exact recursion p(n+1) = p(n) - beta_n with p(0) = p(1) = 0.
The refinement level is raised until the whole h-array is stable to the
context's relative tolerance between consecutive doublings.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

from mpmath import mp

from .errors import NoConvergence, ParameterError, PrecisionExhausted
from .model import ModelParams
from .quadrature import MIN_LEVEL, PrecisionContext, WeightTable


@dataclass(eq=False)
class OrthoState:
    """Frozen output of ``build``; shared, never mutated.

    h[n] and beta[n] cover 0..n_max (beta[0] = 0 by convention); p_sub[n]
    covers 0..n_max+1.  ``symmetry_diag`` is max_n |<z P_n, P_n>| / h_n, a
    measure of how well the quadrature preserves the even symmetry.
    """

    params: ModelParams
    h: tuple
    beta: tuple
    p_sub: tuple
    symmetry_diag: object
    level: int
    h_error: tuple
    table: WeightTable = field(repr=False)

    @property
    def n_max(self) -> int:
        return self.params.n_max


def _stieltjes_pass(table: WeightTable, level: int, n_max: int):
    """One full recurrence sweep using nodes up to ``level``.

    Returns (h, beta, sym) where sym is the worst odd-moment leak.
    """
    step = mp.mpf(2) ** (-level)
    blocks = range(level + 1)
    ys = [table.y[lv] for lv in blocks]
    cws = [table.cw[lv] for lv in blocks]
    prev = [[mp.mpf(0)] * len(table.y[lv]) for lv in blocks]
    cur = [[mp.mpf(1)] * len(table.y[lv]) for lv in blocks]
    h = []
    beta = [mp.mpf(0)]
    sym = mp.mpf(0)
    for n in range(n_max + 1):
        cw_cur = [[c * p for c, p in zip(cws[lv], cur[lv])] for lv in blocks]
        hn = step * mp.fsum(mp.fdot(cw_cur[lv], cur[lv]) for lv in blocks)
        if not mp.isfinite(hn) or hn <= 0:
            raise PrecisionExhausted(
                f"norm h_{n} = {hn} at level {level}; no significant digits left")
        cross = step * mp.fsum(
            mp.fdot(cw_cur[lv], [y * p for y, p in zip(ys[lv], cur[lv])])
            for lv in blocks)
        sym = max(sym, abs(cross) / hn)
        h.append(hn)
        if n >= 1:
            beta.append(h[n] / h[n - 1])
        if n < n_max:
            bn = beta[n] if n >= 1 else mp.mpf(0)
            nxt = [
                [y * c - bn * p for y, c, p in zip(ys[lv], cur[lv], prev[lv])]
                for lv in blocks
            ]
            prev, cur = cur, nxt
    return h, beta, sym


def _build_impl(params: ModelParams, ctx: PrecisionContext) -> OrthoState:
    with mp.workprec(ctx.work_bits):
        table = WeightTable(params, ctx)
        table.ensure_levels(MIN_LEVEL)
        rel = mp.mpf(ctx.rel_tol)
        prev_h = None
        h = beta = sym = None
        h_err = None
        for level in range(MIN_LEVEL, ctx.max_level + 1):
            table.ensure_levels(level)
            h, beta, sym = _stieltjes_pass(table, level, params.n_max)
            if prev_h is not None:
                h_err = tuple(abs(a - b) / a for a, b in zip(h, prev_h))
                if max(h_err) <= rel:
                    break
            prev_h = h
        else:
            raise NoConvergence(
                f"recurrence build not stable at level {ctx.max_level} "
                f"(worst relative change {mp.nstr(max(h_err), 6)})",
                value=None, error=max(h_err))
        p_sub = [mp.mpf(0), mp.mpf(0)]
        for n in range(1, params.n_max + 1):
            p_sub.append(p_sub[n] - beta[n])
        table.freeze(beta)
        return OrthoState(
            params=params,
            h=tuple(h),
            beta=tuple(beta),
            p_sub=tuple(p_sub),
            symmetry_diag=sym,
            level=table.nlevels - 1,
            h_error=h_err,
            table=table,
        )


@functools.lru_cache(maxsize=6)
def _build_cached(params: ModelParams, ctx: PrecisionContext) -> OrthoState:
    return _build_impl(params, ctx)


def build(params: ModelParams, ctx: PrecisionContext) -> OrthoState:
    """Stieltjes procedure for (h_n, beta_n, p(n)) up to params.n_max.

    Results are cached per (params, ctx); states are immutable and safe
    to share.
    """
    return _build_cached(params, ctx)


def eval_monic(state: OrthoState, n: int, z):
    """P_n(z) by forward recurrence; leading coefficient exactly 1."""
    if not 0 <= n <= state.n_max:
        raise IndexError(f"degree {n} outside [0, {state.n_max}]")
    with mp.workprec(state.params.work_bits):
        z = mp.mpf(z)
        pm1, p = mp.mpf(0), mp.mpf(1)
        for j in range(n):
            pm1, p = p, z * p - state.beta[j] * pm1
        return p


def eval_monic_derivative(state: OrthoState, n: int, z):
    """P_n'(z) via the differentiated recurrence."""
    if not 0 <= n <= state.n_max:
        raise IndexError(f"degree {n} outside [0, {state.n_max}]")
    with mp.workprec(state.params.work_bits):
        z = mp.mpf(z)
        pm1, p = mp.mpf(0), mp.mpf(1)
        dm1, d = mp.mpf(0), mp.mpf(0)
        for j in range(n):
            dm1, d = d, p + z * d - state.beta[j] * dm1
            pm1, p = p, z * p - state.beta[j] * pm1
        return d


def orthogonality_residual(state: OrthoState, ctx: PrecisionContext, m: int, n: int):
    """|<P_m, P_n>| / sqrt(h_m h_n) for m != n.

    Odd m+n is an odd integrand and short-circuits to exact 0.
    """
    if m == n:
        raise ParameterError("orthogonality residual needs m != n")
    if not (0 <= m <= state.n_max and 0 <= n <= state.n_max):
        raise IndexError(f"degrees ({m}, {n}) outside [0, {state.n_max}]")
    if (m + n) % 2 == 1:
        return mp.mpf(0)
    with mp.workprec(ctx.work_bits):
        table = state.table
        norm = mp.sqrt(state.h[m] * state.h[n])
        res = table.raw_integral(
            [lambda: table.cw,
             lambda: [table.row(m, lv) for lv in range(table.nlevels)],
             lambda: [table.row(n, lv) for lv in range(table.nlevels)]],
            scale=norm)
        return abs(res.value) / norm
