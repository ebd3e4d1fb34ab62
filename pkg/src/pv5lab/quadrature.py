"""Tanh-sinh quadrature at configurable precision, plus cached weight tables.

Two layers:

* ``integrate`` / ``moment`` - a generic double-exponential rule over the
  support intervals, for arbitrary integrands.  Each interval is refined by
  halving the trapezoid step until the last doubling changes the result by
  less than the requested relative tolerance.

* ``WeightTable`` - the shared engine behind the orthogonal-polynomial
  pipeline.  It caches, per refinement level, the mapped nodes together
  with the weight already folded into the quadrature coefficients, the
  stable products 1-y^2 and y^2-k2, the values v'(y), and (once the
  recurrence is frozen) the monic-polynomial rows.  Every inner product
  downstream is then a dot product over these arrays, and every integral
  still reports a doubling-based error estimate.

Node positions are generated from the closed forms 1 -+ x = 2/(e^{2v}+1),
2/(1+e^{-2v}) of the tanh map, so distances to interval endpoints are known
to full precision; node generation truncates 32 bits short of the working
precision so a mapped node can never collapse onto an endpoint.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from mpmath import mp

from .errors import NoConvergence, ParameterError
from .model import (GUARD_BITS, ModelParams, Support, gap_edge, support,
                    v_second, weight)

#: coarsest level at which an integral value is first formed
MIN_LEVEL = 3

#: node generation stops this many bits short of the working precision
_EDGE_MARGIN_BITS = 32


@dataclass(frozen=True)
class PrecisionContext:
    """Working mantissa bits, target relative error, and refinement cap."""

    bits: int = 256
    rel_tol: float = 1e-40
    max_level: int = 12

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 64 or self.bits > 4096:
            raise ParameterError(f"bits must be an integer in [64, 4096], got {self.bits!r}")
        if not MIN_LEVEL + 1 <= self.max_level <= 16:
            raise ParameterError(f"max_level must be in [{MIN_LEVEL + 1}, 16], got {self.max_level!r}")
        if not self.rel_tol > 0:
            raise ParameterError("rel_tol must be positive")
        if self.rel_tol < 2.0 ** (-self.bits + 16):
            raise ParameterError(
                f"rel_tol={self.rel_tol} below the floor 2^(-bits+16) for bits={self.bits}"
            )

    @property
    def work_bits(self) -> int:
        return self.bits + GUARD_BITS


@dataclass
class IntegralResult:
    """Value, doubling-based error estimate, convergence flag, top level used."""

    value: object
    error: object
    converged: bool
    levels: int

    def __iter__(self):
        return iter((self.value, self.error, self.converged, self.levels))


DEFAULT_CONTEXT = PrecisionContext()


@functools.lru_cache(maxsize=64)
def _ts_block(work_bits: int, level: int):
    """Positive-u tanh-sinh nodes first appearing at ``level`` (step 2^-level).

    Returns a tuple of (x, 1-x, 1+x, W) with x = tanh((pi/2) sinh u) and
    W = (pi/2) cosh(u) / cosh((pi/2) sinh u)^2; level 0 also contains the
    center node x = 0.  Negative-u nodes are mirror images and are expanded
    by the callers.
    """
    nodes = []
    with mp.workprec(work_bits + 16):
        h = mp.mpf(2) ** (-level)
        edge = mp.mpf(2) ** (-(work_bits - _EDGE_MARGIN_BITS))
        half_pi = mp.pi / 2
        j = 0 if level == 0 else 1
        step = 1 if level == 0 else 2
        while True:
            u = j * h
            v = half_pi * mp.sinh(u)
            e2v = mp.exp(2 * v)
            one_minus_x = 2 / (e2v + 1)
            if one_minus_x < edge:
                break
            one_plus_x = 2 / (1 + 1 / e2v)
            x = (e2v - 1) / (e2v + 1)
            w = half_pi * mp.cosh(u) / mp.cosh(v) ** 2
            nodes.append((x, one_minus_x, one_plus_x, w))
            j += step
    return tuple(nodes)


def integration_intervals(params: ModelParams):
    """Support intervals, with [-1,1] split at 0 when v' has its pole there.

    The split only happens for k2 = 0, t > 0: the weight is C-infinity but
    not analytic at 0, and endpoint clustering restores fast convergence.
    The reported ``support`` is unchanged; this is a quadrature detail.
    """
    sup = support(params)
    with mp.workprec(params.work_bits):
        if params.k2 == 0 and params.t > 0:
            one = mp.mpf(1)
            zero = mp.mpf(0)
            return ((-one, zero), (zero, one))
    return tuple(sup.intervals)


def _interval_series(f, a, b, ctx: PrecisionContext, scale=None):
    """Tanh-sinh level series for one interval; returns IntegralResult."""
    with mp.workprec(ctx.work_bits):
        a = mp.mpf(a)
        b = mp.mpf(b)
        if a == b:
            zero = mp.mpf(0)
            return IntegralResult(zero, zero, True, MIN_LEVEL)
        mid = (a + b) / 2
        half = (b - a) / 2
        block_sums = []
        abs_mass = mp.mpf(0)
        floor_eps = mp.mpf(2) ** (-(ctx.work_bits - 8))
        prev = None
        value = err = mp.mpf(0)
        for level in range(0, ctx.max_level + 1):
            s = mp.mpf(0)
            for x, _omx, _opx, w in _ts_block(ctx.work_bits, level):
                if x == 0:
                    fv = w * f(mid)
                else:
                    fv = w * (f(mid + half * x) + f(mid - half * x))
                s += fv
                abs_mass += abs(fv)
            block_sums.append(s)
            if level < MIN_LEVEL:
                continue
            step = mp.mpf(2) ** (-level)
            value = half * step * mp.fsum(block_sums)
            if prev is not None:
                floor = floor_eps * abs_mass * half * step
                err = max(abs(value - prev), floor)
                target = mp.mpf(ctx.rel_tol) * max(abs(value), mp.mpf(scale or 0))
                if err <= max(target, floor):
                    return IntegralResult(value, err, True, level)
            prev = value
        return IntegralResult(value, err, False, ctx.max_level)


def integrate(f, sup, ctx: PrecisionContext = DEFAULT_CONTEXT, scale=None) -> IntegralResult:
    """Integrate ``f`` over a ``Support`` (or iterable of (lo, hi) pairs).

    Never raises on slow convergence: the result carries ``converged`` and
    the summed per-interval error estimates, and callers decide.
    """
    intervals = sup.intervals if isinstance(sup, Support) else tuple(sup)
    with mp.workprec(ctx.work_bits):
        total = mp.mpf(0)
        err = mp.mpf(0)
        converged = True
        top = MIN_LEVEL
        for a, b in intervals:
            res = _interval_series(f, a, b, ctx, scale=scale)
            total += res.value
            err += res.error
            converged = converged and res.converged
            top = max(top, res.levels)
        return IntegralResult(total, err, converged, top)


def moment(j: int, params: ModelParams, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """mu_j = integral of z^j w(z); odd j returns exact 0 without integration."""
    if not isinstance(j, int) or j < 0:
        raise ParameterError(f"moment order must be an integer >= 0, got {j!r}")
    if j % 2 == 1:
        return mp.mpf(0)
    with mp.workprec(ctx.work_bits):
        if j == 0:
            f = lambda z: weight(z, params)
        else:
            f = lambda z: z ** j * weight(z, params)
        res = integrate(f, integration_intervals(params), ctx)
        if not res.converged:
            raise NoConvergence(
                f"moment {j} did not converge: estimate {mp.nstr(res.error, 6)}",
                value=res.value, error=res.error)
        return res.value


class WeightTable:
    """Cached per-level node data for one (params, ctx) pair.

    Arrays per level block (lists of mpf):

    ``y``     node positions over all integration intervals
    ``cw``    half-width * tanh-sinh weight * w(y); trapezoid step applied
              at summation time
    ``om2``   (1-y)(1+y), built from exact endpoint distances
    ``zk2``   y^2 - k2, built from the gap-edge distance when a gap is open
    ``vp``    v'(y) evaluated from om2/zk2 (no pole guard; the folded weight
              suppresses the near-edge blow-up)

    After ``freeze(beta)`` the monic rows P_n(y) and the folded products
    cw*P_n^2 and cw*P_n*P_{n-1} become available per degree.
    """

    def __init__(self, params: ModelParams, ctx: PrecisionContext):
        self.params = params
        self.ctx = ctx
        with mp.workprec(ctx.work_bits):
            self.intervals = integration_intervals(params)
        self.y = []
        self.cw = []
        self.om2 = []
        self.zk2 = []
        self.vp = []
        self._abs_mass = []  # per level: sum |cw|, for absolute error floors
        self.nlevels = 0
        self.beta = None
        self._rows = []  # [n][level] -> tuple of P_n values
        self._sq = {}
        self._adj = {}
        self._inv = {}  # "om2"/"zk2" -> per-level arrays of reciprocals
        self._dd = {}  # mpf z -> per-level arrays of divided differences
        self._vp_at = {}

    # ------------------------------------------------------------------
    # node generation

    def ensure_levels(self, upto: int):
        while self.nlevels <= upto:
            self._add_level(self.nlevels)

    def _add_level(self, level: int):
        params = self.params
        with mp.workprec(self.ctx.work_bits):
            alpha = params.alpha
            t = params.t
            k2 = params.k2
            rk = gap_edge(params) if k2 > 0 else None
            excess = (rk * rk - k2) if rk is not None else None
            ys, cws, om2s, zk2s, vps = [], [], [], [], []
            mass = mp.mpf(0)
            for a, b in self.intervals:
                mid = (a + b) / 2
                half = (b - a) / 2
                for x, omx, opx, wq in _ts_block(self.ctx.work_bits, level):
                    mirror = (1,) if x == 0 else (1, -1)
                    for sgn in mirror:
                        yv = mid + half * x if sgn > 0 else mid - half * x
                        d_lo = half * (opx if sgn > 0 else omx)  # y - a
                        d_hi = half * (omx if sgn > 0 else opx)  # b - y
                        # (1-y)(1+y) from whichever endpoint distances are exact
                        one_m = d_hi if b == 1 else 1 - yv
                        one_p = d_lo if a == -1 else 1 + yv
                        om2 = one_m * one_p
                        if rk is not None:
                            d_in = d_lo if a == rk else d_hi  # |y| - rk
                            zk2 = d_in * (abs(yv) + rk) + excess
                        else:
                            zk2 = yv * yv - k2
                        wv = om2 ** alpha if alpha != 0 else mp.mpf(1)
                        if t > 0:
                            wv = wv * mp.exp(-t / zk2)
                        cwv = half * wq * wv
                        vpv = 2 * alpha * yv / om2
                        if t > 0:
                            vpv = vpv - 2 * t * yv / (zk2 * zk2)
                        ys.append(yv)
                        cws.append(cwv)
                        om2s.append(om2)
                        zk2s.append(zk2)
                        vps.append(vpv)
                        mass += cwv
            self.y.append(ys)
            self.cw.append(cws)
            self.om2.append(om2s)
            self.zk2.append(zk2s)
            self.vp.append(vps)
            self._abs_mass.append(mass)
            self.nlevels = level + 1
            # keep every frozen cache aligned with the new block
            if self.beta is not None:
                self._extend_rows(level)
                for n in self._sq:
                    self._sq[n].append(
                        [c * p * p for c, p in zip(cws, self._rows[level][n])])
                for n in self._adj:
                    self._adj[n].append([
                        c * p * q for c, p, q in
                        zip(cws, self._rows[level][n], self._rows[level][n - 1])])
            for key in self._inv:
                src = self.om2 if key == "om2" else self.zk2
                self._inv[key].append([1 / v for v in src[level]])
            for z, arrs in self._dd.items():
                arrs.append(self._dd_block(z, level))

    # ------------------------------------------------------------------
    # frozen-recurrence rows

    def freeze(self, beta):
        """Attach recurrence coefficients; monic rows become available."""
        self.beta = tuple(beta)
        self._rows = []
        self._sq = {}
        self._adj = {}
        for level in range(self.nlevels):
            self._extend_rows(level)

    def _extend_rows(self, level: int):
        ys = self.y[level]
        with mp.workprec(self.ctx.work_bits):
            prev = [mp.mpf(0)] * len(ys)
            cur = [mp.mpf(1)] * len(ys)
            rows = [tuple(cur)]
            for n in range(len(self.beta) - 1):
                bn = self.beta[n]
                nxt = [y * c - bn * p for y, c, p in zip(ys, cur, prev)]
                prev, cur = cur, nxt
                rows.append(tuple(cur))
        if len(self._rows) <= level:
            self._rows.extend([None] * (level + 1 - len(self._rows)))
        self._rows[level] = rows

    def row(self, n: int, level: int):
        return self._rows[level][n]

    def sq(self, n: int):
        """Per-level arrays cw * P_n(y)^2."""
        if n not in self._sq:
            self._sq[n] = [
                [c * p * p for c, p in zip(self.cw[lv], self._rows[lv][n])]
                for lv in range(self.nlevels)
            ]
        return self._sq[n]

    def adj(self, n: int):
        """Per-level arrays cw * P_n(y) * P_{n-1}(y)."""
        if n not in self._adj:
            self._adj[n] = [
                [c * p * q for c, p, q in
                 zip(self.cw[lv], self._rows[lv][n], self._rows[lv][n - 1])]
                for lv in range(self.nlevels)
            ]
        return self._adj[n]

    def inv(self, key: str):
        """Per-level reciprocal arrays for 'om2' or 'zk2'."""
        if key not in ("om2", "zk2"):
            raise ParameterError(f"unknown reciprocal key {key!r}")
        if key not in self._inv:
            src = self.om2 if key == "om2" else self.zk2
            self._inv[key] = [[1 / v for v in src[lv]] for lv in range(self.nlevels)]
        return self._inv[key]

    def _dd_block(self, z, level: int):
        vpz = self._vp_at[z]
        guard = mp.mpf(10) ** (-(self.params.precision_bits / 8.0)) * (1 + abs(z))
        out = []
        for vpi, yi in zip(self.vp[level], self.y[level]):
            if abs(z - yi) <= guard:
                out.append(v_second(z, self.params))  # removable limit
            else:
                out.append((vpz - vpi) / (z - yi))
        return out

    def dd(self, z, vpz):
        """Per-level arrays of (v'(z) - v'(y)) / (z - y) for fixed z."""
        with mp.workprec(self.ctx.work_bits):
            z = mp.mpf(z)
        if z not in self._dd:
            self._vp_at[z] = vpz
            self._dd[z] = [self._dd_block(z, lv) for lv in range(self.nlevels)]
        return self._dd[z]

    # ------------------------------------------------------------------
    # integration

    def _series(self, factors):
        """Cumulative trapezoid values I(MIN_LEVEL..top) for a factor product."""
        partial = []
        for lv in range(self.nlevels):
            arrs = [fac[lv] for fac in factors]
            if len(arrs) == 1:
                partial.append(mp.fsum(arrs[0]))
            elif len(arrs) == 2:
                partial.append(mp.fdot(arrs[0], arrs[1]))
            else:
                prod = arrs[0]
                for extra in arrs[1:-1]:
                    prod = [p * e for p, e in zip(prod, extra)]
                partial.append(mp.fdot(prod, arrs[-1]))
        series = []
        for lv in range(MIN_LEVEL, self.nlevels):
            series.append(mp.mpf(2) ** (-lv) * mp.fsum(partial[: lv + 1]))
        return series

    def raw_integral(self, factors, scale=None, auto_extend=True) -> IntegralResult:
        """Integrate an elementwise product of per-level factor arrays.

        ``factors`` is a sequence of callables level->array or of per-level
        list structures owned by this table (``sq(n)``, ``inv('zk2')``, ...).
        Exactly one factor family must carry the folded cw weight.
        """
        with mp.workprec(self.ctx.work_bits):
            floor_eps = mp.mpf(2) ** (-(self.ctx.work_bits - 8))
            rel = mp.mpf(self.ctx.rel_tol)
            while True:
                mats = [fac() if callable(fac) else fac for fac in factors]
                series = self._series(mats)
                value = series[-1]
                if len(series) >= 2:
                    floor = floor_eps * self._abs_mass_total()
                    err = max(abs(series[-1] - series[-2]), floor)
                    target = max(rel * max(abs(value), mp.mpf(scale or 0)), floor)
                    if err <= target:
                        return IntegralResult(value, err, True, self.nlevels - 1)
                else:
                    err = abs(value)
                if auto_extend and self.nlevels <= self.ctx.max_level:
                    self.ensure_levels(self.nlevels)
                    continue
                return IntegralResult(value, err, False, self.nlevels - 1)

    def _abs_mass_total(self):
        return mp.fsum(self._abs_mass) * mp.mpf(2) ** (-(self.nlevels - 1))

    def node_count(self):
        return sum(len(b) for b in self.y)
