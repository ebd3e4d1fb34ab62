"""The deformed even Jacobi weight, its support, and its log-derivative.

The weight is

    w(z) = (1 - z^2)^alpha * exp(-t / (z^2 - k2)),    z in [-1, 1],

with alpha >= 0, t >= 0 and k2 < 1.  For k2 > 0 and t > 0 the exponential
factor diverges on (-sqrt(k2), sqrt(k2)); there the weight is defined to be
identically zero.  Approaching +-sqrt(k2) from outside, the factor vanishes
together with all its derivatives, so the weight is continuous on [-1, 1]
and every integration by parts over the support is free of boundary terms.
At t = 0 the exponential factor is dropped entirely and the weight is the
plain (1 - z^2)^alpha on [-1, 1] for any k2.

k2 < 0 is allowed and gives a smooth strictly positive deformation on all
of [-1, 1]; every downstream formula is rational in k2, so this serves as a
regular control case.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp

from .errors import (
    AlphaOutOfRange,
    DomainError,
    K2OutOfRange,
    NegativeT,
    ParameterError,
    PoleError,
)

#: extra mantissa bits carried by every internal computation
GUARD_BITS = 64


@dataclass(frozen=True)
class ModelParams:
    """One weight instance: (alpha, k2, t) plus working precision and degree cap."""

    alpha: object  # mp.mpf
    k2: object  # mp.mpf
    t: object  # mp.mpf
    precision_bits: int
    n_max: int

    @property
    def work_bits(self) -> int:
        return self.precision_bits + GUARD_BITS

    @property
    def ladder_eligible(self) -> bool:
        """Endpoint vanishing needed by the ladder derivation: alpha > 0."""
        return self.alpha > 0

    @property
    def has_gap(self) -> bool:
        return self.k2 > 0 and self.t > 0

    def __repr__(self):  # keep mpf noise out of test output
        return (
            f"ModelParams(alpha={mp.nstr(self.alpha, 12)}, k2={mp.nstr(self.k2, 12)}, "
            f"t={mp.nstr(self.t, 12)}, bits={self.precision_bits}, n_max={self.n_max})"
        )


@dataclass(frozen=True)
class Support:
    """Ordered, disjoint closed intervals carrying the weight's mass."""

    intervals: tuple

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)


def validate(alpha, k2, t, precision_bits=256, n_max=12) -> ModelParams:
    """Validate raw inputs and return frozen ``ModelParams``.

    alpha = 0 is accepted (moment-only use; the params are flagged
    ladder-ineligible), alpha < 0 is rejected.  Nothing is clamped.
    """
    if not isinstance(precision_bits, int) or precision_bits < 64:
        raise ParameterError(f"precision_bits must be an integer >= 64, got {precision_bits!r}")
    if precision_bits > 4096:
        raise ParameterError("precision_bits above 4096 is not supported")
    if not isinstance(n_max, int) or n_max < 1:
        raise ParameterError(f"n_max must be an integer >= 1, got {n_max!r}")
    with mp.workprec(precision_bits + GUARD_BITS):
        alpha = mp.mpf(alpha)
        k2 = mp.mpf(k2)
        t = mp.mpf(t)
        if not mp.isfinite(alpha) or alpha < 0:
            raise AlphaOutOfRange(f"alpha must be finite and >= 0, got {alpha}")
        if not mp.isfinite(k2) or k2 >= 1:
            raise K2OutOfRange(f"k2 must be finite and < 1, got {k2}")
        if not mp.isfinite(t) or t < 0:
            raise NegativeT(f"t must be finite and >= 0, got {t}")
    return ModelParams(alpha=alpha, k2=k2, t=t, precision_bits=precision_bits, n_max=n_max)


def gap_edge(params: ModelParams):
    """Inner support edge sqrt(k2), rounded up so gap_edge**2 >= k2 exactly.

    The upward nudge (a few ulps at working precision) keeps z^2 - k2
    provably nonnegative on the support, so the exponential factor can
    never blow up through rounding of the cancellation z^2 - k2.
    """
    if params.k2 <= 0:
        raise ParameterError("gap_edge is defined only for k2 > 0")
    with mp.workprec(params.work_bits):
        rk = mp.sqrt(params.k2)
        bump = 1 + mp.mpf(2) ** (2 - params.work_bits)
        while rk * rk < params.k2:
            rk = rk * bump
        return rk


def support(params: ModelParams) -> Support:
    """Support of the weight: [-1,1], or two intervals when a gap is open."""
    with mp.workprec(params.work_bits):
        one = mp.mpf(1)
        if params.has_gap:
            rk = gap_edge(params)
            return Support(((-one, -rk), (rk, one)))
        return Support(((-one, one),))


def _z2_minus_k2(z, params):
    """z^2 - k2, computed without sign-flipping cancellation near the gap edge."""
    if params.k2 <= 0:
        return z * z - params.k2
    rk = gap_edge(params)
    m = abs(z)
    # (m - rk)(m + rk) + (rk^2 - k2); both addends >= 0 outside the gap
    return (m - rk) * (m + rk) + (rk * rk - params.k2)


def weight(z, params: ModelParams):
    """w(z); exactly 0 on the closed gap [-sqrt(k2), sqrt(k2)] when open."""
    with mp.workprec(params.work_bits):
        z = mp.mpf(z)
        if abs(z) > 1:
            raise DomainError(f"weight is defined on [-1, 1], got z={z}")
        one_minus = (1 - z) * (1 + z)
        if params.has_gap:
            if abs(z) <= gap_edge(params):
                return mp.mpf(0)
        value = one_minus ** params.alpha if params.alpha != 0 else mp.mpf(1)
        if params.t > 0:
            den = _z2_minus_k2(z, params)
            if den == 0:
                return mp.mpf(0)  # one-sided limit at the gap edge (k2 = 0, z = 0)
            value = value * mp.exp(-params.t / den)
        return value


def _pole_guard(params: ModelParams):
    # relative exclusion radius around the poles of v'(z)
    return mp.mpf(10) ** (-(params.precision_bits / 8.0))


def v_prime(z, params: ModelParams):
    """v'(z) for v = -ln w:  2*alpha*z/(1-z^2) - 2*t*z/(z^2-k2)^2."""
    with mp.workprec(params.work_bits):
        z = mp.mpf(z)
        g = _pole_guard(params)
        if abs(1 - z) < g or abs(1 + z) < g:
            raise PoleError(f"z={z} within the guard radius of +-1")
        value = 2 * params.alpha * z / ((1 - z) * (1 + z))
        if params.t > 0:
            if params.k2 > 0:
                rk = gap_edge(params)
                if abs(abs(z) - rk) < g * (1 + rk):
                    raise PoleError(f"z={z} within the guard radius of +-sqrt(k2)")
            elif params.k2 == 0 and abs(z) < g:
                raise PoleError("z=0 is a pole of v' when k2 = 0 and t > 0")
            den = _z2_minus_k2(z, params)
            value = value - 2 * params.t * z / (den * den)
        return value


def v_second(z, params: ModelParams):
    """v''(z) = 2*alpha*(1+z^2)/(1-z^2)^2 + 2*t*(3*z^2+k2)/(z^2-k2)^3."""
    with mp.workprec(params.work_bits):
        z = mp.mpf(z)
        g = _pole_guard(params)
        if abs(1 - z) < g or abs(1 + z) < g:
            raise PoleError(f"z={z} within the guard radius of +-1")
        one_minus = (1 - z) * (1 + z)
        value = 2 * params.alpha * (1 + z * z) / (one_minus * one_minus)
        if params.t > 0:
            if params.k2 > 0:
                rk = gap_edge(params)
                if abs(abs(z) - rk) < g * (1 + rk):
                    raise PoleError(f"z={z} within the guard radius of +-sqrt(k2)")
            elif params.k2 == 0 and abs(z) < g:
                raise PoleError("z=0 is a pole of v'' when k2 = 0 and t > 0")
            den = _z2_minus_k2(z, params)
            value = value + 2 * params.t * (3 * z * z + params.k2) / (den * den * den)
        return value


def dd_quotient(z, y, params: ModelParams):
    """(v'(z) - v'(y)) / (z - y), with the removable limit v''(z) at z = y."""
    with mp.workprec(params.work_bits):
        z = mp.mpf(z)
        y = mp.mpf(y)
        if abs(z - y) <= _pole_guard(params) * (1 + max(abs(z), abs(y))):
            return v_second(z, params)
        return (v_prime(z, params) - v_prime(y, params)) / (z - y)
