"""Oscillatory-sum machinery behind the critical-regime growth proof.

Zone decomposition of the summation range into tails, resonant bands and
joints; discrete derivatives of the phase 2 r y^(-t); the Van der Corput
inequality; and the block periods / block sums over a band.  Everything
here is a quantitative, testable ingredient rather than a proof step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, ZoneDegenerateError

MAX_DERIVATIVE_ORDER = 8


def zone_delta(t: float, eps: float) -> float:
    """Band-margin exponent: min(1/(2t + 2/eps + 2), eps/(2/eps + 4))."""
    return min(1.0 / (2.0 * t + 2.0 / eps + 2.0), eps / (2.0 / eps + 4.0))


@dataclass(frozen=True)
class ZonePartition:
    """Decomposition of [1, large_cut) into small tail, bands and joints.

    Bands I_k = [r^(1/(t+k+1)+delta), r^(1/(t+k)-delta)] are closed,
    joints J_k = (r^(1/(t+k)-delta), r^(1/(t+k)+delta)) are open; the
    small tail is [1, small_cut] with small_cut = r^(1/(t+K)-delta), the
    large tail starts at large_cut = r^(1/t+delta).
    """

    r: float
    t: float
    eps: float
    delta: float
    K: int
    small_cut: float
    large_cut: float
    bands: tuple = field(default_factory=tuple)
    joints: tuple = field(default_factory=tuple)

    def classify(self, n: int) -> str:
        """Zone containing the integer n: 'small', 'band:k', 'joint:k' or 'large'."""
        if n < 1:
            raise InvalidParameterError("n must be >= 1")
        if n <= self.small_cut:
            return "small"
        if n >= self.large_cut:
            return "large"
        for k, (lo, hi) in enumerate(self.bands):
            if lo <= n <= hi:
                return f"band:{k}"
        for k, (lo, hi) in enumerate(self.joints):
            if lo < n < hi:
                return f"joint:{k}"
        raise InvalidParameterError(f"n={n} escaped the partition (degenerate zones)")

    def band_index(self, n0: int):
        tag = self.classify(n0)
        if not tag.startswith("band:"):
            return None
        return int(tag.split(":")[1])


def _contains_integer(lo: float, hi: float, open_interval: bool) -> bool:
    if open_interval:
        n = math.floor(hi) if hi != math.floor(hi) else math.floor(hi) - 1
        return n > lo
    return math.floor(hi) >= math.ceil(lo)


def _zones_admissible(r: float, t: float, eps: float) -> bool:
    """Sufficient check: every band and joint has length > 1 (so each holds an integer)."""
    delta = zone_delta(t, eps)
    K = math.ceil(1.0 / eps)
    ln_r = math.log(r)
    for k in range(K):
        lo = math.exp(ln_r * (1.0 / (t + k + 1.0) + delta))
        hi = math.exp(ln_r * (1.0 / (t + k) - delta))
        if hi - lo <= 1.0:
            return False
    for k in range(K + 1):
        lo = math.exp(ln_r * (1.0 / (t + k) - delta))
        hi = math.exp(ln_r * (1.0 / (t + k) + delta))
        if hi - lo <= 1.0:
            return False
    return True


def zone_partition(r: float, t: float, eps: float) -> ZonePartition:
    """Build the zone decomposition for argument r.

    Raises ZoneDegenerateError (carrying the minimal admissible r) when
    some band or joint contains no integer.
    """
    if not (0.0 < eps < 1.0):
        raise InvalidParameterError("eps must lie in (0, 1)")
    if not (t > 0.0):
        raise InvalidParameterError("t must be positive")
    if not (r > 1.0):
        raise InvalidParameterError("r must exceed 1")
    delta = zone_delta(t, eps)
    K = math.ceil(1.0 / eps)
    ln_r = math.log(r)
    bands = tuple(
        (
            math.exp(ln_r * (1.0 / (t + k + 1.0) + delta)),
            math.exp(ln_r * (1.0 / (t + k) - delta)),
        )
        for k in range(K)
    )
    joints = tuple(
        (
            math.exp(ln_r * (1.0 / (t + k) - delta)),
            math.exp(ln_r * (1.0 / (t + k) + delta)),
        )
        for k in range(K + 1)
    )
    ok = all(lo < hi and _contains_integer(lo, hi, False) for lo, hi in bands) and all(
        lo < hi and _contains_integer(lo, hi, True) for lo, hi in joints
    )
    if not ok:
        lo_r, hi_r = r, max(r, 2.0)
        while not _zones_admissible(hi_r, t, eps):
            hi_r *= 4.0
            if hi_r > 1e300:
                raise ZoneDegenerateError("zones degenerate for every tractable r")
        for _ in range(200):
            mid = math.sqrt(lo_r * hi_r)
            if _zones_admissible(mid, t, eps):
                hi_r = mid
            else:
                lo_r = mid
            if hi_r / lo_r < 1.0 + 1e-12:
                break
        raise ZoneDegenerateError(
            f"zone partition degenerate at r={r:g} (eps={eps:g}); "
            f"minimal admissible r is about {hi_r:.6g}",
            minimal_r=hi_r,
        )
    return ZonePartition(
        r=r,
        t=t,
        eps=eps,
        delta=delta,
        K=K,
        small_cut=math.exp(ln_r * (1.0 / (t + K) - delta)),
        large_cut=math.exp(ln_r * (1.0 / t + delta)),
        bands=bands,
        joints=joints,
    )


@dataclass(frozen=True)
class PhaseDerivative:
    """Order-j discrete derivative of the phase 2 r y^(-t) with positive shifts."""

    r: float
    t: float
    order: int
    shifts: tuple = ()

    def __post_init__(self):
        if self.order < 0:
            raise InvalidParameterError("order must be nonnegative")
        if self.order > MAX_DERIVATIVE_ORDER:
            raise InvalidParameterError(
                f"order capped at {MAX_DERIVATIVE_ORDER} (2^j base evaluations)"
            )
        if len(self.shifts) != self.order:
            raise InvalidParameterError("need exactly one shift per derivative order")
        if any(h < 1 for h in self.shifts):
            raise InvalidParameterError("shifts must be positive integers")
        if not (self.r > 0 and self.t > 0):
            raise InvalidParameterError("r and t must be positive")


def phase_base(r: float, t: float, y) -> float:
    return 2.0 * r * y ** (-t)


def discrete_derivative(pd: PhaseDerivative, y: float) -> float:
    """Exact recursive evaluation: a^(j)(y) = a^(j-1)(y + h_j) - a^(j-1)(y)."""
    if np.any(np.asarray(y) < 1.0):
        raise InvalidParameterError("y must be >= 1")

    def rec(order, yy):
        if order == 0:
            return phase_base(pd.r, pd.t, yy)
        h = pd.shifts[order - 1]
        return rec(order - 1, yy + h) - rec(order - 1, yy)

    return rec(pd.order, y)


def leading_symbol(pd: PhaseDerivative, y: float) -> float:
    """Leading term 2 r (-1)^j prod_l (l + t - 1) h_l * y^(-t-j) of the derivative."""
    if np.any(np.asarray(y) < 1.0):
        raise InvalidParameterError("y must be >= 1")
    coeff = 2.0 * pd.r * (-1.0) ** pd.order
    for ell, h in enumerate(pd.shifts, start=1):
        coeff *= (ell + pd.t - 1.0) * h
    return coeff * y ** (-pd.t - pd.order)


def vdc_bound(b, H: int):
    """Van der Corput inequality data for a finite real phase sequence.

    Returns (lhs, rhs) with lhs = |N^-1 sum e^(i b_n)|^2 and
    rhs = 2/H + (4/H) sum_{h<H} |(N-h)^-1 sum_{n<=N-h} e^(i(b_{n+h}-b_n))|;
    the inequality lhs <= rhs holds for every sequence.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or len(b) == 0:
        raise InvalidParameterError("b must be a nonempty 1-d sequence")
    N = len(b)
    if not (1 <= H <= N):
        raise InvalidParameterError(f"H must lie in [1, N]={N}, got {H}")
    e = np.exp(1j * b)
    lhs = abs(np.mean(e)) ** 2
    acc = 0.0
    for h in range(1, H):
        acc += abs(np.mean(e[h:] * np.conj(e[: N - h])))
    rhs = 2.0 / H + 4.0 / H * acc
    return lhs, rhs


def block_prefactor(t: float, k: int) -> float:
    """Phase-slope prefactor D = 2 (-1)^(k+1) (k + t) prod_{l<=k} (l + t - 1)."""
    d = 2.0 * (-1.0) ** (k + 1) * (k + t)
    for ell in range(1, k + 1):
        d *= ell + t - 1.0
    return d


def block_period(r: float, t: float, k: int, n0: int, shifts=()) -> int:
    """Primitive period N(n0) = ceil((2 pi / |D|) r^-1 n0^(t+k+1)) of the block phase."""
    if k < 0:
        raise InvalidParameterError("k must be nonnegative")
    if n0 < 1:
        raise InvalidParameterError("n0 must be >= 1")
    if len(shifts) != k or any(h < 1 for h in shifts):
        raise InvalidParameterError("need k positive shifts")
    d = abs(block_prefactor(t, k))
    return max(1, math.ceil(2.0 * math.pi / d / r * float(n0) ** (t + k + 1)))


def block_phases(r: float, t: float, k: int, n0: int, shifts, n) -> np.ndarray:
    """d_n = a^(k)(n0 + n) - a^(k)(n0), evaluated exactly for an array of n."""
    n = np.asarray(n, dtype=float)
    pd = PhaseDerivative(r=r, t=t, order=k, shifts=tuple(shifts))
    return discrete_derivative(pd, n0 + n) - discrete_derivative(pd, float(n0))


def block_phase_model(r: float, t: float, k: int, n0: int, shifts, n) -> np.ndarray:
    """Leading slope model D * M * n * r * n0^(-t-k-1) of the block phase."""
    n = np.asarray(n, dtype=float)
    m = 1.0
    for h in shifts:
        m *= h
    return block_prefactor(t, k) * m * n * r * float(n0) ** (-t - k - 1.0)


def block_sum(r: float, t: float, k: int, n0: int, shifts=(), eps: float = 0.5) -> complex:
    """Exponential sum of one block: sum_{n=0}^{N(n0)-1} exp(i d_n).

    Requires n0 to lie in band I_k of the zone partition for (r, t, eps).
    Phases are reduced mod 2 pi before exponentiation.
    """
    part = zone_partition(r, t, eps)
    if part.band_index(n0) != k:
        raise InvalidParameterError(
            f"n0={n0} is not in band I_{k} (classified as {part.classify(n0)})"
        )
    N = block_period(r, t, k, n0, shifts)
    d = block_phases(r, t, k, n0, shifts, np.arange(N))
    z = np.exp(1j * np.mod(d, 2.0 * math.pi))
    return complex(np.sum(z))
