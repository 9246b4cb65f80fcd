"""Zero-mode counting for the supersymmetric Pauli operator.

Dispatches a field spec to the applicable counting rule (decaying-flux
floor, periodic/bounded-oscillation dichotomy, nonzero-mean, subcritical
two-direction family, critical equal-angle family), verifies the counts
numerically through weighted shell integrals, and evaluates the spectral
gap bound plus the variational no-gap probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError
from .fields import (
    DecayingField,
    CosineFamilyField,
    ModesField,
    _decaying_potential,
    flux,
    potential_grids,
)
from .series import CRITICAL, SUBCRITICAL, eval_g_critical_grid

RULE_AC = "aharonov_casher"
RULE_PERIODIC = "periodic_dichotomy"
RULE_BOUNDED = "bounded_tilde"
RULE_NONZERO_MEAN = "nonzero_mean"
RULE_SUBCRITICAL = "subcritical_infinite"
RULE_CRITICAL_FLOOR = "critical_floor"
RULE_NONE = "no_prediction"


@dataclass(frozen=True)
class KerPrediction:
    """Predicted kernel dimension with the rule that produced it.

    ``dim`` is an int, math.inf, or None for the explicit no-prediction
    outcome; ``gap_lower_bound`` is set only for the bounded-oscillation
    rules with nonzero mean.
    """

    dim: object
    rule: str
    admissible: bool = True
    gap_lower_bound: float = None
    trace: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rule == RULE_CRITICAL_FLOOR and not self.admissible:
            raise InvalidParameterError("the floor rule requires admissibility")
        if self.gap_lower_bound is not None and self.rule not in (
            RULE_PERIODIC, RULE_BOUNDED
        ):
            raise InvalidParameterError(
                "gap bound only accompanies the bounded-oscillation rules"
            )

    def to_record(self) -> dict:
        dim = self.dim
        if dim is not None and math.isinf(dim):
            dim = "infinity"
        return {
            "rule": self.rule,
            "dim": dim,
            "admissible": self.admissible,
            "gap_lower_bound": self.gap_lower_bound,
            "trace": self.trace,
        }


@dataclass(frozen=True)
class GrowthProfile:
    directions: np.ndarray
    alpha: np.ndarray
    r_window: tuple
    residuals: np.ndarray
    exceptional: np.ndarray


@dataclass(frozen=True)
class IntegrabilityOutcome:
    """Tri-state shell-integral verdict for z^m e^(-phi) membership in L2.

    ``integrable`` is True/False when the fitted radial exponent kappa
    clears the +-margin dead zone around -1, and None (indeterminate)
    otherwise.
    """

    integrable: object
    kappa: float
    margin: float
    r_window: tuple
    fit_residual: float

    def __bool__(self):
        raise TypeError("use .integrable explicitly; outcome may be indeterminate")


def ac_floor(x: float) -> int:
    """Greatest integer strictly below x (x > 0), with 0 at x = 0."""
    if x < 0:
        raise InvalidParameterError("ac_floor expects a nonnegative argument")
    if x == 0.0:
        return 0
    n = math.floor(x)
    return n - 1 if n == x else n


def _as_fraction(t) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, str):
        return Fraction(t)
    if isinstance(t, int):
        return Fraction(t)
    return None


def admissibility_trace(t, K: int) -> dict:
    """All four admissibility conditions with the numbers behind them."""
    tf = _as_fraction(t)
    exact = tf is not None
    tv = float(tf) if exact else float(t)
    if tv <= 0:
        raise InvalidParameterError("t must be positive")
    if K < 1:
        raise InvalidParameterError("K must be >= 1")
    if exact:
        inv = 1 / tf
        floor_inv = inv.numerator // inv.denominator
        integer_inv = inv.denominator == 1
        lhs = Fraction(K - 1, K) * inv
        rhs = Fraction(K + 1, K) * inv
        lo_ok = floor_inv < lhs
        hi_ok = rhs < floor_inv + 1
    else:
        inv = 1.0 / tv
        floor_inv = math.floor(inv)
        integer_inv = abs(inv - round(inv)) <= 1e-9
        if integer_inv:
            floor_inv = round(inv)
        lhs = (K - 1) / (K * tv)
        rhs = (K + 1) / (K * tv)
        lo_ok = floor_inv < lhs
        hi_ok = rhs < floor_inv + 1
    return {
        "t": tv,
        "K": K,
        "inv_t": float(inv),
        "floor_inv_t": int(floor_inv),
        "K_odd": K % 2 == 1,
        "K_ge_3": K >= 3,
        "inv_t_not_integer": not integer_inv,
        "lower": float(lhs),
        "upper": float(rhs),
        "lower_ok": bool(lo_ok),
        "upper_ok": bool(hi_ok),
        "exact_rational": exact,
    }


def equal_angle_admissible(t, K: int) -> bool:
    """Critical equal-angle family hypotheses: K >= 3 odd, 1/t not an
    integer, and floor(1/t) < (K-1)/(Kt) < (K+1)/(Kt) < floor(1/t)+1."""
    tr = admissibility_trace(t, K)
    return (
        tr["K_ge_3"]
        and tr["K_odd"]
        and tr["inv_t_not_integer"]
        and tr["lower_ok"]
        and tr["upper_ok"]
    )


def gap_lower_bound(b0: float, osc: float) -> float:
    """Spectral gap bound 2 |b0| exp(-2 osc) for nonzero mean fields."""
    if b0 == 0.0:
        raise InvalidParameterError("gap bound is vacuous for zero mean")
    if osc < 0:
        raise InvalidParameterError("oscillation must be nonnegative")
    return 2.0 * abs(b0) * math.exp(-2.0 * osc)


def oscillation(spec: ModesField, box: float = None, tol: float = 1e-4,
                max_n: int = 4096) -> float:
    """sup - inf of the bounded oscillating potential part.

    Periodic (integer-lattice) specs are sampled over one period cell,
    general Wiener specs over a large box; the grid is refined until the
    result is stable to ``tol``.
    """
    if not isinstance(spec, ModesField):
        raise InvalidParameterError(
            "oscillation requires a mode-list spec with a bounded potential part"
        )
    if box is None:
        box = 2.0 * math.pi if spec.is_integer_lattice() else 40.0 * math.pi
    prev = None
    n = 128
    while n <= max_n:
        xs = np.arange(n) / n * box
        X1, X2 = np.meshgrid(xs, xs, indexing="ij")
        tilde = np.zeros_like(X1)
        for m in spec.half_modes():
            lam2 = m.freq[0] ** 2 + m.freq[1] ** 2
            phase = m.freq[0] * X1 + m.freq[1] * X2
            tilde -= 2.0 * (m.amp.real * np.cos(phase) - m.amp.imag * np.sin(phase)) / lam2
        osc = float(tilde.max() - tilde.min())
        if prev is not None and abs(osc - prev) <= tol:
            return osc
        prev = osc
        n *= 2
    return prev


def _matches_axes_family(spec: CosineFamilyField) -> bool:
    if spec.C != 1.0 or spec.K != 2:
        return False
    dirs = {tuple(np.round(g, 12)) for g in spec.directions}
    return dirs == {(1.0, 0.0), (0.0, 1.0)}


def _matches_equal_angle(spec: CosineFamilyField) -> bool:
    K = spec.K
    if abs(spec.C - 1.0 / K) > 1e-12:
        return False
    want = {
        (round(math.cos(2 * math.pi * k / K), 9), round(math.sin(2 * math.pi * k / K), 9))
        for k in range(1, K + 1)
    }
    got = {(round(float(g[0]), 9), round(float(g[1]), 9)) for g in spec.directions}
    return want == got


def predict_dim_ker(spec) -> KerPrediction:
    """Kernel dimension from the applicable counting rule.

    Rules have disjoint hypotheses; a spec matching none yields the
    explicit no-prediction outcome rather than a guess.
    """
    if isinstance(spec, DecayingField):
        ph = flux(spec)
        return KerPrediction(
            dim=ac_floor(abs(ph)),
            rule=RULE_AC,
            trace={"flux": ph},
        )
    if isinstance(spec, ModesField):
        rule = RULE_PERIODIC if spec.is_integer_lattice() else RULE_BOUNDED
        if spec.b0 != 0.0:
            osc = oscillation(spec)
            return KerPrediction(
                dim=math.inf,
                rule=rule,
                gap_lower_bound=gap_lower_bound(spec.b0, osc),
                trace={"b0": spec.b0, "osc": osc},
            )
        return KerPrediction(dim=0, rule=rule, trace={"b0": 0.0})
    if isinstance(spec, CosineFamilyField):
        if spec.b0 != 0.0:
            return KerPrediction(dim=math.inf, rule=RULE_NONZERO_MEAN, trace={"b0": spec.b0})
        if spec.regime == SUBCRITICAL and _matches_axes_family(spec):
            return KerPrediction(dim=math.inf, rule=RULE_SUBCRITICAL,
                                 trace={"s": spec.s, "t": spec.t})
        if spec.regime == CRITICAL and _matches_equal_angle(spec):
            t_arg = spec.t_exact if spec.t_exact is not None else spec.t
            trace = admissibility_trace(t_arg, spec.K)
            if equal_angle_admissible(t_arg, spec.K):
                return KerPrediction(
                    dim=trace["floor_inv_t"],
                    rule=RULE_CRITICAL_FLOOR,
                    admissible=True,
                    trace=trace,
                )
            return KerPrediction(dim=None, rule=RULE_NONE, admissible=False, trace=trace)
        return KerPrediction(dim=None, rule=RULE_NONE, admissible=False,
                             trace={"regime": spec.regime})
    raise InvalidParameterError(f"unsupported field spec {type(spec).__name__}")


def _exceptional_angles(spec: CosineFamilyField) -> np.ndarray:
    """Angles where the ray is orthogonal to some family direction."""
    out = []
    for g in spec.directions:
        base = math.atan2(g[1], g[0])
        out.append((base + math.pi / 2.0) % (2.0 * math.pi))
        out.append((base - math.pi / 2.0) % (2.0 * math.pi))
    return np.array(sorted(set(np.round(out, 12))))


def _cosine_family_phi_of_angles(spec: CosineFamilyField, R: float, thetas: np.ndarray) -> np.ndarray:
    """phi(R nu(theta)) vectorized; exact critical-series evaluation."""
    nu1, nu2 = np.cos(thetas), np.sin(thetas)
    args = np.empty((len(spec.directions), thetas.size))
    for i, g in enumerate(spec.directions):
        args[i] = np.abs(g[0] * nu1 + g[1] * nu2) * (R / 2.0)
    if spec.regime == CRITICAL:
        gvals, _ = eval_g_critical_grid(spec.t, args.ravel(), theta_max=0.4)
    else:
        from .series import eval_g_smallarg_grid

        gvals, _ = eval_g_smallarg_grid(spec.params, args.ravel(), n_budget=50_000_000)
    return 2.0 * spec.C * gvals.reshape(args.shape).sum(axis=0)


def _angular_nodes(exceptional: np.ndarray, R: float):
    """Gauss-Legendre panels between exceptional angles, geometrically
    refined toward both segment ends down to width ~1/R."""
    if exceptional.size == 0:
        m = 512
        th = (np.arange(m) + 0.5) / m * 2.0 * math.pi
        w = np.full(m, 2.0 * math.pi / m)
        return th, w
    gl_x, gl_w = np.polynomial.legendre.leggauss(5)
    anchors = np.sort(exceptional)
    segments = list(zip(anchors, np.roll(anchors, -1)))
    segments[-1] = (anchors[-1], anchors[0] + 2.0 * math.pi)
    nodes, weights = [], []
    d_min = min(1e-3, 1.0 / max(R, 1.0))
    for lo, hi in segments:
        span = hi - lo
        half = span / 2.0
        edges = [0.0]
        d = d_min
        while d < half:
            edges.append(d)
            d *= 3.5
        edges.append(half)
        for a, b in zip(edges[:-1], edges[1:]):
            for start, sgn in ((lo, 1.0), (hi, -1.0)):
                mid, rad = (a + b) / 2.0, (b - a) / 2.0
                nodes.extend(start + sgn * (mid + rad * gl_x))
                weights.extend(rad * gl_w)
    return np.asarray(nodes) % (2.0 * math.pi), np.asarray(weights)


def _ln_angular_integral(spec, R: float, sign: float) -> float:
    """ln of int_{S^1} e^(2 sign phi(R nu)) d nu (the m-independent factor)."""
    if isinstance(spec, DecayingField):
        phi = _decaying_potential(spec, R)
        return math.log(2.0 * math.pi) + 2.0 * sign * phi
    if isinstance(spec, CosineFamilyField):
        exc = _exceptional_angles(spec)
        th, w = _angular_nodes(exc, R)
        phi = _cosine_family_phi_of_angles(spec, R, th)
    elif isinstance(spec, ModesField):
        mth = 1024
        th = (np.arange(mth) + 0.5) / mth * 2.0 * math.pi
        w = np.full(mth, 2.0 * math.pi / mth)
        phi, _, _ = potential_grids(spec, R * np.cos(th), R * np.sin(th), with_A=False)
    else:
        raise InvalidParameterError(f"unsupported field spec {type(spec).__name__}")
    expo = 2.0 * sign * phi
    shift = float(np.max(expo))
    integral = float(np.sum(w * np.exp(expo - shift)))
    return shift + math.log(integral)


_SHELL_CACHE: dict = {}


def _shell_profile(spec, lo: float, hi: float, n_r: int, sign: float):
    key = (spec, lo, hi, n_r, sign)
    hit = _SHELL_CACHE.get(key)
    if hit is not None:
        return hit
    R = np.geomspace(lo, hi, n_r)
    lnI = np.array([_ln_angular_integral(spec, float(Ri), sign) for Ri in R])
    if len(_SHELL_CACHE) > 64:
        _SHELL_CACHE.clear()
    _SHELL_CACHE[key] = (R, lnI)
    return R, lnI


def integrability_test(
    spec,
    m: int,
    margin: float = 0.2,
    r_window: tuple = (1e2, 1e4),
    n_r: int = 16,
    sign: float = -1.0,
    max_extend: float = 1e5,
) -> IntegrabilityOutcome:
    """Fit J(R) = R^(2m+1) int e^(2 sign phi) ~ R^kappa and decide L2 membership.

    z^m e^(sign phi) is square integrable iff the shell integral decays
    faster than 1/R; the verdict is True for kappa < -1 - margin, False
    for kappa > -1 + margin, indeterminate (None) inside the dead zone.
    The window extends until the fitted slope's standard error drops
    below 0.05 (the slow o(1) drift of the potential limits pointwise
    residuals, but the slope estimate stabilizes much faster).
    """
    if m < 0:
        raise InvalidParameterError("m must be nonnegative")
    lo, hi = float(r_window[0]), float(r_window[1])
    if not (0 < lo < hi):
        raise InvalidParameterError("r_window must be increasing and positive")
    while True:
        R, lnI = _shell_profile(spec, lo, hi, n_r, sign)
        lnR = np.log(R)
        lnJ = (2 * m + 1) * lnR + lnI
        kappa, intercept = np.polyfit(lnR, lnJ, 1)
        resid = intercept + kappa * lnR - lnJ
        dof = max(1, len(R) - 2)
        slope_se = math.sqrt(
            float(np.sum(resid**2)) / dof / float(np.sum((lnR - lnR.mean()) ** 2))
        )
        if slope_se < 0.05 or hi >= max_extend:
            break
        hi *= 10.0
        n_r += 4
    if kappa < -1.0 - margin:
        verdict = True
    elif kappa > -1.0 + margin:
        verdict = False
    else:
        verdict = None
    return IntegrabilityOutcome(
        integrable=verdict,
        kappa=float(kappa),
        margin=margin,
        r_window=(lo, hi),
        fit_residual=float(np.max(np.abs(resid))),
    )


def kernel_count(spec, m_max: int = 8, **kwargs) -> int:
    """Number of consecutive integrable powers m = 0, 1, ... (shell-integral count)."""
    count = 0
    for m in range(m_max + 1):
        out = integrability_test(spec, m, **kwargs)
        if out.integrable is True:
            count += 1
        else:
            break
    return count


def adjoint_sector_test(spec, m: int = 0, **kwargs) -> IntegrabilityOutcome:
    """Same shell test with weight e^(+2 phi): probes the adjoint kernel."""
    return integrability_test(spec, m, sign=+1.0, **kwargs)


def growth_profile(
    spec: CosineFamilyField,
    n_directions: int = 64,
    r_window: tuple = (1e2, 1e4),
    n_r: int = 12,
    exceptional_tol: float = 1e-3,
) -> GrowthProfile:
    """Per-direction logarithmic growth exponents of the potential.

    Fits phi(r nu) ~ alpha(nu) ln r over the window for equispaced
    directions; directions within ``exceptional_tol`` angular distance of
    a family-orthogonal direction are flagged.
    """
    if not isinstance(spec, CosineFamilyField) or spec.regime != CRITICAL:
        raise InvalidParameterError("growth profile requires a critical cosine-family spec")
    lo, hi = float(r_window[0]), float(r_window[1])
    if hi / lo < 10.0**1.5:
        raise InvalidParameterError("window must span at least 1.5 decades")
    thetas = 2.0 * math.pi * np.arange(n_directions) / n_directions
    rs = np.geomspace(lo, hi, n_r)
    phis = np.empty((n_r, n_directions))
    for i, R in enumerate(rs):
        phis[i] = _cosine_family_phi_of_angles(spec, float(R), thetas)
    ln_r = np.log(rs)
    design = np.vstack([ln_r, np.ones_like(ln_r)]).T
    coef, *_ = np.linalg.lstsq(design, phis, rcond=None)
    alpha = coef[0]
    if not np.all(np.isfinite(alpha)):
        raise InvalidParameterError("growth exponents did not come out finite")
    fit = design @ coef
    residuals = np.sqrt(np.mean((fit - phis) ** 2, axis=0))
    exc = _exceptional_angles(spec)
    ang_dist = np.min(
        np.abs((thetas[:, None] - exc[None, :] + math.pi) % (2.0 * math.pi) - math.pi),
        axis=1,
    )
    return GrowthProfile(
        directions=np.column_stack([np.cos(thetas), np.sin(thetas)]),
        alpha=alpha,
        r_window=(lo, hi),
        residuals=residuals,
        exceptional=ang_dist < exceptional_tol,
    )


def _probe_phi(spec, X1, X2):
    if spec is None:
        return np.zeros_like(X1)
    phi, _, _ = potential_grids(spec, X1, X2, with_A=False)
    return phi


def suggest_probe_box(spec, eps: float, phi_scale: float = None) -> float:
    """Radius at which the probe integrand falls 1e10 below its bulk."""
    if phi_scale is None:
        if isinstance(spec, CosineFamilyField):
            phi_scale = 2.0 / spec.t
        else:
            phi_scale = 2.0
    r = max(8.0 / eps, 10.0)
    for _ in range(200):
        f = 2.0 * eps * r - (phi_scale + 1.0) * math.log(r) - 23.0 - phi_scale
        if f >= 0:
            return r
        r *= 1.3
    return r


def variational_gap_probe(spec, eps: float, box: float = None,
                          n_radial: int = 400, n_angular: int = 128) -> float:
    """Rayleigh quotient of the trial state e^(phi - eps <x>).

    Evaluates 4 eps^2 int |x|^2/(4<x>^2) W dx / int W dx with the weight
    W = e^(2 phi - 2 eps <x>) by polar quadrature.  Upper-bounds the
    bottom of the adjoint-sector spectrum; scales like eps^2.
    """
    if not (eps > 0):
        raise InvalidParameterError("eps must be positive")
    if spec is not None and not isinstance(spec, CosineFamilyField):
        raise InvalidParameterError("probe needs a zero-mean sublinear-potential spec")
    if spec is not None and spec.b0 != 0.0:
        raise InvalidParameterError("probe requires zero mean value")
    suggested = suggest_probe_box(spec, eps)
    if box is None:
        box = suggested
    elif box < suggested:
        raise ResourceLimitError(
            f"box {box:g} too small for the integrand tail; need about {suggested:.3g}",
            suggestion=suggested,
        )
    gl_x, gl_w = np.polynomial.legendre.leggauss(12)
    edges = np.geomspace(1e-3, box, n_radial // 12 + 1)
    edges = np.concatenate([[0.0], edges])
    r_nodes, r_weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, rad = (a + b) / 2.0, (b - a) / 2.0
        r_nodes.extend(mid + rad * gl_x)
        r_weights.extend(rad * gl_w)
    r_nodes = np.asarray(r_nodes)
    r_weights = np.asarray(r_weights)
    th = (np.arange(n_angular) + 0.5) / n_angular * 2.0 * math.pi
    R, TH = np.meshgrid(r_nodes, th, indexing="ij")
    X1, X2 = R * np.cos(TH), R * np.sin(TH)
    phi = _probe_phi(spec, X1, X2)
    bracket = np.hypot(R, 1.0)
    ln_w = 2.0 * phi - 2.0 * eps * bracket
    shift = float(np.max(ln_w))
    W = np.exp(ln_w - shift) * R
    dW = (r_weights[:, None] * W) * (2.0 * math.pi / n_angular)
    denom = float(np.sum(dW))
    numer = float(np.sum(dW * (R**2 / (4.0 * bracket**2))))
    return 4.0 * eps**2 * numer / denom
