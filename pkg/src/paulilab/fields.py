"""Almost periodic magnetic fields and their potentials.

Three spec variants: a finite symmetric Fourier mode list (Wiener class),
the explicit cosine-series family b = C sum_k sum_n n^-s cos(n^-t g_k.x),
and rapidly decaying radial profiles.  The module supplies point and grid
evaluation of b, the curl-free scalar potential solving the Poisson
equation, the almost periodic vector potential, the anchored sublinear
potential, flux, and the five-point Poisson residual used for convergence
checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import InvalidParameterError, ResourceLimitError
from .series import (
    CRITICAL,
    CertifiedValue,
    SeriesParams,
    direct_truncation_index,
    eval_g_critical_grid,
    eval_g_direct,
    eval_g_osc,
    eval_g_smallarg_grid,
    eval_gprime_direct,
    eval_gprime_osc,
)

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class FourierMode:
    freq: tuple
    amp: complex

    def __post_init__(self):
        if len(self.freq) != 2:
            raise InvalidParameterError("mode frequency must be a 2-vector")
        if self.freq[0] == 0.0 and self.freq[1] == 0.0:
            raise InvalidParameterError("zero frequency belongs in b0, not the mode list")
        if not (math.isfinite(self.freq[0]) and math.isfinite(self.freq[1])):
            raise InvalidParameterError("mode frequency must be finite")


@dataclass(frozen=True)
class ModesField:
    """Wiener-class field b(x) = b0 + sum b_l e^(i l.x) over a finite symmetric list."""

    b0: float
    modes: tuple

    def __post_init__(self):
        seen = {}
        for m in self.modes:
            key = (m.freq[0], m.freq[1])
            if key in seen:
                raise InvalidParameterError(f"duplicate mode frequency {key}")
            seen[key] = m.amp
        for (f1, f2), amp in seen.items():
            partner = seen.get((-f1, -f2))
            if partner is None or partner != amp.conjugate():
                raise InvalidParameterError(
                    f"mode ({f1}, {f2}) lacks its conjugate partner; field would not be real"
                )

    def half_modes(self):
        """One representative per conjugate pair (lexicographically positive frequency)."""
        out = []
        for m in self.modes:
            f1, f2 = m.freq
            if f1 > 0.0 or (f1 == 0.0 and f2 > 0.0):
                out.append(m)
        return out

    def is_integer_lattice(self) -> bool:
        return all(
            abs(f - round(f)) <= 1e-12 for m in self.modes for f in m.freq
        )


@dataclass(frozen=True)
class CosineFamilyField:
    """Cosine-series field C sum_k sum_n n^-s cos(n^-t gamma_k . x) (+ optional mean b0)."""

    C: float
    s: float
    t: float
    directions: tuple
    n_max: int = 10**8
    b0: float = 0.0
    t_exact: Fraction = None

    def __post_init__(self):
        if not (self.C > 0):
            raise InvalidParameterError("C must be positive")
        SeriesParams(self.s, self.t)  # validates s > 1, t > 0
        if self.s - 2.0 * self.t > 1.0 + _UNIT_TOL:
            raise InvalidParameterError("family requires s - 2t <= 1")
        if self.n_max < 1:
            raise InvalidParameterError("n_max must be >= 1")
        dirs = [np.asarray(g, dtype=float) for g in self.directions]
        if not dirs:
            raise InvalidParameterError("need at least one direction")
        for g in dirs:
            if g.shape != (2,) or abs(np.hypot(g[0], g[1]) - 1.0) > 1e-9:
                raise InvalidParameterError(f"direction {g} is not a unit 2-vector")
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                if np.allclose(dirs[i], dirs[j], atol=_UNIT_TOL, rtol=0.0):
                    raise InvalidParameterError("directions must be pairwise distinct")
        if self.t_exact is not None and abs(float(self.t_exact) - self.t) > 1e-15:
            raise InvalidParameterError("t_exact and t disagree")

    @property
    def K(self) -> int:
        return len(self.directions)

    @property
    def params(self) -> SeriesParams:
        return SeriesParams(self.s, self.t)

    @property
    def regime(self) -> str:
        return self.params.regime


@dataclass(frozen=True)
class DecayingField:
    """Rapidly decaying radial field; profiles: gaussian A e^(-(r/R)^2), bump (compact)."""

    profile: str
    amplitude: float
    radius: float = 1.0

    def __post_init__(self):
        if self.profile not in ("gaussian", "bump"):
            raise InvalidParameterError(f"unknown decaying profile {self.profile!r}")
        if not math.isfinite(self.amplitude):
            raise InvalidParameterError("amplitude must be finite")
        if not (self.radius > 0):
            raise InvalidParameterError("radius must be positive")

    def radial(self, rho):
        rho = np.asarray(rho, dtype=float)
        u = rho / self.radius
        if self.profile == "gaussian":
            return self.amplitude * np.exp(-(u**2))
        out = np.zeros_like(u)
        inside = u < 1.0
        ui = u[inside]
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - ui**2))
        return out


APFieldSpec = (ModesField, CosineFamilyField, DecayingField)


def modes_field(b0: float, terms) -> ModesField:
    """Build a Wiener field from one representative per pair.

    Each term (freq, coeff) contributes 2 Re(coeff e^(i freq.x)); the
    conjugate partner is added automatically.
    """
    modes = []
    for freq, coeff in terms:
        c = complex(coeff)
        f = (float(freq[0]), float(freq[1]))
        modes.append(FourierMode(f, c))
        modes.append(FourierMode((-f[0], -f[1]), c.conjugate()))
    return ModesField(float(b0), tuple(modes))


def cosine_field(b0: float, terms) -> ModesField:
    """Field b0 + sum_j a_j cos(freq_j . x) with real amplitudes a_j."""
    return modes_field(b0, [(freq, 0.5 * float(a)) for freq, a in terms])


def axes_cosine_family(s: float, t: float, n_max: int = 10**8) -> CosineFamilyField:
    """Subcritical two-direction family: C=1, K=2, axis directions."""
    return CosineFamilyField(C=1.0, s=s, t=t, directions=((1.0, 0.0), (0.0, 1.0)), n_max=n_max)


def equal_angle_family(t, K: int, n_max: int = 10**8) -> CosineFamilyField:
    """Critical equal-angle family: s = 1 + 2t, C = 1/K, K-th roots of unity."""
    t_exact = None
    if isinstance(t, str):
        t_exact = Fraction(t)
    elif isinstance(t, Fraction):
        t_exact = t
    tf = float(t_exact) if t_exact is not None else float(t)
    dirs = tuple(
        (math.cos(2.0 * math.pi * k / K), math.sin(2.0 * math.pi * k / K))
        for k in range(1, K + 1)
    )
    return CosineFamilyField(
        C=1.0 / K, s=1.0 + 2.0 * tf, t=tf, directions=dirs, n_max=n_max, t_exact=t_exact
    )


def _b1_direct(s: float, t: float, p: float, N: int) -> float:
    acc = 0.0
    for lo in range(1, N + 1, 1 << 16):
        hi = min(lo + (1 << 16), N + 1)
        n = np.arange(lo, hi, dtype=np.float64)
        acc += float(np.sum(np.power(n, -s) * np.cos(p * np.power(n, -t))))
    return acc


def _b1_point(s: float, t: float, p: float, tol: float = 1e-9,
              theta_max: float = 0.25) -> float:
    """One-direction profile sum_n n^-s cos(n^-t p); p may be any real.

    Direct truncation when the zeta tail allows it, else the head +
    oscillatory-integral + Euler-Maclaurin route (mirrors the g evaluators).
    """
    p = abs(p)
    n_needed = (max(tol, 1e-300) * (s - 1.0)) ** (-1.0 / (s - 1.0))
    if n_needed <= 300_000:
        return _b1_direct(s, t, p, max(1, math.ceil(n_needed)))
    if p == 0.0:
        from .series import riemann_zeta

        return riemann_zeta(s)
    n1 = max(8, math.ceil((p * t / theta_max) ** (1.0 / (t + 1.0))))
    head = _b1_direct(s, t, p, n1)
    q = (s - 1.0 - t) / t
    u1 = p * float(n1) ** (-t)
    lo_end = min(1.0, u1)
    w, _ = quad(lambda u: u**q * math.cos(u), 0.0, lo_end, epsabs=1e-12, epsrel=1e-11)
    if u1 > 1.0:
        w2, _ = quad(lambda u: u**q, 1.0, u1, weight="cos", wvar=1.0, epsabs=1e-12, limit=400)
        w += w2
    scale = p ** ((1.0 - s) / t) / t
    y = float(n1)
    v = p * y ** (-t)
    f_n1 = y ** (-s) * math.cos(v)
    fp_n1 = y ** (-s - 1.0) * (-s * math.cos(v) + t * v * math.sin(v))
    return head + scale * w - 0.5 * f_n1 - fp_n1 / 12.0


def _b1_table(spec: CosineFamilyField, p_max: float, tol: float):
    """Cubic-spline table of p -> sum_n n^-s cos(n^-t p) on [0, p_max] (even in p)."""
    m = max(64, int(math.ceil(p_max / 0.02)) + 1)
    p = np.linspace(0.0, max(p_max, 1e-6), m)
    n_needed = (max(tol, 1e-300) * (spec.s - 1.0)) ** (-1.0 / (spec.s - 1.0))
    if n_needed <= 300_000:
        N = max(1, math.ceil(n_needed))
        vals = np.zeros(m)
        n = np.arange(1, N + 1, dtype=np.float64)
        wn = np.power(n, -spec.s)
        fn = np.power(n, -spec.t)
        chunk = max(64, (1 << 24) // max(1, m))
        for lo in range(0, N, chunk):
            hi = min(lo + chunk, N)
            vals += np.cos(np.multiply.outer(p, fn[lo:hi])) @ wn[lo:hi]
    else:
        vals = np.array([_b1_point(spec.s, spec.t, float(pi), tol) for pi in p])
    return CubicSpline(p, vals)


def field_eval(spec, x, tol: float = 1e-10) -> float:
    """Point value b(x); real by construction for every variant."""
    return float(field_grid(spec, np.asarray([x[0]]), np.asarray([x[1]]), tol)[0])


def field_grid(spec, X1, X2, tol: float = 1e-10):
    """Vectorized b on arrays of coordinates (matching shapes)."""
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    if isinstance(spec, ModesField):
        out = np.full(X1.shape, spec.b0, dtype=float)
        for m in spec.half_modes():
            phase = m.freq[0] * X1 + m.freq[1] * X2
            out += 2.0 * (m.amp.real * np.cos(phase) - m.amp.imag * np.sin(phase))
        return out
    if isinstance(spec, CosineFamilyField):
        out = np.full(X1.shape, spec.b0, dtype=float)
        per_dir = tol / (spec.C * spec.K)
        if X1.size <= 4:
            for g in spec.directions:
                p = g[0] * X1 + g[1] * X2
                out += spec.C * np.array(
                    [_b1_point(spec.s, spec.t, float(pi), per_dir) for pi in p.ravel()]
                ).reshape(p.shape)
            return out
        p_max = 0.0
        for g in spec.directions:
            p_max = max(p_max, float(np.max(np.abs(g[0] * X1 + g[1] * X2))))
        table = _b1_table(spec, p_max + 1.0, per_dir)
        for g in spec.directions:
            p = np.abs(g[0] * X1 + g[1] * X2)
            out += spec.C * table(p)
        return out
    if isinstance(spec, DecayingField):
        return spec.radial(np.hypot(X1, X2))
    raise InvalidParameterError(f"unsupported field spec {type(spec).__name__}")


def mean_value(spec) -> float:
    """Bohr mean of the field: exact by construction for every variant."""
    if isinstance(spec, ModesField):
        return spec.b0
    if isinstance(spec, CosineFamilyField):
        return spec.b0
    if isinstance(spec, DecayingField):
        return 0.0
    raise InvalidParameterError(f"unsupported field spec {type(spec).__name__}")


def box_mean(spec, T: float, n: int = 2048) -> float:
    """Numerical box average over [-T/2, T/2]^2 (cross-check of mean_value)."""
    if isinstance(spec, ModesField):
        # mode-wise exact average: product of sinc factors
        out = spec.b0
        for m in spec.half_modes():

            def sinc_half(f):
                return 1.0 if f == 0.0 else math.sin(f * T / 2.0) / (f * T / 2.0)

            out += 2.0 * m.amp.real * sinc_half(m.freq[0]) * sinc_half(m.freq[1])
        return out
    xs = (np.arange(n) + 0.5) / n * T - T / 2.0
    X1, X2 = np.meshgrid(xs, xs, indexing="ij")
    return float(np.mean(field_grid(spec, X1, X2)))


def _mode_potential_coeff(m: FourierMode):
    lam2 = m.freq[0] ** 2 + m.freq[1] ** 2
    return m.amp / lam2


def vector_potential(spec, x, tol: float = 1e-9):
    """Almost periodic potential generating b - b0 (divergence-free gauge)."""
    a, _ = vector_potential_certified(spec, x, tol)
    return a


def vector_potential_certified(spec, x, tol: float = 1e-9):
    """Same as vector_potential, plus the truncation bound actually achieved."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, ModesField):
        a1 = a2 = 0.0
        for m in spec.half_modes():
            e = complex(math.cos(m.freq[0] * x[0] + m.freq[1] * x[1]),
                        math.sin(m.freq[0] * x[0] + m.freq[1] * x[1]))
            c = _mode_potential_coeff(m) * e
            a1 += 2.0 * (1j * c * m.freq[1]).real
            a2 += 2.0 * (-1j * c * m.freq[0]).real
        return np.array([a1, a2]), 0.0
    if isinstance(spec, CosineFamilyField):
        tail = 0.0
        a = np.zeros(2)
        for g in spec.directions:
            p = g[0] * x[0] + g[1] * x[1]
            gp = _gprime_auto(spec.params, abs(p) / 2.0, tol / (2.0 * spec.C * spec.K))
            val = math.copysign(gp.value, p) if p != 0.0 else 0.0
            a += spec.C * val * np.array([-g[1], g[0]])
            tail += spec.C * gp.tail_bound
        return a, tail
    raise InvalidParameterError("vector_potential needs a modes or cosine-family spec")


def sublinear_potential(spec: ModesField, x):
    """Anchored potential with (e^(i l.x) - 1) factors; zero at the origin.

    Generates b - b0 and grows at most sqrt(2) (sum |b_l|) |x|.
    """
    if not isinstance(spec, ModesField):
        raise InvalidParameterError("sublinear potential is defined for mode-list specs")
    x = np.asarray(x, dtype=float)
    a1 = a2 = 0.0
    for m in spec.half_modes():
        phase = m.freq[0] * x[0] + m.freq[1] * x[1]
        e = complex(math.cos(phase) - 1.0, math.sin(phase))
        c = _mode_potential_coeff(m) * e
        a1 += 2.0 * (1j * c * m.freq[1]).real
        a2 += 2.0 * (-1j * c * m.freq[0]).real
    return np.array([a1, a2])


def wiener_l1(spec: ModesField) -> float:
    """sum over all modes of |b_l| (Wiener norm without the mean)."""
    return 2.0 * sum(abs(m.amp) for m in spec.half_modes())


def _g_auto(params: SeriesParams, r: float, tol: float) -> CertifiedValue:
    if r == 0.0:
        return CertifiedValue(0.0, 0.0, 1)
    try:
        if direct_truncation_index(params, r, tol) <= 3_000_000:
            return eval_g_direct(params, r, tol)
    except ResourceLimitError:
        pass
    return eval_g_osc(params, r)


def _gprime_auto(params: SeriesParams, r: float, tol: float) -> CertifiedValue:
    if r == 0.0:
        return CertifiedValue(0.0, 0.0, 1)
    try:
        if direct_truncation_index(params, r, tol) <= 3_000_000:
            return eval_gprime_direct(params, r, tol)
    except ResourceLimitError:
        pass
    return eval_gprime_osc(params, r)


def scalar_potential(spec, x, tol: float = 1e-8) -> float:
    """Potential solving the 2D Poisson equation for b, canonical constants.

    Mode lists: b0 |x|^2/4 - sum b_l |l|^-2 e^(i l.x) (zero-mean oscillation).
    Cosine family: b0 |x|^2/4 + 2C sum_k g(|gamma_k.x|/2), zero at origin.
    Decaying: logarithmic Newton potential, reduced to radial quadrature.
    """
    value, _ = scalar_potential_certified(spec, x, tol)
    return value


def scalar_potential_certified(spec, x, tol: float = 1e-8):
    x = np.asarray(x, dtype=float)
    r2 = float(x[0] ** 2 + x[1] ** 2)
    if isinstance(spec, ModesField):
        phi = spec.b0 * r2 / 4.0
        for m in spec.half_modes():
            phase = m.freq[0] * x[0] + m.freq[1] * x[1]
            c = _mode_potential_coeff(m) * complex(math.cos(phase), math.sin(phase))
            phi -= 2.0 * c.real
        return phi, 0.0
    if isinstance(spec, CosineFamilyField):
        phi = spec.b0 * r2 / 4.0
        tail = 0.0
        per_term = tol / (2.0 * spec.C * spec.K)
        for g in spec.directions:
            p = abs(g[0] * x[0] + g[1] * x[1]) / 2.0
            cv = _g_auto(spec.params, p, per_term)
            phi += 2.0 * spec.C * cv.value
            tail += 2.0 * spec.C * cv.tail_bound
        return phi, tail
    if isinstance(spec, DecayingField):
        return _decaying_potential(spec, math.sqrt(r2)), 0.0
    raise InvalidParameterError(f"unsupported field spec {type(spec).__name__}")


def _decaying_cumulative(spec: DecayingField, r: float) -> float:
    """F(r) = integral_0^r b(rho) rho d rho."""
    if spec.profile == "gaussian":
        u = (r / spec.radius) ** 2
        return 0.5 * spec.amplitude * spec.radius**2 * -math.expm1(-u)
    top = min(r, spec.radius)
    if top <= 0.0:
        return 0.0
    val, _ = quad(lambda rho: float(spec.radial(rho)) * rho, 0.0, top, epsabs=1e-13, limit=200)
    return val


def _decaying_potential(spec: DecayingField, r: float) -> float:
    """phi(r) = ln r F(r) + integral_r^inf ln(rho) b rho d rho (radial log potential)."""
    if spec.profile == "gaussian":
        upper = np.inf
    else:
        upper = spec.radius
        if r >= upper:
            return math.log(r) * flux(spec) if r > 0 else 0.0
    tail, _ = quad(
        lambda rho: math.log(rho) * float(spec.radial(rho)) * rho,
        max(r, 1e-300),
        upper,
        epsabs=1e-13,
        limit=200,
    )
    if r == 0.0:
        return tail
    return math.log(r) * _decaying_cumulative(spec, r) + tail


def flux(spec: DecayingField) -> float:
    """Total flux (1/2pi) integral of b = integral_0^inf b(rho) rho d rho."""
    if not isinstance(spec, DecayingField):
        raise InvalidParameterError("flux is defined for decaying fields")
    if spec.profile == "gaussian":
        return 0.5 * spec.amplitude * spec.radius**2
    val, err = quad(lambda rho: float(spec.radial(rho)) * rho, 0.0, spec.radius,
                    epsabs=1e-12, limit=200)
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise InvalidParameterError("profile flux integral did not converge")
    return val


@dataclass(frozen=True)
class PotentialGrid:
    """Sampled scalar and vector potentials on a uniform structured grid."""

    origin: tuple
    spacing: float
    dims: tuple
    phi: np.ndarray
    A: tuple = None

    def __post_init__(self):
        if not (self.spacing > 0):
            raise InvalidParameterError("spacing must be positive")
        if self.phi.shape != tuple(self.dims):
            raise InvalidParameterError("phi shape must match dims")
        if self.A is not None:
            for comp in self.A:
                if comp.shape != tuple(self.dims):
                    raise InvalidParameterError("A components must match dims")

    def axes(self):
        x1 = self.origin[0] + self.spacing * np.arange(self.dims[0])
        x2 = self.origin[1] + self.spacing * np.arange(self.dims[1])
        return x1, x2

    def meshes(self):
        x1, x2 = self.axes()
        return np.meshgrid(x1, x2, indexing="ij")


def _g_tables(params: SeriesParams, r_max: float, dr: float = 0.002):
    """Cubic-spline tables of r -> g(r) and r -> g'(r) on [0, r_max].

    dr controls the interpolation noise floor; grid sampling for
    finite-difference work needs it small because the five-point Laplacian
    amplifies table noise by 1/h^2.
    """
    m = max(64, int(math.ceil(r_max / dr)) + 1)
    r = np.linspace(0.0, max(r_max, 1e-6), m)
    if params.regime == CRITICAL:
        g, gp = eval_g_critical_grid(params.t, r)
    else:
        try:
            g, gp = eval_g_smallarg_grid(params, r)
        except ResourceLimitError:
            g = np.empty(m)
            gp = np.empty(m)
            for i, ri in enumerate(r):
                g[i] = _g_auto(params, float(ri), 1e-10).value
                gp[i] = _gprime_auto(params, float(ri), 1e-10).value
    return CubicSpline(r, g), CubicSpline(r, gp)


def potential_grids(spec, X1, X2, tol: float = 1e-8, with_A: bool = True):
    """Vectorized (phi, A1, A2) on coordinate arrays; A = (-d2 phi, d1 phi) gauge."""
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    r2 = X1**2 + X2**2
    b0 = mean_value(spec)
    phi = b0 * r2 / 4.0
    a1 = -0.5 * b0 * X2 if with_A else None
    a2 = 0.5 * b0 * X1 if with_A else None
    if isinstance(spec, ModesField):
        for m in spec.half_modes():
            phase = m.freq[0] * X1 + m.freq[1] * X2
            c = _mode_potential_coeff(m)
            cosph, sinph = np.cos(phase), np.sin(phase)
            phi -= 2.0 * (c.real * cosph - c.imag * sinph)
            if with_A:
                im_part = c.real * sinph + c.imag * cosph
                a1 += -2.0 * im_part * m.freq[1]
                a2 += 2.0 * im_part * m.freq[0]
        return (phi, a1, a2) if with_A else (phi, None, None)
    if isinstance(spec, CosineFamilyField):
        critical = spec.regime == CRITICAL
        if not critical:
            p_abs_max = 0.0
            for g in spec.directions:
                p_abs_max = max(p_abs_max, float(np.max(np.abs(g[0] * X1 + g[1] * X2))))
            cs_g, cs_gp = _g_tables(spec.params, p_abs_max / 2.0 + 1.0)
        for g in spec.directions:
            p = g[0] * X1 + g[1] * X2
            r_arg = np.abs(p) / 2.0
            if critical:
                g_val, gp_raw = eval_g_critical_grid(spec.t, r_arg.ravel())
                g_val = g_val.reshape(r_arg.shape)
                gp_val = np.sign(p) * gp_raw.reshape(r_arg.shape)
            else:
                g_val = cs_g(r_arg)
                gp_val = np.sign(p) * cs_gp(r_arg)
            phi += 2.0 * spec.C * g_val
            if with_A:
                a1 += -spec.C * gp_val * g[1]
                a2 += spec.C * gp_val * g[0]
        return (phi, a1, a2) if with_A else (phi, None, None)
    if isinstance(spec, DecayingField):
        rho = np.hypot(X1, X2)
        rmax = float(np.max(rho))
        grid = np.linspace(0.0, rmax + 1.0, 2048)
        phi_tab = np.array([_decaying_potential(spec, float(ri)) for ri in grid])
        f_tab = np.array([_decaying_cumulative(spec, float(ri)) for ri in grid])
        phi = CubicSpline(grid, phi_tab)(rho)
        if with_A:
            with np.errstate(divide="ignore", invalid="ignore"):
                athe = np.where(rho > 0, CubicSpline(grid, f_tab)(rho) / np.maximum(rho, 1e-300) ** 2, 0.0)
            a1 = -athe * X2
            a2 = athe * X1
        return (phi, a1, a2) if with_A else (phi, None, None)
    raise InvalidParameterError(f"unsupported field spec {type(spec).__name__}")


def sample_potential_grid(spec, origin, spacing: float, dims, tol: float = 1e-8,
                          with_A: bool = True) -> PotentialGrid:
    """Fill a PotentialGrid by sampling the analytic potentials."""
    x1 = origin[0] + spacing * np.arange(dims[0])
    x2 = origin[1] + spacing * np.arange(dims[1])
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    phi, a1, a2 = potential_grids(spec, X1, X2, tol, with_A)
    return PotentialGrid(
        origin=(float(origin[0]), float(origin[1])),
        spacing=float(spacing),
        dims=(int(dims[0]), int(dims[1])),
        phi=phi,
        A=(a1, a2) if with_A else None,
    )


def poisson_residual(spec, grid: PotentialGrid) -> float:
    """max over interior nodes of |five-point Laplacian(phi) - b|."""
    nx, ny = grid.dims
    if nx < 3 or ny < 3:
        raise InvalidParameterError("grid interior must be at least 3x3")
    h = grid.spacing
    phi = grid.phi
    lap = (
        phi[2:, 1:-1] + phi[:-2, 1:-1] + phi[1:-1, 2:] + phi[1:-1, :-2] - 4.0 * phi[1:-1, 1:-1]
    ) / (h * h)
    X1, X2 = grid.meshes()
    b = field_grid(spec, X1[1:-1, 1:-1], X2[1:-1, 1:-1])
    return float(np.max(np.abs(lap - b)))


def spec_to_config(spec) -> dict:
    """Serialize a field spec to a declarative config dict (bit-exact floats)."""
    if isinstance(spec, ModesField):
        return {
            "kind": "modes",
            "b0": spec.b0,
            "modes": [
                {"freq": [m.freq[0], m.freq[1]], "amp": [m.amp.real, m.amp.imag]}
                for m in spec.modes
            ],
        }
    if isinstance(spec, CosineFamilyField):
        out = {
            "kind": "cosine_family",
            "C": spec.C,
            "s": spec.s,
            "t": spec.t,
            "directions": [[g[0], g[1]] for g in spec.directions],
            "n_max": spec.n_max,
            "b0": spec.b0,
        }
        if spec.t_exact is not None:
            out["t_rational"] = f"{spec.t_exact.numerator}/{spec.t_exact.denominator}"
        return out
    if isinstance(spec, DecayingField):
        return {
            "kind": "decaying",
            "profile": spec.profile,
            "amplitude": spec.amplitude,
            "radius": spec.radius,
        }
    raise InvalidParameterError(f"unsupported field spec {type(spec).__name__}")


def _require_keys(d: dict, allowed, required, ctx: str):
    unknown = set(d) - set(allowed)
    if unknown:
        raise InvalidParameterError(f"unknown {ctx} keys: {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise InvalidParameterError(f"missing {ctx} keys: {sorted(missing)}")


def spec_from_config(cfg: dict):
    """Parse a field spec from a config dict; unknown keys are rejected."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise InvalidParameterError("field config must be a dict with a 'kind' tag")
    kind = cfg["kind"]
    if kind == "modes":
        _require_keys(cfg, {"kind", "b0", "modes"}, {"kind", "b0", "modes"}, "modes field")
        modes = []
        for m in cfg["modes"]:
            _require_keys(m, {"freq", "amp"}, {"freq", "amp"}, "mode")
            modes.append(
                FourierMode((float(m["freq"][0]), float(m["freq"][1])),
                            complex(float(m["amp"][0]), float(m["amp"][1])))
            )
        return ModesField(float(cfg["b0"]), tuple(modes))
    if kind == "cosine_family":
        _require_keys(
            cfg,
            {"kind", "C", "s", "t", "directions", "n_max", "b0", "t_rational"},
            {"kind", "C", "s", "t", "directions"},
            "cosine-family field",
        )
        t_exact = Fraction(cfg["t_rational"]) if "t_rational" in cfg else None
        return CosineFamilyField(
            C=float(cfg["C"]),
            s=float(cfg["s"]),
            t=float(cfg["t"]),
            directions=tuple((float(g[0]), float(g[1])) for g in cfg["directions"]),
            n_max=int(cfg.get("n_max", 10**8)),
            b0=float(cfg.get("b0", 0.0)),
            t_exact=t_exact,
        )
    if kind == "decaying":
        _require_keys(
            cfg,
            {"kind", "profile", "amplitude", "radius"},
            {"kind", "profile", "amplitude"},
            "decaying field",
        )
        return DecayingField(
            profile=cfg["profile"],
            amplitude=float(cfg["amplitude"]),
            radius=float(cfg.get("radius", 1.0)),
        )
    raise InvalidParameterError(f"unknown field kind {kind!r}")
