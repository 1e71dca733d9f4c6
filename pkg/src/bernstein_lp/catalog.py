"""Catalog of Bernstein functions used as symbols of the operator phi(Delta).

Every entry has zero drift and is normalized so that phi(1) = 1. Each
function can be rescaled through ``phi.scaled(a)`` which returns the
symbol ``lambda -> phi(lambda / a**2) / phi(1 / a**2)``.

Besides evaluation the module provides derivatives of arbitrary order
(closed form for power-type entries, Richardson-extrapolated differences in
``log lambda`` otherwise), a monotone inverse, and empirical checks of the
two-sided scaling behaviour of each symbol.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, optimize, special

from .reports import (BoundReport, DomainError, ParameterError, ScalingViolation,
                      ToleranceError, relative_drift)

ArrayFn = Callable[[np.ndarray], np.ndarray]

# ---------------------------------------------------------------------------
# numerically stable building blocks


def log_cosh(x: np.ndarray) -> np.ndarray:
    """log(cosh x) for x >= 0 without overflow or small-x cancellation."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= 20.0
    xs = x[small]
    out[small] = np.log1p(2.0 * np.sinh(0.5 * xs) ** 2)
    xl = x[~small]
    out[~small] = xl - math.log(2.0) + np.log1p(np.exp(-2.0 * xl))
    return out


def log_sinhc(x: np.ndarray) -> np.ndarray:
    """log(sinh(x) / x) for x >= 0, equal to 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.5
    xs = x[small]
    x2 = xs * xs
    # sinh(x)/x - 1 = sum_{k>=1} x^{2k} / (2k+1)!
    term = np.ones_like(xs)
    acc = np.zeros_like(xs)
    for k in range(1, 12):
        term = term * x2 / ((2 * k) * (2 * k + 1))
        acc = acc + term
    out[small] = np.log1p(acc)
    mid = (~small) & (x <= 20.0)
    xm = x[mid]
    out[mid] = np.log(np.sinh(xm) / xm)
    big = x > 20.0
    xb = x[big]
    out[big] = xb - math.log(2.0) - np.log(xb) + np.log1p(-np.exp(-2.0 * xb))
    return out


def falling_factorial(a: float, n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= a - k
    return out


@lru_cache(maxsize=None)
def stirling_first(n: int) -> tuple[float, ...]:
    """Signed Stirling numbers s(n, k), k = 0..n.

    They convert log-derivatives into ordinary ones:
    ``lambda**n D**n = sum_k s(n, k) (lambda d/dlambda)**k``.
    """
    row = [1.0]
    for m in range(n):
        new = [0.0] * (m + 2)
        for k, c in enumerate(row):
            new[k + 1] += c
            new[k] -= m * c
        row = new
    return tuple(row)


@lru_cache(maxsize=None)
def _central_weights(order: int, half_width: int) -> np.ndarray:
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vander, rhs)


# ---------------------------------------------------------------------------
# raw (unnormalized) symbols


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


def _raw_stable(p):
    alpha = p["alpha"]
    _check(0.0 < alpha < 2.0, "stable entry needs 0 < alpha < 2")
    a = alpha / 2.0
    raw = lambda lam: lam ** a
    deriv = lambda lam, n: falling_factorial(a, n) * lam ** (a - n)
    levy = lambda s: a / special.gamma(1.0 - a) * s ** (-1.0 - a)
    return raw, deriv, levy


def _raw_two_power(p):
    alpha, beta = p["alpha"], p["beta"]
    _check(0.0 < alpha < beta < 1.0, "two_power entry needs 0 < alpha < beta < 1")
    raw = lambda lam: lam ** alpha + lam ** beta
    deriv = lambda lam, n: (falling_factorial(alpha, n) * lam ** (alpha - n)
                            + falling_factorial(beta, n) * lam ** (beta - n))
    levy = lambda s: (alpha / special.gamma(1.0 - alpha) * s ** (-1.0 - alpha)
                      + beta / special.gamma(1.0 - beta) * s ** (-1.0 - beta))
    return raw, deriv, levy


def _raw_power_mix(p):
    alpha, beta = p["alpha"], p["beta"]
    _check(0.0 < alpha < 1.0 and 0.0 < beta < 1.0, "power_mix entry needs alpha, beta in (0, 1)")
    return (lambda lam: (lam + lam ** alpha) ** beta), None, None


def _raw_log_up(p):
    alpha, beta = p["alpha"], p["beta"]
    _check(0.0 < alpha < 1.0 and 0.0 < beta < 1.0 - alpha,
           "log_up entry needs 0 < alpha < 1 and 0 < beta < 1 - alpha")
    return (lambda lam: lam ** alpha * np.log1p(lam) ** beta), None, None


def _raw_log_down(p):
    alpha, beta = p["alpha"], p["beta"]
    _check(0.0 < alpha < 1.0 and 0.0 < beta < alpha,
           "log_down entry needs 0 < beta < alpha < 1")

    def raw(lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros_like(lam)
        pos = lam > 0
        out[pos] = lam[pos] ** alpha * np.log1p(lam[pos]) ** (-beta)
        return out

    return raw, None, None


def _raw_relativistic(p):
    alpha, m = p["alpha"], p["m"]
    _check(0.0 < alpha < 2.0 and m > 0.0, "relativistic entry needs 0 < alpha < 2, m > 0")
    a = alpha / 2.0
    c = m ** (1.0 / a)

    def raw(lam):
        # (lam + c)^a - c^a written to avoid cancellation for small lam
        return m * np.expm1(a * np.log1p(np.asarray(lam, dtype=float) / c))

    deriv = lambda lam, n: falling_factorial(a, n) * (lam + c) ** (a - n)
    levy = lambda s: a / special.gamma(1.0 - a) * s ** (-1.0 - a) * np.exp(-c * s)
    return raw, deriv, levy


def _raw_log_cosh(p):
    alpha = p["alpha"]
    _check(0.0 < alpha <= 1.0, "log_cosh entry needs 0 < alpha <= 1")
    return (lambda lam: log_cosh(np.sqrt(lam)) ** alpha), None, None


def _raw_log_sinh(p):
    alpha = p["alpha"]
    _check(0.0 < alpha <= 1.0, "log_sinh entry needs 0 < alpha <= 1")
    return (lambda lam: log_sinhc(np.sqrt(lam)) ** alpha), None, None


_BUILDERS = {
    "stable": (_raw_stable, {"alpha": 1.0}, "lambda^(alpha/2)"),
    "two_power": (_raw_two_power, {"alpha": 0.3, "beta": 0.7}, "lambda^alpha + lambda^beta"),
    "power_mix": (_raw_power_mix, {"alpha": 0.5, "beta": 0.5}, "(lambda + lambda^alpha)^beta"),
    "log_up": (_raw_log_up, {"alpha": 0.5, "beta": 0.3}, "lambda^alpha log(1+lambda)^beta"),
    "log_down": (_raw_log_down, {"alpha": 0.5, "beta": 0.3}, "lambda^alpha log(1+lambda)^(-beta)"),
    "relativistic": (_raw_relativistic, {"alpha": 1.0, "m": 1.0},
                     "(lambda + m^(2/alpha))^(alpha/2) - m"),
    "log_cosh": (_raw_log_cosh, {"alpha": 0.5}, "(log cosh sqrt(lambda))^alpha"),
    "log_sinh": (_raw_log_sinh, {"alpha": 0.5}, "(log sinh sqrt(lambda) - log sqrt(lambda))^alpha"),
}

ENTRY_NAMES: tuple[str, ...] = tuple(_BUILDERS)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogLattice:
    """Log-uniform lattice ``[lo, hi]`` with ``per_decade`` points per decade."""

    lo: float = 1e-4
    hi: float = 1e4
    per_decade: int = 40

    def points(self) -> np.ndarray:
        k_lo = round(math.log10(self.lo) * self.per_decade)
        k_hi = round(math.log10(self.hi) * self.per_decade)
        return 10.0 ** (np.arange(k_lo, k_hi + 1) / self.per_decade)

    def refined(self) -> "LogLattice":
        return LogLattice(self.lo, self.hi, 2 * self.per_decade)


class BernsteinFunction:
    """A normalized Bernstein function ``phi(lam) = raw(scale * lam) / c0``.

    Parameters
    ----------
    name, params
        Catalog entry and its parameters.
    lam_scale
        Internal rescaling of the argument, 1 for catalog entries.
    drift
        Must be zero; symbols with a drift are rejected.
    """

    def __init__(self, name: str, params: Mapping[str, float] | None = None,
                 lam_scale: float = 1.0, drift: float = 0.0):
        if drift != 0.0:
            raise ParameterError("catalog symbols must have zero drift")
        if name not in _BUILDERS:
            raise ParameterError(f"unknown catalog entry {name!r}; known: {', '.join(ENTRY_NAMES)}")
        builder, defaults, formula = _BUILDERS[name]
        merged = dict(defaults)
        if params:
            unknown = set(params) - set(defaults)
            if unknown:
                raise ParameterError(f"unknown parameters for {name}: {sorted(unknown)}")
            merged.update({k: float(v) for k, v in params.items()})
        if not (lam_scale > 0 and math.isfinite(lam_scale)):
            raise ParameterError("lam_scale must be positive and finite")
        self.name = name
        self.params = merged
        self.formula = formula
        self.lam_scale = float(lam_scale)
        self.drift = 0.0
        self._raw, self._raw_deriv, self._raw_levy = builder(merged)
        self.c0 = float(self._raw(np.array([self.lam_scale]))[0])
        if not (self.c0 > 0 and math.isfinite(self.c0)):
            raise ParameterError("normalization constant is not positive and finite")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        if np.any(np.isnan(lam_arr)) or np.any(lam_arr < 0):
            raise DomainError("phi is defined for lambda >= 0 only")
        flat = np.atleast_1d(lam_arr).ravel()
        out = np.zeros_like(flat)
        pos = flat > 0
        out[pos] = self._raw(flat[pos] * self.lam_scale) / self.c0
        out = out.reshape(np.shape(lam_arr))
        return float(out) if np.ndim(lam_arr) == 0 else out

    evaluate = __call__

    def deriv(self, lam, n: int):
        """n-th derivative of phi (1 <= n <= 6) at ``lam > 0``."""
        if not (1 <= n <= 6):
            raise ParameterError("derivative order must be between 1 and 6")
        lam_arr = np.asarray(lam, dtype=float)
        if np.any(~(lam_arr > 0)):
            raise DomainError("derivatives are evaluated at lambda > 0")
        if self._raw_deriv is not None:
            out = self.lam_scale ** n * self._raw_deriv(lam_arr * self.lam_scale, n) / self.c0
        else:
            out = self.log_derivative_ratio(lam_arr, n) * self(lam_arr) / lam_arr ** n
        return float(out) if np.ndim(lam_arr) == 0 else out

    def log_derivative_ratio(self, lam, n: int, step: float = 0.4,
                             rtol: float = 1e-4) -> np.ndarray:
        """``lam**n D**n phi(lam) / phi(lam)`` by differences in ``log lam``.

        Central differences of ``s -> phi(exp s)`` at steps ``step / 2**i``
        are combined by two Richardson passes. Two such extrapolations
        (coarse and fine) are compared and a :class:`ToleranceError` is
        raised when they disagree by more than ``rtol``.
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        s = np.log(lam)
        fine = step / 8.0
        offs = np.arange(-24, 25)
        samples = self(np.exp(s[:, None] + offs[None, :] * fine))
        phi0 = samples[:, 24]
        ders = {}
        for k in range(1, n + 1):
            hw = (k + 1) // 2
            w = _central_weights(k, hw)
            est = []
            for i in range(4):  # h = step / 2**i
                stride = 2 ** (3 - i)
                h = step / 2 ** i
                idx = 24 + np.arange(-hw, hw + 1) * stride
                est.append(samples[:, idx] @ w / h ** k)
            r1 = [(4.0 * est[i + 1] - est[i]) / 3.0 for i in range(3)]
            r2 = [(16.0 * r1[i + 1] - r1[i]) / 15.0 for i in range(2)]
            ders[k] = (r2[0], r2[1])
        coeffs = stirling_first(n)
        coarse = sum(coeffs[k] * ders[k][0] for k in range(1, n + 1))
        finer = sum(coeffs[k] * ders[k][1] for k in range(1, n + 1))
        scale = np.abs(finer) + 1e-10 * np.abs(phi0)
        bad = np.abs(coarse - finer) > rtol * scale
        if np.any(bad):
            raise ToleranceError(
                f"derivative of order {n} unstable under step refinement at lambda={lam[bad][0]:.3g}")
        return finer / phi0

    def inverse(self, y):
        """Solve ``phi(lam) = y`` for ``lam`` (relative residual below 1e-12)."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(~(y_arr > 0)) or np.any(~np.isfinite(y_arr)):
            raise DomainError("inverse needs finite y > 0")
        out = np.array([self._inverse_one(v) for v in y_arr.ravel()]).reshape(y_arr.shape)
        return float(out[0]) if np.ndim(y) == 0 else out

    def _inverse_one(self, y: float) -> float:
        logy = math.log(y)
        f = lambda s: math.log(self(math.exp(s))) - logy
        lo, hi = -1.0, 1.0
        while f(lo) > 0:
            lo *= 2.0
            if lo < -700:
                raise DomainError(f"value {y} below the numerical range of phi")
        while f(hi) < 0:
            hi *= 2.0
            if hi > 700:
                raise DomainError(f"value {y} above the numerical range of phi")
        s = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        return math.exp(s)

    def a_t(self, t: float) -> float:
        """Characteristic length ``1 / sqrt(phi^{-1}(1/t))``."""
        if not t > 0:
            raise DomainError("t must be positive")
        return 1.0 / math.sqrt(self.inverse(1.0 / t))

    def scaled(self, a: float) -> "BernsteinFunction":
        """Symbol ``lam -> phi(lam / a**2) / phi(1 / a**2)``."""
        if not a > 0:
            raise DomainError("scale a must be positive")
        return BernsteinFunction(self.name, self.params, self.lam_scale / a ** 2)

    # -- Levy measure -------------------------------------------------------

    @property
    def supports_levy_density(self) -> bool:
        return self._raw_levy is not None

    def levy_measure_density(self, s):
        """Density of the measure mu in ``phi(lam) = int (1 - e^{-lam s}) mu(ds)``."""
        if self._raw_levy is None:
            from .reports import UnsupportedEntry
            raise UnsupportedEntry(f"no closed-form Levy measure for entry {self.name!r}")
        s = np.asarray(s, dtype=float)
        return self._raw_levy(s / self.lam_scale) / (self.lam_scale * self.c0)

    # -- misc ---------------------------------------------------------------

    def elasticity(self, lam):
        """``lam phi'(lam) / phi(lam)``."""
        lam = np.asarray(lam, dtype=float)
        return lam * self.deriv(lam, 1) / self(lam)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params),
                "normalization": self.c0, "lam_scale": self.lam_scale}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        extra = "" if self.lam_scale == 1.0 else f", lam_scale={self.lam_scale:g}"
        return f"BernsteinFunction({self.name}: {args}{extra})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, BernsteinFunction) and self.name == other.name
                and self.params == other.params and self.lam_scale == other.lam_scale)

    def __hash__(self) -> int:
        return hash((self.name, tuple(sorted(self.params.items())), self.lam_scale))


def make(name: str, **params: float) -> BernsteinFunction:
    return BernsteinFunction(name, params)


def phi_scaled(phi: BernsteinFunction, a: float, lam):
    return phi.scaled(a)(lam)


# ---------------------------------------------------------------------------
# scaling exponents


@dataclass(frozen=True)
class ScalingExponents:
    """Exponents and constants of the two-sided power scaling of phi.

    Large scales: ``a1 lam^d1 phi(t) <= phi(lam t) <= a2 lam^d2 phi(t)`` for
    ``lam, t >= 1``. Small scales: ``phi(lam t) <= a3 lam^d3 phi(t)`` for
    ``lam, t <= 1``.
    """

    delta1: float
    delta2: float
    delta3: float
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.delta1 <= self.delta2 < 1.0):
            raise ScalingViolation(
                f"large-scale exponents must satisfy 0 < d1 <= d2 < 1, got {self.delta1}, {self.delta2}")
        if not (0.0 < self.delta3 <= 1.0):
            raise ScalingViolation(f"small-scale exponent must lie in (0, 1], got {self.delta3}")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("delta1", "delta2", "delta3", "a1", "a2", "a3")}


def check_scaling_conditions(phi: BernsteinFunction,
                             lattice: LogLattice = LogLattice()) -> ScalingExponents:
    """Fit scaling exponents on a lattice and check the universal bounds.

    Every normalized Bernstein function satisfies
    ``min(1, lam) <= phi(lam t) / phi(t) <= max(1, lam)``; a violation on
    the lattice raises :class:`ScalingViolation`. Exponents are the extremal
    secant slopes of ``log phi`` against ``log lam`` on the relevant branch
    (products ``lam * t`` lie on the same log grid, so the returned
    constants are exact on lattice points).
    """
    if lattice.per_decade < 40 or lattice.lo > 1e-4 or lattice.hi < 1e4:
        raise ParameterError("scaling lattice must cover [1e-4, 1e4] with >= 40 points per decade")
    pts = lattice.points()
    m = len(pts)
    k_lo = round(math.log10(lattice.lo) * lattice.per_decade)
    u = 10.0 ** (np.arange(2 * k_lo, 2 * (k_lo + m - 1) + 1) / lattice.per_decade)
    logphi = np.log(phi(u))
    if not np.all(np.isfinite(logphi)):
        raise ScalingViolation("phi is not positive and finite on the lattice")
    i = np.arange(m)
    # ratio[i, j] = phi(pts[i] * pts[j]) / phi(pts[j])
    # index of pts[j] on the u grid: offset -k_lo from its exponent
    log_ratio = logphi[i[:, None] + i[None, :]] - logphi[i[None, :] - k_lo]
    log_lam = np.log(pts)[:, None]
    tol = 1e-12
    low = np.minimum(0.0, log_lam)
    high = np.maximum(0.0, log_lam)
    viol = (log_ratio < low - tol) | (log_ratio > high + tol)
    if np.any(viol):
        a, b = np.argwhere(viol)[0]
        raise ScalingViolation(
            f"universal scaling bound fails at lam={pts[a]:.4g}, t={pts[b]:.4g}",
            point=(float(pts[a]), float(pts[b])))
    slopes = np.diff(logphi) / np.diff(np.log(u))
    mid = 0.5 * (u[1:] + u[:-1])
    big = mid >= 1.0
    delta1 = float(slopes[big].min())
    delta2 = float(slopes[big].max())
    delta3 = float(slopes[~big].min())
    ge = pts >= 1.0
    le = pts <= 1.0
    r_big = log_ratio[np.ix_(ge, ge)]
    r_small = log_ratio[np.ix_(le, le)]
    a1 = float(np.exp((r_big - delta1 * log_lam[ge]).min()))
    a2 = float(np.exp((r_big - delta2 * log_lam[ge]).max()))
    a3 = float(np.exp((r_small - delta3 * log_lam[le]).max()))
    return ScalingExponents(delta1, delta2, min(delta3, 1.0), a1, a2, a3)


def verify_derivative_ratio(phi: BernsteinFunction, n: int,
                            lattice: LogLattice = LogLattice(1e-6, 1e6, 40),
                            tolerance: float = 0.05) -> BoundReport:
    """Largest ``lam**n |D**n phi| / phi`` over the lattice, with refinement."""
    if not (1 <= n <= 4):
        raise ParameterError("derivative-ratio check covers orders 1..4")

    def sup(lat: LogLattice) -> float:
        lam = lat.points()
        if phi._raw_deriv is not None:
            vals = lam ** n * np.abs(phi.deriv(lam, n)) / phi(lam)
        else:
            vals = np.abs(phi.log_derivative_ratio(lam, n))
        return float(vals.max())

    coarse = sup(lattice)
    fine = sup(lattice.refined())
    return BoundReport("lem3.2", {"lo": lattice.lo, "hi": lattice.hi,
                                  "per_decade": lattice.per_decade, "order": n},
                       coarse, relative_drift(coarse, fine), tolerance, fine)


def tail_integral_ratio(phi: BernsteinFunction, lam: float, sqrt_variant: bool = False,
                        epsrel: float = 1e-10, chunk: float = 4.0) -> float:
    """``int_{1/lam}^inf r^{-1} psi(r^{-2}) dr / psi(lam^2)`` with psi = phi or sqrt(phi).

    Substituting ``u = r^{-2}`` and ``v = log u`` the integral becomes
    ``(1/2) int_{-inf}^{log lam^2} psi(e^v) dv``; the lower end is cut where
    the integrand drops below ``1e-16 psi(lam^2)``.
    """
    psi = (lambda x: np.sqrt(phi(x))) if sqrt_variant else phi
    top = 2.0 * math.log(lam)
    ref = float(psi(lam ** 2))
    v_low = top
    while float(psi(math.exp(v_low))) > 1e-16 * ref:
        v_low -= chunk
        if v_low < -1400:
            break
    edges = np.arange(top, v_low - chunk, -chunk)[::-1]
    edges[0] = max(edges[0], v_low)
    total = 0.0
    g = lambda v: float(psi(math.exp(v)))
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(g, a, b, epsabs=0.0, epsrel=epsrel, limit=200)
        total += val
    return 0.5 * total / ref


def verify_tail_integral(phi: BernsteinFunction, sqrt_variant: bool = False,
                         lambdas: np.ndarray | None = None,
                         tolerance: float = 0.05) -> BoundReport:
    """Largest tail-integral ratio over ``lambdas``, refined via quadrature accuracy."""
    if lambdas is None:
        lambdas = np.geomspace(1e-4, 1e4, 33)
    coarse_vals = np.array([tail_integral_ratio(phi, l, sqrt_variant, 1e-7, 8.0) for l in lambdas])
    fine_vals = np.array([tail_integral_ratio(phi, l, sqrt_variant, 1e-11, 2.0) for l in lambdas])
    ident = "cor3.10" if sqrt_variant else "lem3.9"
    return BoundReport(ident, {"lambdas": [float(lambdas[0]), float(lambdas[-1]), len(lambdas)]},
                       float(coarse_vals.max()),
                       relative_drift(coarse_vals.max(), fine_vals.max()), tolerance,
                       float(fine_vals.max()), details={"ratios": fine_vals})


# ---------------------------------------------------------------------------


@dataclass
class CatalogEntry:
    function: BernsteinFunction
    exponents: ScalingExponents
    supports_levy_density: bool

    def to_dict(self) -> dict:
        d = self.function.to_dict()
        d["exponents"] = self.exponents.to_dict()
        d["supports_levy_density"] = self.supports_levy_density
        d["formula"] = self.function.formula
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def catalog_entry(name: str, **params: float) -> CatalogEntry:
    phi = BernsteinFunction(name, params)
    return CatalogEntry(phi, check_scaling_conditions(phi), phi.supports_levy_density)


def default_catalog() -> dict[str, BernsteinFunction]:
    return {name: BernsteinFunction(name) for name in ENTRY_NAMES}


def entry_from_dict(data: Mapping) -> BernsteinFunction:
    """Rebuild a function from its JSON form (``name`` and ``params``)."""
    return BernsteinFunction(data["name"], data.get("params"), data.get("lam_scale", 1.0))
