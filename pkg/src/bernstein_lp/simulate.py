"""Monte Carlo samplers for subordinators and subordinate Brownian motion.

Brownian motion here has ``E exp(i xi W_t) = exp(-t |xi|^2)``, i.e. variance
``2t`` per coordinate, so ``X_t = sqrt(2 S_t) Z`` with ``Z`` standard normal.

Exact subordinator routes exist for the stable, two_power and relativistic
entries; every entry can be sampled through the radial inverse CDF built from
the kernel engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, special, stats

from .catalog import BernsteinFunction
from .kernels import _sphere_area, density, mass_within
from .reports import ParameterError, QuadratureError, SamplingError
from .spde import PURPOSE_SAMPLER, philox_generator

CHUNK = 1 << 18
MIN_GOF_SAMPLES = 100_000


def _chunks(count: int):
    for i, start in enumerate(range(0, count, CHUNK)):
        yield i, min(CHUNK, count - start)


# ---------------------------------------------------------------------------
# one-sided stable laws


def _kanter(a: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Unit one-sided stable draws with ``E exp(-lam S) = exp(-lam^a)``."""
    u = rng.uniform(0.0, 1.0, size) * np.pi
    e = rng.standard_exponential(size)
    A = (np.sin(a * u) ** (a / (1.0 - a)) * np.sin((1.0 - a) * u)
         / np.sin(u) ** (1.0 / (1.0 - a)))
    return (A / e) ** ((1.0 - a) / a)


def sample_stable_subordinator(alpha_sub: float, t: float, count: int, seed: int = 0,
                               stream: int = 0) -> np.ndarray:
    """``count`` draws of ``S_t`` for the Laplace exponent ``lam^alpha_sub``."""
    if not 0.0 < alpha_sub < 1.0:
        raise ParameterError("alpha_sub must lie in (0, 1)")
    if t < 0:
        raise ParameterError("time must be nonnegative")
    out = np.zeros(count)
    if t == 0 or count == 0:
        return out
    pos = 0
    for i, size in _chunks(count):
        rng = philox_generator(seed, (stream << 20) + i, PURPOSE_SAMPLER)
        out[pos:pos + size] = t ** (1.0 / alpha_sub) * _kanter(alpha_sub, size, rng)
        pos += size
    return out


def stable_half_density(s, t: float) -> np.ndarray:
    """Density of ``S_t`` for exponent 1/2: ``t exp(-t^2/(4s)) / (2 sqrt(pi) s^{3/2})``."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = t * np.exp(-t * t / (4.0 * s[pos])) / (2.0 * math.sqrt(math.pi) * s[pos] ** 1.5)
    return out


def stable_half_cdf(s, t: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = special.erfc(t / (2.0 * np.sqrt(s[pos])))
    return out


def laplace_check(samples: np.ndarray, exponent, t: float, lams=(0.5, 1.0, 2.0)) -> dict:
    """Sample means of ``exp(-lam S)`` against ``exp(-t exponent(lam))``."""
    rows = []
    for lam in lams:
        v = np.exp(-lam * samples)
        mc = float(v.mean())
        se = float(v.std(ddof=1) / math.sqrt(len(v)))
        exact = math.exp(-t * float(exponent(lam)))
        z = abs(mc - exact) / se if se > 0 else (0.0 if math.isclose(mc, exact) else math.inf)
        rows.append({"lam": lam, "monte_carlo": mc, "exact": exact, "std_err": se, "z": z})
    return {"rows": rows, "pass": all(r["z"] <= 3.0 for r in rows)}


# ---------------------------------------------------------------------------
# exact subordinators for normalized catalog entries


@dataclass(frozen=True)
class SubordinatorSampler:
    """Exact sampler of ``S_t`` whose Laplace exponent is the normalized ``phi``.

    ``kind`` is ``stable``, ``stable_sum`` (two_power: independent stable
    summands) or ``tempered`` (relativistic: exponential tilting by rejection).
    """

    phi: BernsteinFunction
    seed: int = 0

    @property
    def kind(self) -> str:
        return {"stable": "stable", "two_power": "stable_sum",
                "relativistic": "tempered"}.get(self.phi.name, "unsupported")

    @staticmethod
    def supports(phi: BernsteinFunction) -> bool:
        return phi.name in ("stable", "two_power", "relativistic")

    def _terms(self) -> list[tuple[float, float]]:
        """Stable exponents and time weights: ``phi(lam) = sum kappa lam^a`` (before tilting)."""
        p, s, c0 = self.phi.params, self.phi.lam_scale, self.phi.c0
        if self.phi.name == "stable":
            return [(p["alpha"] / 2.0, 1.0)]
        if self.phi.name == "two_power":
            return [(p["alpha"], s ** p["alpha"] / c0), (p["beta"], s ** p["beta"] / c0)]
        a = p["alpha"] / 2.0
        return [(a, s ** a / c0)]

    def sample(self, t: float, count: int, stream: int = 0) -> np.ndarray:
        if not self.supports(self.phi):
            raise ParameterError(f"no exact subordinator sampler for {self.phi.name}")
        if t < 0:
            raise ParameterError("time must be nonnegative")
        if t == 0:
            return np.zeros(count)
        terms = self._terms()
        if self.kind != "tempered":
            out = np.zeros(count)
            for j, (a, kappa) in enumerate(terms):
                out += sample_stable_subordinator(a, t * kappa, count, self.seed, 2 * stream + j)
            return out
        return self._tempered(t, count, stream)

    def _tempered(self, t: float, count: int, stream: int) -> np.ndarray:
        (a, kappa), = self._terms()
        shift = self.phi.params["m"] ** (1.0 / a) / self.phi.lam_scale
        tau = t * kappa
        accept_rate = math.exp(-tau * shift ** a)
        if accept_rate < 1e-4:
            raise ParameterError("tempered rejection sampler too inefficient at this time")
        out = np.empty(count)
        filled, batch = 0, 0
        while filled < count:
            need = count - filled
            size = int(min(1 << 22, max(1024, 1.2 * need / accept_rate)))
            rng = philox_generator(self.seed, (stream << 20) + batch, PURPOSE_SAMPLER)
            s = tau ** (1.0 / a) * _kanter(a, size, rng)
            keep = s[rng.uniform(size=size) < np.exp(-shift * s)][:need]
            out[filled:filled + len(keep)] = keep
            filled += len(keep)
            batch += 1
        return out


@dataclass
class PathSample:
    times: np.ndarray   # (J+1,) starting at 0
    S: np.ndarray       # (count, J+1) nondecreasing
    X: np.ndarray       # (count, J+1, d)


def sample_paths(phi: BernsteinFunction, d: int, times, count: int, seed: int = 0) -> PathSample:
    """Paths on a time lattice from independent subordinator increments."""
    times = np.concatenate(([0.0], np.asarray(times, dtype=float)))
    if np.any(np.diff(times) <= 0):
        raise ParameterError("times must be positive and increasing")
    sampler = SubordinatorSampler(phi, seed)
    dS = np.stack([sampler.sample(float(dt), count, stream=j + 1)
                   for j, dt in enumerate(np.diff(times))], axis=1)
    rng = philox_generator(seed, 1 << 30, PURPOSE_SAMPLER)
    dX = np.sqrt(2.0 * dS)[..., None] * rng.standard_normal(dS.shape + (d,))
    S = np.concatenate((np.zeros((count, 1)), np.cumsum(dS, axis=1)), axis=1)
    X = np.concatenate((np.zeros((count, 1, d)), np.cumsum(dX, axis=1)), axis=1)
    return PathSample(times, S, X)


def increment_independence(path: PathSample) -> dict:
    """Rank autocorrelation of consecutive subordinator increments (~N(0, 1/n))."""
    dS = np.diff(path.S, axis=1)
    rows = []
    for j in range(dS.shape[1] - 1):
        rho = stats.spearmanr(dS[:, j], dS[:, j + 1]).statistic
        rows.append({"lag_pair": j, "rho": float(rho), "std_err": 1.0 / math.sqrt(len(dS))})
    return {"rows": rows, "pass": all(abs(r["rho"]) <= 3.0 * r["std_err"] for r in rows),
            "monotone": bool(np.all(dS >= 0))}


# ---------------------------------------------------------------------------
# radial inverse CDF


class RadialCdfTable:
    """``F(r) = P(|X_t| <= r)`` on a log lattice, inverted with monotone cubics.

    Below the first node ``F ~ c r^d``; beyond the last node the tail is a
    power law fitted to the final two nodes.
    """

    def __init__(self, phi: BernsteinFunction, d: int, t: float, per_decade: int = 24,
                 span: tuple[float, float] = (1e-4, 1e4), tail_floor: float = 1e-9):
        self.phi, self.d, self.t = phi, d, t
        scale = phi.a_t(t)
        radii, cdf = [], []
        for r in scale * np.logspace(math.log10(span[0]), math.log10(span[1]),
                                     int(per_decade * math.log10(span[1] / span[0])) + 1):
            try:
                F = mass_within(phi, d, t, float(r))
            except QuadratureError:
                break  # the power-law tail takes over beyond this radius
            radii.append(r)
            cdf.append(F)
            if 1.0 - F < tail_floor:
                break
        self.r = np.array(radii)
        self.F = np.array(cdf)
        steps = np.diff(self.F)
        if self.F[0] <= 0 or np.any(steps <= 0) or self.F[-1] >= 1.0:
            bad = int(np.argmin(steps)) if len(steps) else 0
            raise SamplingError(f"radial CDF is not strictly increasing near r={self.r[bad]:.4g}")
        self._inv = interpolate.PchipInterpolator(self.F, np.log(self.r))
        q0, q1 = 1.0 - self.F[-2], 1.0 - self.F[-1]
        self.tail_exponent = math.log(q0 / q1) / math.log(self.r[-1] / self.r[-2])

    def cdf(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        lo, hi = r < self.r[0], r > self.r[-1]
        mid = ~(lo | hi)
        out[lo] = self.F[0] * (r[lo] / self.r[0]) ** self.d
        out[hi] = 1.0 - (1.0 - self.F[-1]) * (r[hi] / self.r[-1]) ** (-self.tail_exponent)
        if np.any(mid):
            fwd = interpolate.PchipInterpolator(np.log(self.r), self.F)
            out[mid] = fwd(np.log(r[mid]))
        return out

    def quantile(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        lo, hi = u < self.F[0], u > self.F[-1]
        mid = ~(lo | hi)
        out[lo] = self.r[0] * (u[lo] / self.F[0]) ** (1.0 / self.d)
        out[hi] = self.r[-1] * ((1.0 - u[hi]) / (1.0 - self.F[-1])) ** (-1.0 / self.tail_exponent)
        out[mid] = np.exp(self._inv(u[mid]))
        return out


def _uniform_directions(rng: np.random.Generator, size: int, d: int) -> np.ndarray:
    z = rng.standard_normal((size, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_sbm(phi: BernsteinFunction, d: int, t: float, count: int, seed: int = 0,
               route: str = "auto", table: RadialCdfTable | None = None) -> np.ndarray:
    """``count`` draws of ``X_t`` in ``R^d``; returns shape ``(count, d)``.

    ``route`` is ``exact`` (subordinator then Gaussian), ``inverse_cdf`` or
    ``auto`` (exact when available).
    """
    if d < 1 or count < 0:
        raise ParameterError("need d >= 1 and count >= 0")
    if route == "auto":
        route = "exact" if SubordinatorSampler.supports(phi) else "inverse_cdf"
    if t == 0:
        return np.zeros((count, d))
    out = np.empty((count, d))
    if route == "exact":
        S = SubordinatorSampler(phi, seed).sample(t, count)
        pos = 0
        for i, size in _chunks(count):
            rng = philox_generator(seed, (1 << 31) + i, PURPOSE_SAMPLER)
            out[pos:pos + size] = np.sqrt(2.0 * S[pos:pos + size])[:, None] * rng.standard_normal((size, d))
            pos += size
        return out
    if route != "inverse_cdf":
        raise ParameterError(f"unknown route {route!r}")
    table = table or RadialCdfTable(phi, d, t)
    pos = 0
    for i, size in _chunks(count):
        rng = philox_generator(seed, (1 << 32) + i, PURPOSE_SAMPLER)
        radius = table.quantile(rng.uniform(size=size))
        out[pos:pos + size] = radius[:, None] * _uniform_directions(rng, size, d)
        pos += size
    return out


# ---------------------------------------------------------------------------
# goodness of fit


def radial_bin_probabilities(phi: BernsteinFunction, d: int, t: float, edges: np.ndarray,
                             nodes: int = 16, near: float = 100.0) -> np.ndarray:
    """``P(edges[i] <= |X_t| < edges[i+1])``.

    Bins inside ``near * a_t`` integrate the density table by Gauss-Legendre;
    farther bins use differences of the ball mass, which stays cheap where the
    oscillatory density quadrature does not.
    """
    edges = np.asarray(edges, dtype=float)
    cut = near * phi.a_t(t)
    inner = edges[1:] <= cut
    out = np.empty(len(edges) - 1)
    if np.any(inner):
        x, w = np.polynomial.legendre.leggauss(nodes)
        a, b = edges[:-1][inner, None], edges[1:][inner, None]
        r = 0.5 * (b - a) * x[None] + 0.5 * (b + a)
        vals = density(phi, d, t, r.ravel()).values.reshape(r.shape)
        jac = 2.0 if d == 1 else _sphere_area(d) * r ** (d - 1)
        out[inner] = np.sum(0.5 * (b - a) * w[None] * jac * vals, axis=1)
    if not np.all(inner):
        far = np.flatnonzero(~inner)
        F = {i: mass_within(phi, d, t, float(edges[i])) for i in range(far[0], far[-1] + 2)}
        for i in far:
            out[i] = F[i + 1] - F[i]
    return out


def _feasible_edges(phi: BernsteinFunction, d: int, t: float, edges: np.ndarray) -> np.ndarray:
    """Drop outer edges whose ball mass exceeds the quadrature panel budget."""
    keep = len(edges)
    while keep > 2:
        try:
            mass_within(phi, d, t, float(edges[keep - 1]))
            break
        except QuadratureError:
            keep -= 1
    return edges[:keep]


def histogram_vs_density(samples: np.ndarray, phi: BernsteinFunction, d: int, t: float,
                         bins: int = 60, level: float = 0.01) -> dict:
    """Chi-square on radial bins and, for d=1, KS against the radial CDF table.

    Bins are equiprobable under the sample and cover the central 99.9% of the
    radial mass; the remainder forms one overflow bin. Very heavy tails can
    push the outer edges past the quadrature budget, in which case those bins
    merge into the overflow and ``sample_coverage`` reports the binned share.
    """
    samples = np.asarray(samples, dtype=float).reshape(len(samples), -1)
    if len(samples) < MIN_GOF_SAMPLES:
        raise SamplingError(f"need at least {MIN_GOF_SAMPLES} samples")
    if samples.shape[1] != d:
        raise ParameterError("sample dimension does not match d")
    radius = np.linalg.norm(samples, axis=1)
    edges = np.quantile(radius, np.linspace(0.0, 0.999, bins + 1))
    edges[0] = 0.0
    edges = _feasible_edges(phi, d, t, np.unique(edges))
    probs = radial_bin_probabilities(phi, d, t, edges)
    tail = max(0.0, 1.0 - float(np.sum(probs)))
    counts = np.histogram(radius, bins=edges)[0]
    observed = np.append(counts, np.sum(radius >= edges[-1]))
    expected = len(radius) * np.append(probs, tail)
    expected *= observed.sum() / expected.sum()
    chi2 = stats.chisquare(observed, expected, ddof=0)
    out = {"samples": len(radius), "bins": len(edges) - 1, "chi2": float(chi2.statistic),
           "chi2_pvalue": float(chi2.pvalue), "chi2_pass": bool(chi2.pvalue > level),
           "table_mass_in_range": float(np.sum(probs)),
           "sample_coverage": float(np.mean(radius < edges[-1]))}
    if d == 1:
        table = RadialCdfTable(phi, d, t)
        cdf = lambda x: 0.5 + 0.5 * np.sign(x) * table.cdf(np.abs(x))
        ks = stats.kstest(samples[:, 0], cdf)
        out.update(ks=float(ks.statistic), ks_pvalue=float(ks.pvalue))
    out["pass"] = out["chi2_pass"]
    return out


def ks_distance(samples: np.ndarray, cdf) -> float:
    return float(stats.kstest(np.ravel(samples), cdf).statistic)


def cauchy_cdf(x) -> np.ndarray:
    return 0.5 + np.arctan(np.asarray(x, dtype=float)) / np.pi


def isotropy_check(samples: np.ndarray, bins: int = 32, level: float = 0.01) -> dict:
    """First coordinate of ``X/|X|`` mapped to ``Beta((d-1)/2, (d-1)/2)`` on [0, 1]."""
    d = samples.shape[1]
    if d < 2:
        raise ParameterError("isotropy needs d >= 2")
    norm = np.linalg.norm(samples, axis=1)
    u = samples[norm > 0, 0] / norm[norm > 0]
    a = 0.5 * (d - 1)
    v = stats.beta.cdf(0.5 * (u + 1.0), a, a)
    counts = np.histogram(v, bins=bins, range=(0.0, 1.0))[0]
    res = stats.chisquare(counts)
    return {"chi2": float(res.statistic), "pvalue": float(res.pvalue), "pass": bool(res.pvalue > level)}


def stable_scaling_check(alpha: float, d: int, t: float, count: int, seed: int = 0,
                         level: float = 0.01) -> dict:
    """Two-sample KS of ``X_t`` against ``t^{1/alpha} X_1`` for ``phi = lam^{alpha/2}``."""
    from .catalog import make

    phi = make("stable", alpha=alpha)
    xt = sample_sbm(phi, d, t, count, seed)[:, 0]
    x1 = sample_sbm(phi, d, 1.0, count, seed + 1)[:, 0] * t ** (1.0 / alpha)
    res = stats.ks_2samp(xt, x1)
    return {"ks": float(res.statistic), "pvalue": float(res.pvalue), "pass": bool(res.pvalue > level)}


def coordinate_mean_check(samples: np.ndarray) -> dict:
    """Coordinate means against zero after symmetric clipping (tails may lack a mean)."""
    c = float(np.quantile(np.abs(samples), 0.999))
    clipped = np.clip(samples, -c, c)
    mean = clipped.mean(axis=0)
    se = clipped.std(axis=0, ddof=1) / math.sqrt(len(samples))
    z = np.abs(mean) / se
    return {"mean": mean.tolist(), "z": z.tolist(), "pass": bool(np.all(z <= 3.0))}


def write_samples(path, samples: np.ndarray, meta: dict | None = None) -> None:
    """Little-endian float64 rows of shape ``(count, d)`` plus a JSON sidecar."""
    import json

    arr = np.ascontiguousarray(samples, dtype="<f8")
    arr.tofile(str(path))
    info = {"count": int(arr.shape[0]), "d": int(arr.shape[1]) if arr.ndim > 1 else 1,
            "dtype": "<f8", **(meta or {})}
    with open(f"{path}.json", "w") as fh:
        json.dump(info, fh, indent=2)


def read_samples(path) -> np.ndarray:
    import json

    with open(f"{path}.json") as fh:
        info = json.load(fh)
    return np.fromfile(str(path), dtype="<f8").reshape(info["count"], info["d"])
