"""Spectral solver for ``du = (phi(Delta) u + f) dt + sum_k g^k dw^k`` on the torus.

Each Fourier mode is advanced with the exponential integrator

    u_{m+1} = E u_m + (1 - E) / phi f_m + E sum_k g^k_m dW^k_m,   E = exp(-dt phi),

which integrates the linear part exactly (the zero mode uses ``dt f_m``).
Wiener increments come from counter-based Philox streams keyed by
``(seed, replica, purpose)``, so results do not depend on batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .catalog import BernsteinFunction
from .reports import BoundReport, ParameterError, relative_drift
from .spectral import SpaceTimeField, TorusGrid, parabolic_multiplier_apply

PURPOSE_WIENER = 1
PURPOSE_SAMPLER = 2


def philox_generator(seed: int, replica: int, purpose: int) -> np.random.Generator:
    """Independent stream for ``(seed, replica, purpose)`` via the Philox counter."""
    if seed < 0 or replica < 0:
        raise ParameterError("seed and replica must be nonnegative")
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, purpose], dtype=np.uint64)
    counter = np.array([0, 0, replica, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


@dataclass(frozen=True)
class WienerBundle:
    """K independent Brownian motions on ``[0, T]`` sampled at ``finest`` steps.

    Coarser increments (``M`` dividing ``finest``) are sums of finer ones, so
    solutions at different resolutions share one path per replica.
    """

    seed: int
    channels: int
    T: float
    finest: int

    def increments(self, replica: int, M: int | None = None) -> np.ndarray:
        M = self.finest if M is None else M
        if self.finest % M:
            raise ParameterError("coarse step count must divide the finest one")
        rng = philox_generator(self.seed, replica, PURPOSE_WIENER)
        dw = rng.standard_normal((self.finest, self.channels)) * math.sqrt(self.T / self.finest)
        return dw.reshape(M, self.finest // M, self.channels).sum(axis=1)


@dataclass
class SpdeProblem:
    """Linear problem data on a torus.

    ``f`` has one channel and ``g`` has K channels; both are sampled at
    ``t_m = m T / M`` for ``m < M``. Either may be ``None``.
    """

    phi: BernsteinFunction
    grid: TorusGrid
    T: float
    M: int
    f: SpaceTimeField | None = None
    g: SpaceTimeField | None = None

    def __post_init__(self):
        if self.M < 1 or not self.T > 0:
            raise ParameterError("need M >= 1 and T > 0")
        for name in ("f", "g"):
            fld = getattr(self, name)
            if fld is not None and (fld.steps != self.M or fld.grid != self.grid
                                    or not math.isclose(fld.dt, self.dt)):
                raise ParameterError(f"{name} is not sampled on the problem lattice")
        if self.f is not None and self.f.channels != 1:
            raise ParameterError("f must have a single channel")

    @property
    def dt(self) -> float:
        return self.T / self.M

    @property
    def channels(self) -> int:
        return 0 if self.g is None else self.g.channels

    def _axes(self, ndim: int) -> tuple[int, ...]:
        return tuple(range(ndim - self.grid.d, ndim))

    def f_hat(self) -> np.ndarray:
        if self.f is None:
            return np.zeros((self.M,) + self.grid.shape, dtype=complex)
        return sfft.fftn(self.f.values[:, 0], axes=self._axes(self.f.values.ndim - 1))

    def g_hat(self) -> np.ndarray:
        if self.g is None:
            return np.zeros((self.M, 0) + self.grid.shape, dtype=complex)
        return sfft.fftn(self.g.values, axes=self._axes(self.g.values.ndim))

    def factors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symbol, one-step decay ``E`` and forcing weight ``(1 - E)/phi``."""
        sym = self.grid.symbol(self.phi)
        E = np.exp(-self.dt * sym)
        with np.errstate(invalid="ignore", divide="ignore"):
            D = np.where(sym > 0, -np.expm1(-self.dt * sym) / np.where(sym > 0, sym, 1.0), self.dt)
        return sym, E, D

    @property
    def parseval(self) -> float:
        """``||u||_2^2 = parseval * sum |u_hat|^2`` for unnormalized FFTs."""
        return self.grid.L ** self.grid.d / self.grid.n ** (2 * self.grid.d)


@dataclass
class SpdeSolution:
    times: np.ndarray
    energy_T: np.ndarray               # per replica ||u(T)||_2^2
    dissipation: np.ndarray            # per replica sum_m dt ||phi^{1/2} u_m||_2^2
    paths: np.ndarray | None = None    # (R, M+1, n, ..., n) when kept
    norm_sums: dict = field(default_factory=dict)  # p -> per-replica arrays

    @property
    def replicas(self) -> int:
        return len(self.energy_T)


def solve_deterministic(problem: SpdeProblem) -> np.ndarray:
    """Deterministic limb (``g`` ignored); returns ``u`` at ``t_0..t_M``."""
    _, E, D = problem.factors()
    fh = problem.f_hat()
    uh = np.zeros((problem.M + 1,) + problem.grid.shape, dtype=complex)
    for m in range(problem.M):
        uh[m + 1] = E * uh[m] + D * fh[m]
    return sfft.ifftn(uh, axes=problem._axes(uh.ndim)).real


def phi_u_via_multiplier(problem: SpdeProblem, wrap_tol: float = 1e-12) -> np.ndarray:
    """``phi(|xi|^2) u`` from the space-time multiplier ``phi / (i tau + phi)`` applied to f.

    The zero-padding in time is long enough that the periodic wrap-around of
    the slowest nonzero mode decays below ``wrap_tol``.
    """
    if problem.f is None:
        return np.zeros((problem.M,) + problem.grid.shape)
    sym = problem.grid.symbol(problem.phi)
    slowest = float(np.min(sym[sym > 0])) if np.any(sym > 0) else 1.0
    pad = 1 + math.ceil(-math.log(wrap_tol) / (slowest * problem.T))
    return parabolic_multiplier_apply(problem.f, problem.phi, pad).values[:, 0]


def solve_mild(problem: SpdeProblem, replicas: int, seed: int = 0, keep_paths: bool = False,
               norm_ps: tuple[float, ...] = (), batch: int = 512,
               bundle: WienerBundle | None = None) -> SpdeSolution:
    """Monte Carlo solution over ``replicas`` independent Wiener paths.

    ``norm_ps`` requests per-replica sums ``sum_m dt ||(1+phi) u_m||_p^p`` and
    ``sum_m dt ||phi(Delta) u_m + f_m||_p^p`` (left endpoints ``m < M``).
    """
    if replicas < 1:
        raise ParameterError("need at least one replica")
    K = problem.channels
    if bundle is None:
        bundle = WienerBundle(seed, max(K, 1), problem.T, problem.M)
    sym, E, D = problem.factors()
    fh = problem.f_hat()
    gh = problem.g_hat()
    axes = tuple(range(1, 1 + problem.grid.d))  # arrays are (batch, n, ...) in the sweep
    par = problem.parseval
    M = problem.M
    energy = np.empty(replicas)
    diss = np.empty(replicas)
    paths = np.empty((replicas, M + 1) + problem.grid.shape) if keep_paths else None
    sums = {p: {"bessel": np.zeros(replicas), "drift": np.zeros(replicas)} for p in norm_ps}
    cell = problem.grid.cell_volume
    f_real = None if problem.f is None else problem.f.values[:, 0]
    for start in range(0, replicas, batch):
        stop = min(replicas, start + batch)
        B = stop - start
        dW = np.stack([bundle.increments(r, M) for r in range(start, stop)])  # (B, M, K)
        uh = np.zeros((B,) + problem.grid.shape, dtype=complex)
        dsum = np.zeros(B)
        if keep_paths:
            paths[start:stop, 0] = 0.0
        for m in range(M):
            if norm_ps:
                u_b = sfft.ifftn(uh * (1.0 + sym), axes=axes).real
                drift = sfft.ifftn(-sym * uh, axes=axes).real
                if f_real is not None:
                    drift = drift + f_real[m]
                for p in norm_ps:
                    sums[p]["bessel"][start:stop] += problem.dt * cell * np.sum(
                        np.abs(u_b) ** p, axis=axes)
                    sums[p]["drift"][start:stop] += problem.dt * cell * np.sum(
                        np.abs(drift) ** p, axis=axes)
            noise = 0.0
            if K:
                noise = np.tensordot(dW[:, m, :K], gh[m], axes=(1, 0))
            uh = E * (uh + noise) + D * fh[m]
            dsum += problem.dt * par * np.sum(sym * np.abs(uh) ** 2, axis=axes)
            if keep_paths:
                paths[start:stop, m + 1] = sfft.ifftn(uh, axes=axes).real
        energy[start:stop] = par * np.sum(np.abs(uh) ** 2, axis=axes)
        diss[start:stop] = dsum
    return SpdeSolution(problem.dt * np.arange(M + 1), energy, diss, paths, sums)


# ---------------------------------------------------------------------------
# exact second moments


def second_moments(problem: SpdeProblem) -> dict:
    """Exact ``E ||u(t_M)||^2`` and ``E sum dt ||phi^{1/2} u_m||^2`` of the scheme.

    Obtained per mode from the mean (deterministic limb) and the variance
    recursion ``V_{m+1} = E^2 (V_m + sum_k |g^k_m|^2 dt)``.
    """
    sym, E, D = problem.factors()
    fh = problem.f_hat()
    gh = problem.g_hat()
    mean = np.zeros(problem.grid.shape, dtype=complex)
    var = np.zeros(problem.grid.shape)
    diss = 0.0
    par = problem.parseval
    for m in range(problem.M):
        g2 = np.sum(np.abs(gh[m]) ** 2, axis=0) * problem.dt if problem.channels else 0.0
        var = E ** 2 * (var + g2)
        mean = E * mean + D * fh[m]
        diss += problem.dt * par * np.sum(sym * (np.abs(mean) ** 2 + var))
    return {"energy_T": float(par * np.sum(np.abs(mean) ** 2 + var)), "dissipation": float(diss),
            "variance_T": var}


def variance_closed_form(problem: SpdeProblem) -> np.ndarray:
    """Per-mode variance at ``T`` for time-constant ``g`` as a geometric sum."""
    sym, E, _ = problem.factors()
    gh = problem.g_hat()
    if not np.allclose(gh, gh[:1]):
        raise ParameterError("closed form needs g constant in time")
    g2 = np.sum(np.abs(gh[0]) ** 2, axis=0) * problem.dt
    q = E ** 2
    M = problem.M
    with np.errstate(invalid="ignore", divide="ignore"):
        geo = np.where(q < 1.0, q * (1.0 - q ** M) / np.where(q < 1.0, 1.0 - q, 1.0), float(M))
    return g2 * geo


def ito_isometry_check(problem: SpdeProblem, replicas: int, seed: int = 0) -> dict:
    """Monte Carlo ``E ||u(T)||^2`` against the exact per-mode sum."""
    sol = solve_mild(problem, replicas, seed)
    exact = second_moments(problem)
    out = {}
    for key, sample in (("energy_T", sol.energy_T), ("dissipation", sol.dissipation)):
        mc = float(sample.mean())
        se = float(sample.std(ddof=1) / math.sqrt(len(sample)))
        z = abs(mc - exact[key]) / se if se > 0 else (0.0 if mc == exact[key] else math.inf)
        out[key] = {"monte_carlo": mc, "exact": exact[key], "std_err": se, "z": z, "pass": z <= 3.0}
    out["replicas"] = replicas
    out["pass"] = all(v["pass"] for k, v in out.items() if isinstance(v, dict))
    return out


# ---------------------------------------------------------------------------
# a priori estimate


def _field_norm_p(values: np.ndarray, grid: TorusGrid, dt: float, p: float, symbol=None) -> float:
    """``(sum_m dt ||A v_m||_p^p)^{1/p}`` with channels combined in l2."""
    axes = tuple(range(values.ndim - grid.d, values.ndim))
    if symbol is not None:
        values = sfft.ifftn(sfft.fftn(values, axes=axes) * symbol, axes=axes).real
    mag2 = np.sum(values ** 2, axis=1) if values.ndim == grid.d + 2 else values ** 2
    return float((dt * grid.cell_volume * np.sum(mag2 ** (p / 2.0))) ** (1.0 / p))


def apriori_estimate_report(problem: SpdeProblem, p: float, replicas: int, seed: int = 0) -> dict:
    """Ratio of the solution norm to the data norm.

    Solution norm: ``(E sum dt ||(1+phi) u||_p^p)^{1/p} + (E sum dt ||phi(Delta) u + f||_p^p)^{1/p}
    + ||g||``; data norm: ``||f||_p + ||g||`` with ``||g|| = (sum dt ||(1+phi)^{1/2} g||_p^p)^{1/p}``.
    """
    if p < 2:
        raise ParameterError("the estimate is stated for p >= 2")
    sol = solve_mild(problem, replicas, seed, norm_ps=(p,))
    bessel = float(np.mean(sol.norm_sums[p]["bessel"])) ** (1.0 / p)
    drift = float(np.mean(sol.norm_sums[p]["drift"])) ** (1.0 / p)
    sym = problem.grid.symbol(problem.phi)
    g_norm = 0.0
    if problem.g is not None:
        g_norm = _field_norm_p(problem.g.values, problem.grid, problem.dt, p, np.sqrt(1.0 + sym))
    f_norm = 0.0 if problem.f is None else _field_norm_p(problem.f.values[:, 0], problem.grid,
                                                         problem.dt, p)
    lhs = bessel + drift + g_norm
    rhs = f_norm + g_norm
    return {"p": p, "replicas": replicas, "solution_norm": lhs, "data_norm": rhs,
            "n_hat": lhs / rhs if rhs > 0 else math.nan,
            "components": {"bessel": bessel, "drift": drift, "g": g_norm, "f": f_norm}}


def apriori_sweep(make_problem, p: float, replicas: int, seed: int = 0,
                  tolerance: float = 0.15) -> BoundReport:
    """Stability of the a priori ratio under replicas x4 and grid x2.

    ``make_problem(level)`` must return the problem at resolution level 0 or 1
    (level 1 doubles n and M).
    """
    base = apriori_estimate_report(make_problem(0), p, replicas, seed)["n_hat"]
    more = apriori_estimate_report(make_problem(0), p, 4 * replicas, seed)["n_hat"]
    fine = apriori_estimate_report(make_problem(1), p, replicas, seed)["n_hat"]
    drift = max(relative_drift(base, more), relative_drift(base, fine))
    return BoundReport("thm6.5", {"p": p, "replicas": replicas}, base, drift, tolerance, fine,
                       details={"replicas_x4": more, "grid_x2": fine})


# ---------------------------------------------------------------------------
# weak form


def gaussian_test_function(grid: TorusGrid, scale: float, centre: float | None = None) -> np.ndarray:
    """Periodized Gaussian bump of width ``scale`` (``inf`` gives the constant 1)."""
    if math.isinf(scale):
        return np.ones(grid.shape)
    c = 0.5 * grid.L if centre is None else centre
    coords = grid.coordinates()
    r2 = 0.0
    for x in coords:
        dx = (x - c + 0.5 * grid.L) % grid.L - 0.5 * grid.L
        r2 = r2 + dx ** 2
    return np.exp(-0.5 * r2 / scale ** 2)


def weak_form_residual(problem: SpdeProblem, replica: int, psi: np.ndarray,
                       bundle: WienerBundle | None = None, seed: int = 0) -> float:
    """``max_m |(u_m, psi) - sum_{j<m} [dt (phi(Delta) u_j + f_j, psi) + sum_k (g^k_j, psi) dW^k_j]|``."""
    K = problem.channels
    if bundle is None:
        bundle = WienerBundle(seed, max(K, 1), problem.T, problem.M)
    sol = _single_replica(problem, replica, bundle)
    u = sol.paths[0]  # (M+1, n, ...)
    axes = tuple(range(1, 1 + problem.grid.d))
    cell = problem.grid.cell_volume
    sym = problem.grid.symbol(problem.phi)
    lu = sfft.ifftn(-sym * sfft.fftn(u[:-1], axes=axes), axes=axes).real
    drift = lu if problem.f is None else lu + problem.f.values[:, 0]
    inner = lambda a: cell * np.sum(a * psi, axis=axes)
    incr = problem.dt * inner(drift)
    if K:
        dW = bundle.increments(replica, problem.M)[:, :K]
        gpsi = cell * np.sum(problem.g.values * psi, axis=tuple(range(2, 2 + problem.grid.d)))
        incr = incr + np.sum(gpsi * dW, axis=1)
    lhs = inner(u)
    rhs = np.concatenate(([0.0], np.cumsum(incr)))
    return float(np.max(np.abs(lhs - rhs)))


def _single_replica(problem: SpdeProblem, replica: int, bundle: WienerBundle) -> SpdeSolution:
    class _Shifted:
        def increments(self, r, M):
            return bundle.increments(replica, M)

    return solve_mild(problem, 1, keep_paths=True, bundle=_Shifted(), batch=1)
