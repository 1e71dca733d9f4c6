"""Periodic grids, Fourier multipliers of phi(Delta) and discrete Lp norms.

Fields live on the torus ``[0, L)^d`` sampled at ``x_j = j L / n``. The
channel axis (size K) stands for the l2-valued part of a field; norms take
the Euclidean norm over channels before the Lp norm in space (and time).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from .catalog import BernsteinFunction
from .reports import BoundReport, ParameterError, relative_drift

DEFAULT_CHANNELS = 8


@dataclass(frozen=True)
class TorusGrid:
    d: int
    L: float
    n: int

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError("dimension must be >= 1")
        if self.n < 2 or self.n & (self.n - 1):
            raise ParameterError("n must be a power of two (>= 2)")
        if not self.L > 0:
            raise ParameterError("box length must be positive")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @cached_property
    def x1d(self) -> np.ndarray:
        return self.h * np.arange(self.n)

    @cached_property
    def xi1d(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def xi2(self) -> np.ndarray:
        """|xi|^2 on the FFT layout."""
        parts = np.meshgrid(*([self.xi1d ** 2] * self.d), indexing="ij")
        return np.sum(parts, axis=0)

    def wavevector(self, axis: int) -> np.ndarray:
        shape = [1] * self.d
        shape[axis] = self.n
        return self.xi1d.reshape(shape)

    def coordinates(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.x1d] * self.d), indexing="ij")

    def symbol(self, phi: BernsteinFunction) -> np.ndarray:
        return phi(self.xi2)

    def refined(self) -> "TorusGrid":
        return TorusGrid(self.d, self.L, 2 * self.n)


@dataclass
class GridField:
    """Samples of a K-channel field; ``values`` has shape ``(K, n, ..., n)``."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim == self.grid.d:
            self.values = self.values[None]
        if self.values.shape[1:] != self.grid.shape:
            raise ParameterError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")

    @property
    def channels(self) -> int:
        return self.values.shape[0]


@dataclass
class SpaceTimeField:
    """Samples at times ``t0 + m dt``; ``values`` has shape ``(M, K, n, ..., n)``."""

    grid: TorusGrid
    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim == self.grid.d + 1:
            self.values = self.values[:, None]
        if self.values.shape[2:] != self.grid.shape:
            raise ParameterError("values shape does not match grid")
        if self.values.shape[0] < 2:
            raise ParameterError("a space-time field needs at least two time samples")
        if not self.dt > 0:
            raise ParameterError("time step must be positive")

    @property
    def steps(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps)

    @property
    def horizon(self) -> float:
        return self.steps * self.dt


# ---------------------------------------------------------------------------
# multipliers


def _spatial_axes(grid: TorusGrid, values: np.ndarray) -> tuple[int, ...]:
    return tuple(range(values.ndim - grid.d, values.ndim))


def apply_symbol(grid: TorusGrid, values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Multiply the spatial Fourier transform of ``values`` by ``symbol``."""
    axes = _spatial_axes(grid, values)
    out = sfft.ifftn(sfft.fftn(values, axes=axes) * symbol, axes=axes)
    if np.isrealobj(values) and np.isrealobj(symbol):
        return out.real
    return out


def _wrap(f, values):
    if isinstance(f, GridField):
        return GridField(f.grid, values)
    if isinstance(f, SpaceTimeField):
        return SpaceTimeField(f.grid, f.dt, values, f.t0)
    return values


def semigroup_apply(f, t: float, phi: BernsteinFunction):
    """Heat-type semigroup ``exp(-t phi(|xi|^2))`` applied to a field."""
    if t < 0:
        raise ParameterError("semigroup time must be >= 0")
    if t == 0:
        return _wrap(f, np.array(f.values, copy=True))
    return _wrap(f, apply_symbol(f.grid, f.values, np.exp(-t * f.grid.symbol(phi))))


def phi_power_symbol(grid: TorusGrid, phi: BernsteinFunction, beta: float) -> np.ndarray:
    sym = grid.symbol(phi)
    if beta == 0:
        return np.ones_like(sym)
    out = np.zeros_like(sym)
    pos = sym > 0
    out[pos] = sym[pos] ** beta  # the zero mode is annihilated for beta < 0
    return out


def phi_power_apply(f, beta: float, phi: BernsteinFunction):
    """Apply ``phi(|xi|^2)**beta`` (fractional power of the operator)."""
    if beta == 0:
        return _wrap(f, np.array(f.values, copy=True))
    return _wrap(f, apply_symbol(f.grid, f.values, phi_power_symbol(f.grid, phi, beta)))


def bessel_apply(f, gamma: float, phi: BernsteinFunction):
    """Apply the Bessel-type potential ``(1 + phi(|xi|^2))**(gamma/2)``."""
    if gamma == 0:
        return _wrap(f, np.array(f.values, copy=True))
    sym = (1.0 + f.grid.symbol(phi)) ** (gamma / 2.0)
    return _wrap(f, apply_symbol(f.grid, f.values, sym))


def parabolic_multiplier_apply(F: SpaceTimeField, phi: BernsteinFunction,
                               pad_factor: int = 2) -> SpaceTimeField:
    """Apply ``phi / (i tau + phi)`` in space-time.

    The field is zero-padded to ``pad_factor`` times its length in time before
    the periodic transform, and the (tau, xi) = (0, 0) mode is mapped to zero.
    Wrap-around of the causal response is damped by ``exp(-(pad_factor-1) T phi)``.
    """
    M = F.steps
    if pad_factor < 1:
        raise ParameterError("pad_factor must be at least 1")
    P = pad_factor * M
    padded = np.zeros((P,) + F.values.shape[1:], dtype=np.result_type(F.values, complex))
    padded[:M] = F.values
    axes = (0,) + _spatial_axes(F.grid, padded)
    spec = sfft.fftn(padded, axes=axes)
    tau = 2.0 * np.pi * np.fft.fftfreq(P, d=F.dt)
    sym = F.grid.symbol(phi)
    tau_b = tau.reshape((-1,) + (1,) * (padded.ndim - 1))
    den = 1j * tau_b + sym
    with np.errstate(invalid="ignore", divide="ignore"):
        mult = np.where(den == 0, 0.0, sym / np.where(den == 0, 1.0, den))
    out = sfft.ifftn(spec * mult, axes=axes)[:M]
    if np.isrealobj(F.values):
        out = out.real
    return SpaceTimeField(F.grid, F.dt, out, F.t0)


# ---------------------------------------------------------------------------
# norms


def lp_norm(f, p: float) -> float:
    """Riemann-sum Lp norm; channels are combined in l2 first."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    vals = np.asarray(f.values)
    chan_axis = 1 if isinstance(f, SpaceTimeField) else 0
    mag2 = np.sum(np.abs(vals) ** 2, axis=chan_axis)
    weight = f.grid.cell_volume * (f.dt if isinstance(f, SpaceTimeField) else 1.0)
    if math.isinf(p):
        return float(np.sqrt(mag2.max()))
    return float((weight * np.sum(mag2 ** (p / 2.0))) ** (1.0 / p))


def bessel_norm(f, gamma: float, p: float, phi: BernsteinFunction) -> float:
    """Norm of the Bessel-potential space: ``|| (1+phi)^{gamma/2} f ||_p``."""
    return lp_norm(bessel_apply(f, gamma, phi), p)


# ---------------------------------------------------------------------------
# band-limited random fields, reproducible across grid refinements


@dataclass
class BandlimitedField:
    """Random trigonometric polynomial with integer wavenumbers ``|k_i| <= band``.

    Sampling the same object on grids of the same box length but different
    ``n`` gives samples of one continuous function, which is what refinement
    studies need.
    """

    d: int
    band: int
    coeffs: np.ndarray  # shape (K, 2 band + 1, ..., 2 band + 1), complex

    @classmethod
    def random(cls, d: int, band: int, channels: int, rng: np.random.Generator,
               decay: float = 0.0) -> "BandlimitedField":
        shape = (channels,) + (2 * band + 1,) * d
        c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if decay:
            k = np.arange(-band, band + 1)
            kk = np.sqrt(np.sum(np.meshgrid(*([k ** 2] * d), indexing="ij"), axis=0))
            c = c * (1.0 + kk) ** (-decay)
        return cls(d, band, c)

    def sample(self, grid: TorusGrid) -> np.ndarray:
        if grid.d != self.d:
            raise ParameterError("dimension mismatch")
        if 2 * self.band >= grid.n:
            raise ParameterError("grid too coarse for the band limit")
        K = self.coeffs.shape[0]
        spec = np.zeros((K,) + grid.shape, dtype=complex)
        idx = np.arange(-self.band, self.band + 1) % grid.n
        spec[(slice(None),) + np.ix_(*([idx] * self.d))] = self.coeffs
        vals = sfft.ifftn(spec, axes=tuple(range(1, self.d + 1))) * grid.n ** self.d
        return vals.real


def verify_norm_equivalence(phi: BernsteinFunction, gamma: float, p: float, grid: TorusGrid,
                            count: int = 50, seed: int = 0, channels: int = 3,
                            tolerance: float = 0.10) -> BoundReport:
    """Compare ``||f||_p + ||phi^{gamma/2} f||_p`` with ``||(1+phi)^{gamma/2} f||_p``.

    Reports ``c = max(max ratio, 1 / min ratio)`` over a random band-limited
    ensemble and its drift when the same fields are resampled on ``2n``.
    """
    if count < 50:
        raise ParameterError("norm equivalence needs an ensemble of at least 50 fields")
    rng = np.random.default_rng(seed)
    band = max(1, grid.n // 8)
    fields = [BandlimitedField.random(grid.d, band, channels, rng, decay=rng.uniform(0, 2))
              for _ in range(count)]

    def constant(g: TorusGrid) -> float:
        ratios = []
        for bf in fields:
            f = GridField(g, bf.sample(g))
            lhs = lp_norm(f, p) + lp_norm(phi_power_apply(f, gamma / 2.0, phi), p)
            ratios.append(lhs / bessel_norm(f, gamma, p, phi))
        ratios = np.asarray(ratios)
        return float(max(ratios.max(), 1.0 / ratios.min()))

    c0 = constant(grid)
    c1 = constant(grid.refined())
    return BoundReport("norm_equivalence", {"d": grid.d, "n": grid.n, "L": grid.L,
                                            "gamma": gamma, "p": p, "count": count},
                       c0, relative_drift(c0, c1), tolerance, c1)


def multiplier_ratio(F: SpaceTimeField, phi: BernsteinFunction, p: float) -> float:
    """``||F^{-1}(m F f)||_p / ||f||_p`` for the space-time multiplier."""
    return lp_norm(parabolic_multiplier_apply(F, phi), p) / lp_norm(F, p)


def verify_multiplier(sources, phi: BernsteinFunction, grid: TorusGrid, M: int, T: float,
                      p: float, tolerance: float = 0.10) -> BoundReport:
    """Largest multiplier ratio over ``sources`` (objects with ``sample(grid, M, T)``).

    The refined value resamples every source on ``(2n, 2M)``.
    """
    sources = list(sources)

    def worst(g: TorusGrid, steps: int) -> float:
        return max(multiplier_ratio(src.sample(g, steps, T), phi, p) for src in sources)

    coarse = worst(grid, M)
    fine = worst(grid.refined(), 2 * M)
    return BoundReport("lem6.4", {"d": grid.d, "n": grid.n, "L": grid.L, "M": M, "T": T,
                                  "p": p, "sources": len(sources)},
                       coarse, relative_drift(coarse, fine), tolerance, fine)


# ---------------------------------------------------------------------------
# binary field format


def write_field(path: str | os.PathLike, f, metadata: dict | None = None) -> None:
    """Little-endian float64 header ``(d, n, L, K)`` followed by the samples.

    Complex samples are stored as interleaved real/imaginary pairs. A JSON
    sidecar ``<path>.json`` records layout, dtype and any metadata.
    """
    vals = np.asarray(f.values)
    header = np.array([f.grid.d, f.grid.n, f.grid.L, f.channels], dtype="<f8")
    is_complex = np.iscomplexobj(vals)
    payload = vals.astype("<c16") if is_complex else vals.astype("<f8")
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(np.ascontiguousarray(payload).view("<f8").tobytes())
    side = {"d": f.grid.d, "n": f.grid.n, "L": f.grid.L, "K": f.channels,
            "dtype": "complex128" if is_complex else "float64", "byte_order": "little",
            "header_values": 4, "shape": list(vals.shape)}
    if isinstance(f, SpaceTimeField):
        side.update({"kind": "space_time", "M": f.steps, "dt": f.dt, "t0": f.t0})
    else:
        side["kind"] = "grid"
    if metadata:
        side["metadata"] = metadata
    with open(f"{os.fspath(path)}.json", "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)


def read_field(path: str | os.PathLike):
    with open(f"{os.fspath(path)}.json") as fh:
        side = json.load(fh)
    raw = np.fromfile(path, dtype="<f8")
    d, n, L, K = raw[:4]
    grid = TorusGrid(int(d), float(L), int(n))
    data = raw[4:]
    if side["dtype"] == "complex128":
        data = data.view("<c16")
    vals = data.reshape(side["shape"])
    if side["kind"] == "space_time":
        return SpaceTimeField(grid, side["dt"], vals, side.get("t0", 0.0))
    return GridField(grid, vals)


def effective_band(values: np.ndarray, grid: TorusGrid, rtol: float = 1e-13) -> int:
    """Largest |integer wavenumber| carrying energy above ``rtol`` of the peak."""
    axes = _spatial_axes(grid, values)
    spec = np.abs(sfft.fftn(values, axes=axes))
    peak = spec.max()
    if peak == 0.0:
        return 0
    k = np.abs(np.fft.fftfreq(grid.n, 1.0 / grid.n)).astype(int)
    band = 0
    for pos, ax in enumerate(axes):
        other = tuple(a for a in range(spec.ndim) if a != ax)
        energy = spec.max(axis=other)
        band = max(band, int(k[energy > rtol * peak].max()))
    return band


def fourier_resample(values: np.ndarray, grid: TorusGrid, n_new: int) -> np.ndarray:
    """Resample a trigonometric polynomial on the same box with ``n_new`` points.

    Exact when the band of ``values`` stays below both Nyquist limits.
    """
    axes = _spatial_axes(grid, values)
    spec = sfft.fftn(values, axes=axes)
    n_old = grid.n
    keep = min(n_old, n_new) // 2
    k_new = np.concatenate((np.arange(0, keep), np.arange(-keep + 1, 0)))
    src = k_new % n_old
    dst = k_new % n_new
    out = np.zeros(values.shape[:values.ndim - grid.d] + (n_new,) * grid.d, dtype=complex)
    lead = (slice(None),) * (values.ndim - grid.d)
    out[lead + np.ix_(*([dst] * grid.d))] = spec[lead + np.ix_(*([src] * grid.d))]
    res = sfft.ifftn(out, axes=axes) * (n_new / n_old) ** grid.d
    return res.real if np.isrealobj(values) else res
