"""Command line entry point: ``bernstein-lp <verb> [options]``.

Every run is described by a :class:`RunConfig` (JSON file plus flag
overrides) and produces one JSON report envelope. The exit status is 0 only
when every check in the report passes.
"""

from __future__ import annotations

import argparse
import json
import math
import resource
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable

import numpy as np

from . import __version__
from . import catalog, kernels, parabolic, simulate, spde, spectral
from .reports import BernsteinError, BoundReport, ParameterError, ResourceLimitError, _jsonable

SCHEMA_VERSION = "1.0"

VERBS = ("catalog", "kernel", "bounds", "lp-ratio", "sharp", "multiplier", "spde", "simulate", "all")

# inequality id -> (owning module, short description)
CHECKS: dict[str, tuple[str, str]] = {
    "lem3.1": ("catalog", "two-sided scaling of phi on a log lattice"),
    "lem3.2": ("catalog", "sup lam^n |D^n phi| / phi"),
    "lem3.9": ("catalog", "tail integral of phi against phi"),
    "cor3.10": ("catalog", "tail integral of sqrt(phi) against sqrt(phi)"),
    "normalization": ("kernels", "total mass of the transition density"),
    "scaling_identity": ("kernels", "density under the scaled symbol"),
    "lem3.3": ("kernels", "Levy density against its two-sided bound"),
    "cor3.6": ("kernels", "transition density upper bound"),
    "lem4.3": ("kernels", "fractional derivative kernel bound"),
    "norm_equivalence": ("spectral", "Bessel-potential norm equivalence"),
    "lem6.4": ("spectral", "space-time multiplier Lp ratio"),
    "lem5.1": ("parabolic", "single-mode square function constant"),
    "thm1.1": ("parabolic", "Lp bound of the parabolic square function"),
    "lem5.3": ("parabolic", "local oscillation bound"),
    "eq6.08.9": ("parabolic", "sharp function domination"),
    "thm5.6": ("parabolic", "Hardy-Littlewood maximal inequality"),
    "thm5.7": ("parabolic", "Fefferman-Stein inequality"),
    "ito_isometry": ("spde", "Monte Carlo energy against the exact discrete sum"),
    "thm6.5": ("spde", "a priori estimate of the solution norm"),
    "simulator_gof": ("simulate", "sampled law against the kernel table"),
}


def list_checks() -> list[dict]:
    return [{"id": k, "module": m, "description": d} for k, (m, d) in CHECKS.items()]


@dataclass
class RunConfig:
    command: str = "all"
    phi: str = "stable"
    phi_params: dict = field(default_factory=dict)
    d: int = 1
    L: float = 2.0 * math.pi
    n: int = 64
    T: float = 1.0
    M: int = 128
    K: int = 3
    band: int = 4
    ps: list = field(default_factory=lambda: [2.0, 4.0])
    t: float = 1.0
    seed: int = 0
    trials: int = 20
    replicas: int = 1000
    count: int = 100_000
    single_mode: bool = False
    order: int = 0
    beta: list = field(default_factory=list)
    inequality: str | None = None
    report: str = "both"
    demo: bool = False
    action: str = "check"
    out: str | None = None
    csv: str | None = None
    samples_out: str | None = None
    max_points: int = 1 << 22
    max_steps: int = 1 << 14
    max_replicas: int = 1 << 20
    max_count: int = 1 << 24

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def validate(self) -> None:
        if self.command not in VERBS:
            raise ParameterError(f"unknown command {self.command!r}")
        if self.phi not in catalog.ENTRY_NAMES:
            raise ParameterError(f"unknown phi {self.phi!r}; choose from {catalog.ENTRY_NAMES}")
        if self.d < 1 or self.n < 2 or self.n & (self.n - 1) or self.M < 2:
            raise ParameterError("need d >= 1, n a power of two and M >= 2")
        if self.report not in ("both", "isometry", "apriori"):
            raise ParameterError("report must be isometry, apriori or both")
        if self.action not in ("check", "list"):
            raise ParameterError("catalog action must be list or check")
        if self.beta and len(self.beta) != self.d:
            raise ParameterError("beta needs one entry per dimension")
        if not 1 <= self.band < self.n // 2:
            raise ParameterError("band must satisfy 1 <= band < n/2")
        if any(p < 1 for p in self.ps):
            raise ParameterError("p values must be >= 1")
        # refinement doubles n and M, so the caps apply to the doubled sizes
        if (2 * self.n) ** self.d > self.max_points:
            raise ResourceLimitError(f"(2n)^d = {(2 * self.n) ** self.d} exceeds max_points={self.max_points}")
        if 2 * self.M > self.max_steps:
            raise ResourceLimitError(f"2M = {2 * self.M} exceeds max_steps={self.max_steps}")
        if 4 * self.replicas > self.max_replicas:
            raise ResourceLimitError(f"4 x replicas exceeds max_replicas={self.max_replicas}")
        if self.count > self.max_count:
            raise ResourceLimitError(f"count exceeds max_count={self.max_count}")

    def function(self) -> catalog.BernsteinFunction:
        return catalog.make(self.phi, **self.phi_params)

    def grid(self) -> spectral.TorusGrid:
        return spectral.TorusGrid(self.d, self.L, self.n)


def _check(ident: str, passed: bool, **data) -> dict:
    return {"inequality_id": ident, "module": CHECKS[ident][0], "pass": bool(passed), **data}


def _bound(report: BoundReport) -> dict:
    out = report.to_dict()
    out["module"] = CHECKS[report.inequality_id][0]
    return out


# ---------------------------------------------------------------------------
# verbs


def run_catalog(cfg: RunConfig) -> tuple[list, dict]:
    if cfg.action == "list":
        entries = {}
        checks = []
        for name in catalog.ENTRY_NAMES:
            entry = catalog.catalog_entry(name)
            entries[name] = entry.to_dict()
            checks.append(_check("lem3.1", True, entry=name, exponents=entry.exponents.to_dict()))
        return checks, {"entries": entries}
    phi = cfg.function()
    exps = catalog.check_scaling_conditions(phi)
    checks = [_check("lem3.1", True, exponents=exps.to_dict())]
    checks += [_bound(catalog.verify_derivative_ratio(phi, n)) for n in (1, 2)]
    checks.append(_bound(catalog.verify_tail_integral(phi)))
    checks.append(_bound(catalog.verify_tail_integral(phi, sqrt_variant=True)))
    entry = catalog.CatalogEntry(phi, exps, phi.supports_levy_density).to_dict()
    return checks, {"entry": entry}


def run_kernel(cfg: RunConfig) -> tuple[list, dict]:
    phi = cfg.function()
    scale = phi.a_t(cfg.t)
    radii = scale * np.concatenate(([0.0], np.geomspace(1e-2, 1e2, 81)))
    table = kernels.density(phi, cfg.d, cfg.t, radii)
    if cfg.csv:
        _kernel_csv(cfg, phi, radii, table)
    norm = kernels.normalization_check(phi, cfg.d, cfg.t)
    checks = [_check("normalization", abs(norm["total"] - 1.0) < 1e-6, **norm)]
    for a in (0.5, 2.0):
        s = kernels.verify_scaling_identity(phi, cfg.d, cfg.t, a)
        ok = max(s["discrepancy"], s["half_power_discrepancy"]) < 1e-6
        checks.append(_check("scaling_identity", ok, **s))
    return checks, {"t": cfg.t, "a_t": scale, "peak": table.peak, "points": len(radii)}


def _kernel_csv(cfg: RunConfig, phi, radii, table) -> None:
    """``r,value`` for radial orders; ``x_1..x_d,value`` from the FFT box when beta != 0."""
    if any(cfg.beta):
        grid, vals = kernels.frac_kernel_fft(phi, cfg.d, cfg.t, cfg.order, tuple(cfg.beta))
        # centred coordinates, restricted to the window |x_i| <= 20 a_t
        coords = [(c + 0.5 * grid.L) % grid.L - 0.5 * grid.L for c in grid.coordinates()]
        near = np.all([np.abs(c) <= 20.0 * phi.a_t(cfg.t) for c in coords], axis=0)
        header = [f"x_{i + 1}" for i in range(cfg.d)] + ["value"]
        rows = zip(*[c[near] for c in coords], np.asarray(vals)[near])
    else:
        if cfg.order:
            table = kernels.frac_kernel_radial(phi, cfg.d, cfg.t, cfg.order, radii)
        header = ["r", "value"]
        rows = zip(table.radii, table.values)
    with open(cfg.csv, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def run_bounds(cfg: RunConfig) -> tuple[list, dict]:
    phi = cfg.function()
    want = lambda ident: cfg.inequality in (None, ident)
    if cfg.inequality is not None and cfg.inequality not in ("cor3.6", "lem3.3", "lem4.3"):
        raise ParameterError("bounds covers cor3.6, lem3.3 and lem4.3")
    checks = []
    if want("cor3.6"):
        checks.append(_bound(kernels.verify_kernel_upper_bound(phi, cfg.d, cfg.T)))
    if want("lem3.3") and phi.supports_levy_density:
        checks.append(_bound(kernels.verify_j_bound(phi, cfg.d)))
    if want("lem4.3"):
        for n, beta in ((1, (0,) * cfg.d), (2, (1,) + (0,) * (cfg.d - 1))):
            checks.append(_bound(kernels.verify_frac_bound(phi, cfg.d, cfg.T, n, beta)))
    return checks, {}


def _sources(cfg: RunConfig):
    rand = parabolic.random_sources(cfg.trials, cfg.d, cfg.band, cfg.T, cfg.seed, cfg.K)
    return rand + parabolic.adversarial_sources(cfg.d, cfg.band, cfg.T, cells=min(cfg.M, 64),
                                                seed=cfg.seed + 1)


def run_lp_ratio(cfg: RunConfig) -> tuple[list, dict]:
    phi = cfg.function()
    if cfg.single_mode:
        r = parabolic.single_mode_constant(phi, cfg.d, k=1, n=16, M=max(cfg.M, 2048))
        return [_check("lem5.1", abs(r - 0.5) <= 0.01, ratio=r, expected=0.5, tolerance=0.02)], {}
    reps = parabolic.verify_lp_inequality(_sources(cfg), phi, cfg.grid(), cfg.M, cfg.T, cfg.ps)
    return [_bound(r) for r in reps.values()], {}


def run_sharp(cfg: RunConfig) -> tuple[list, dict]:
    phi = cfg.function()
    grid = cfg.grid()
    srcs = _sources(cfg)[: max(4, cfg.trials // 4)]
    checks = [_bound(parabolic.verify_sharp_domination(srcs, phi, grid, cfg.M, cfg.T))]
    cases = [(srcs[0], 4 * grid.h, 0.5 * cfg.T, 0.25 * cfg.T),
             (srcs[-1], 8 * grid.h, 0.75 * cfg.T, 0.0)]
    checks.append(_bound(parabolic.verify_local_oscillation(cases, phi, grid, cfg.M, cfg.T)))
    rng = np.random.default_rng(cfg.seed)
    fields_ = [spectral.BandlimitedField.random(cfg.d, cfg.band, 1, rng) for _ in range(4)]
    for p in cfg.ps:
        checks += [_bound(r) for r in parabolic.verify_hl_fs(fields_, phi, grid, p).values()]
    if cfg.demo and cfg.csv:
        _sharp_demo_csv(cfg, phi, grid, fields_[0])
    return checks, {}


def _sharp_demo_csv(cfg: RunConfig, phi, grid, bf) -> None:
    """``t,x_1..x_d,h,sharp`` for a mean-zero field ``cos(pi t / T) g(x)``."""
    dt = cfg.T / cfg.M
    t = dt * (np.arange(cfg.M) + 0.5)
    h = np.cos(np.pi * t / cfg.T)[:, None] * bf.sample(grid)[0][None]
    h -= h.mean()
    sh = parabolic.sharp_function(h, grid, dt, phi)
    coords = [c.ravel() for c in grid.coordinates()]
    with open(cfg.csv, "w") as fh:
        fh.write(",".join(["t"] + [f"x_{i + 1}" for i in range(grid.d)] + ["h", "sharp"]) + "\n")
        for m in range(cfg.M):
            for idx in range(grid.n ** grid.d):
                vals = [t[m]] + [c[idx] for c in coords] + [h[m].flat[idx], sh[m].flat[idx]]
                fh.write(",".join(repr(float(v)) for v in vals) + "\n")


def run_multiplier(cfg: RunConfig) -> tuple[list, dict]:
    phi = cfg.function()
    srcs = _sources(cfg)
    checks = []
    for p in cfg.ps:
        rep = spectral.verify_multiplier(srcs, phi, cfg.grid(), cfg.M, cfg.T, p)
        out = _bound(rep)
        if p == 2:
            out["pass"] = out["pass"] and rep.n_hat <= 1.0 + 1e-12
        checks.append(out)
    return checks, {}


def _spde_problem(cfg: RunConfig, level: int = 0) -> spde.SpdeProblem:
    grid = spectral.TorusGrid(cfg.d, cfg.L, cfg.n * 2 ** level)
    M = cfg.M * 2 ** level
    f_src, g_src = parabolic.random_sources(2, cfg.d, cfg.band, cfg.T, cfg.seed, cfg.K)
    f = f_src.sample(grid, M, cfg.T)
    f = spectral.SpaceTimeField(grid, f.dt, f.values[:, :1])
    return spde.SpdeProblem(cfg.function(), grid, cfg.T, M, f, g_src.sample(grid, M, cfg.T))


def run_spde(cfg: RunConfig) -> tuple[list, dict]:
    checks = []
    if cfg.report in ("both", "isometry"):
        iso = spde.ito_isometry_check(_spde_problem(cfg), cfg.replicas, cfg.seed)
        checks.append(_check("ito_isometry", iso["pass"], **iso))
    for p in cfg.ps:
        if p >= 2 and cfg.report in ("both", "apriori"):
            rep = spde.apriori_sweep(lambda lv: _spde_problem(cfg, lv), p, max(16, cfg.replicas // 10),
                                     cfg.seed)
            checks.append(_bound(rep))
    return checks, {}


def run_simulate(cfg: RunConfig) -> tuple[list, dict]:
    phi = cfg.function()
    x = simulate.sample_sbm(phi, cfg.d, cfg.t, cfg.count, cfg.seed)
    if cfg.samples_out:
        simulate.write_samples(cfg.samples_out, x, {"phi": phi.to_dict(), "t": cfg.t, "seed": cfg.seed})
    checks = []
    if cfg.count >= simulate.MIN_GOF_SAMPLES:
        gof = simulate.histogram_vs_density(x, phi, cfg.d, cfg.t)
        checks.append(_check("simulator_gof", gof["pass"], **gof))
    stats = {"count": cfg.count, "mean": x.mean(axis=0).tolist(),
             "median_radius": float(np.median(np.linalg.norm(x, axis=1)))}
    return checks, stats


def run_all(cfg: RunConfig) -> tuple[list, dict]:
    checks, extra = [], {}
    for verb, fn in DISPATCH.items():
        if verb == "all":
            continue
        c, e = fn(cfg)
        checks += c
        extra[verb] = e
    if not cfg.single_mode:
        checks += run_lp_ratio(replace(cfg, single_mode=True))[0]
    return checks, extra


DISPATCH: dict[str, Callable[[RunConfig], tuple[list, dict]]] = {
    "catalog": run_catalog, "kernel": run_kernel, "bounds": run_bounds, "lp-ratio": run_lp_ratio,
    "sharp": run_sharp, "multiplier": run_multiplier, "spde": run_spde, "simulate": run_simulate,
    "all": run_all,
}


def run(cfg: RunConfig) -> dict:
    """Validate, dispatch and wrap the results in a report envelope."""
    cfg.validate()
    start = time.perf_counter()
    checks, artifacts = DISPATCH[cfg.command](cfg)
    checks.sort(key=lambda c: c["inequality_id"])
    peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "config": asdict(cfg),
        "checks": checks,
        "artifacts": artifacts,
        "metrics": {"wall_clock_s": time.perf_counter() - start, "peak_memory_mb": peak_kb / 1024.0},
        "pass": all(c["pass"] for c in checks),
    })


# ---------------------------------------------------------------------------
# argument parsing


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bernstein-lp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("checks", help="list verifiable inequality ids")
    for verb in VERBS:
        sp = sub.add_parser(verb)
        sp.add_argument("--config", help="JSON run config; flags override its values")
        sp.add_argument("--phi")
        sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="phi parameter, repeatable")
        for name, typ in (("d", int), ("L", float), ("n", int), ("T", float), ("M", int),
                          ("K", int), ("band", int), ("t", float), ("seed", int), ("trials", int),
                          ("replicas", int), ("count", int), ("max-points", int)):
            sp.add_argument(f"--{name}", type=typ, dest=name.replace("-", "_"))
        sp.add_argument("--steps", type=int, dest="M", help="alias of --M")
        sp.add_argument("--p", type=_float_list, action="extend", dest="ps",
                        help="comma-separated p values, repeatable")
        sp.add_argument("--single-mode", action="store_true", default=None)
        sp.add_argument("--order", type=int, help="kernel: power n of phi(Delta)^{n/2}")
        sp.add_argument("--beta", type=_int_list, help="kernel: comma-separated multi-index")
        sp.add_argument("--inequality", help="bounds: restrict to one id")
        sp.add_argument("--report", choices=("both", "isometry", "apriori"))
        sp.add_argument("--demo", action="store_true", default=None,
                        help="sharp: write h and its sharp function to --csv")
        if verb == "catalog":
            sp.add_argument("action", nargs="?", choices=("list", "check"))
            sp.add_argument("name", nargs="?", help="catalog entry (same as --phi)")
        sp.add_argument("--out", help="report path (default: stdout)")
        sp.add_argument("--csv", help="CSV table output where the verb has one")
        sp.add_argument("--samples-out", help="binary sample output for simulate")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    data["command"] = args.command
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None and f.name != "command":
            data[f.name] = val
    if getattr(args, "name", None):
        data["phi"] = args.name
    if args.param:
        params = dict(data.get("phi_params", {}))
        for item in args.param:
            key, _, value = item.partition("=")
            params[key] = float(value)
        data["phi_params"] = params
    return RunConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "checks":
        json.dump(list_checks(), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except (BernsteinError, ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    text = json.dumps(report, indent=2, sort_keys=True)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0 if report["pass"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
