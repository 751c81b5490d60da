"""Command-line harness: every verification as a subcommand, one JSON report per identity.

Exit status is 0 when every identity passes, 1 when any fails and 2 on a
configuration or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from datetime import datetime, timezone

import numpy as np

from . import chaos, gaussian, geometry, sdyson, wiener
from ._poly import Poly, random_poly
from .estimator import RngStream
from .expr import parse
from .paths import DualMeasure, Grid, basis_shift, linear_shift, sample_brownian, write_path_csv, zero_shift
from .report import VerificationReport, aggregate, write_atomic

__all__ = ["RunConfig", "run", "main", "COMMANDS"]

# Fixed, widely spaced stream indices keep every identity on its own Philox key.
STREAMS = {
    "cf": 1000, "cm": 2000, "cm-norm": 3000, "malliavin": 4000, "isometry": 5000,
    "commutators": 6000, "adjointness": 7000, "bridge": 8000, "fourier": 9000,
    "covariance": 10000, "sdyson": 11000, "riemann": 12000, "symplectic": 13000,
    "algebra": 14000, "pfaffian": 15000, "hamiltonian": 16000,
}

COMMANDS = {
    "wiener": ("cf", "cm", "malliavin"),
    "chaos": ("commutators", "bridge"),
    "gauss": ("fourier", "covariance"),
    "sdyson": ("verify", "mu"),
    "geom": ("riemann", "symplectic", "algebra"),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    grid_n: int = 256
    n_samples: int = 100_000
    sigma_threshold: float = 3.0
    abs_tol: float = 1e-8
    output: str = "reports"
    workers: int = 1

    def __post_init__(self):
        for name in ("grid_n", "n_samples", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if not (self.sigma_threshold > 0 and self.abs_tol > 0):
            raise ConfigError("thresholds must be positive")

    def stream(self, key: str, offset: int = 0) -> RngStream:
        return RngStream(self.seed, STREAMS[key] + offset)


# ---------------------------------------------------------------- input parsing

def parse_shift(text: str, grid: Grid):
    text = text.strip()
    if text == "linear":
        return linear_shift(grid)
    if text == "zero":
        return zero_shift(grid)
    if text.startswith("basis:"):
        return basis_shift(int(text.split(":", 1)[1]), grid)
    raise ConfigError(f"unknown shift {text!r}; use basis:k, linear or zero")


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def parse_atoms(text: str) -> DualMeasure:
    """``"a@t, a@t"``: weight a at time t."""
    atoms = []
    for part in text.split(","):
        if not part.strip():
            continue
        a, sep, t = part.partition("@")
        if not sep:
            raise ConfigError(f"atom {part!r} is not of the form weight@time")
        atoms.append((float(t), float(a)))
    return DualMeasure(tuple(atoms))


def parse_matrix(text: str) -> np.ndarray:
    """``"2,0;0,8"``, a JSON nested list, or ``@file`` holding either."""
    text = text.strip()
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read().strip()
    if text.startswith("["):
        Q = np.asarray(json.loads(text), dtype=np.float64)
    else:
        Q = np.array([parse_floats(row) for row in text.split(";") if row.strip()], dtype=np.float64)
    return np.atleast_2d(Q)


def functional_from_text(text: str, times: list[float] | None):
    e = parse(text)
    if times is None:
        if e.n_vars > 1:
            raise ConfigError(f"{text!r} uses w{e.n_vars}; give --times")
        times = [1.0]
    if e.n_vars > len(times):
        raise ConfigError(f"{text!r} uses w{e.n_vars} but only {len(times)} times were given")
    return wiener.CylinderFunctional(tuple(times), e, e.gradient, e.growth(), text)


# ---------------------------------------------------------------- suites

def _grid(cfg):
    return Grid(cfg.grid_n)


def _dump_path(opts, cfg, key):
    target = getattr(opts, "dump_paths", None)
    if target:
        write_path_csv(target, sample_brownian(_grid(cfg), cfg.stream(key)))


DEFAULT_DUALS = (
    "1@1",
    "1@0.5",
    "0.5@0.25,-1@0.75",
    "1@0.25,2@0.5,-0.5@1",
    "-1.5@0.125,0.7@0.5,1@1",
)


def suite_wiener_cf(cfg, opts):
    grid = _grid(cfg)
    _dump_path(opts, cfg, "cf")
    duals = [opts.atoms] if opts.atoms else list(DEFAULT_DUALS)
    reps = [wiener.verify_characteristic_functional(parse_atoms(d), grid, cfg.n_samples, cfg.stream("cf", j),
                                                    cfg.sigma_threshold, cfg.workers) for j, d in enumerate(duals)]
    if len(reps) == 1:
        return reps
    return [aggregate("characteristic-functional", "a1", reps, seed=cfg.seed, grid_n=grid.n)]


def _shifts_and_functionals(cfg, opts):
    grid = _grid(cfg)
    shifts = [parse_shift(opts.phi, grid)] if opts.phi else wiener.standard_shifts(grid)
    times = parse_floats(opts.times) if opts.times else None
    fns = [functional_from_text(opts.functional, times)] if opts.functional else wiener.standard_functionals()
    return grid, shifts, fns


def _maybe_aggregate(reps, identity, equation, cfg):
    if len(reps) == 1:
        return reps[0]
    return aggregate(identity, equation, reps, seed=cfg.seed, grid_n=cfg.grid_n)


def suite_wiener_cm(cfg, opts):
    grid, shifts, fns = _shifts_and_functionals(cfg, opts)
    _dump_path(opts, cfg, "cm")
    cm = wiener.cameron_martin_suite(shifts, fns, grid, cfg.n_samples, cfg.stream("cm"),
                                     cfg.sigma_threshold, cfg.workers)
    out = [_maybe_aggregate(cm, "cameron-martin", "a4", cfg)]
    if not (opts.phi and opts.functional):
        norm = [wiener.verify_cm_normalization(phi, grid, cfg.n_samples, cfg.stream("cm-norm", j),
                                               cfg.sigma_threshold, cfg.workers) for j, phi in enumerate(shifts)]
        out.append(_maybe_aggregate(norm, "cm-density-normalization", "a6", cfg))
    return out


def suite_wiener_malliavin(cfg, opts):
    grid, shifts, fns = _shifts_and_functionals(cfg, opts)
    _dump_path(opts, cfg, "malliavin")
    mal = wiener.cameron_martin_suite(shifts, fns, grid, cfg.n_samples, cfg.stream("malliavin"),
                                      cfg.sigma_threshold, cfg.workers, malliavin=True)
    out = [_maybe_aggregate(mal, "malliavin", "a16", cfg)]
    if not (opts.phi and opts.functional):
        pairs = [(shifts[i], shifts[j]) for i in range(len(shifts)) for j in range(i, len(shifts))]
        iso = [wiener.verify_malliavin_isometry(p1, p2, grid, cfg.n_samples, cfg.stream("isometry", k),
                                                cfg.sigma_threshold, cfg.workers) for k, (p1, p2) in enumerate(pairs)]
        out.append(_maybe_aggregate(iso, "malliavin-isometry", "twoseven", cfg))
    return out


def suite_chaos_commutators(cfg, opts):
    return [
        chaos.verify_commutators(opts.modes, opts.degree, opts.cases, cfg.stream("commutators")),
        chaos.verify_adjointness_random(opts.modes, opts.degree, opts.cases, cfg.stream("adjointness")),
        chaos.verify_hermite(6),
    ]


def default_bridge_polys() -> list:
    x1, x2 = chaos.xi(1, 2), chaos.xi(2, 2)
    return [x1 * x1, x1 * x2, x1**4, x1 * x1 * x2 * x2 - 2 * x2 + 1, x2**3 + 3 * x1 * x2]


def suite_chaos_bridge(cfg, opts):
    grid = _grid(cfg)
    reps = [chaos.mc_bridge(P, grid, cfg.n_samples, cfg.stream("bridge", j), cfg.sigma_threshold, cfg.workers)
            for j, P in enumerate(default_bridge_polys())]
    return [aggregate("chaos-bridge", "twofour", reps, seed=cfg.seed, grid_n=grid.n)]


def default_fourier_cases(cfg, n_cases: int = 20):
    rng = cfg.stream("fourier").generator()
    cases = []
    for j in range(n_cases):
        dim = 1 + j % 3
        Q = gaussian.random_spd(dim, rng)
        cases.append((Q, rng.normal(scale=0.5, size=dim)))
    return cases


def suite_gauss_fourier(cfg, opts):
    if opts.Q is not None:
        Q = parse_matrix(opts.Q)
        xp = np.array(parse_floats(opts.xprime)) if opts.xprime else np.zeros(Q.shape[0])
        spec = gaussian.make_spec(Q, opts.s)
        method = opts.method
        rep = gaussian.verify_fourier(spec, xp, method, n_samples=cfg.n_samples, stream=cfg.stream("fourier"),
                                      threshold=cfg.sigma_threshold)
        if opts.dump_quadrature and spec.euclidean:
            nodes = rep.details.get("nodes_per_axis", 16)
            gaussian.write_quadrature_csv(opts.dump_quadrature, gaussian.fourier_lhs_quadrature(spec, xp, nodes)[1])
        return [rep]
    euclid, fresnel = [], []
    rng = cfg.stream("fourier", 1).generator()
    for Q, xp in default_fourier_cases(cfg):
        euclid.append(gaussian.verify_fourier(gaussian.make_spec(Q, 1), xp))
        fresnel.append(gaussian.verify_fourier(gaussian.make_spec(Q, "i"), xp))
        # an indefinite companion: flip the sign of one eigen-direction
        lam, vec = np.linalg.eigh(Q)
        lam[int(rng.integers(lam.size))] *= -1
        fresnel.append(gaussian.verify_fourier(gaussian.make_spec((vec * lam) @ vec.T, "i"), xp))
    return [aggregate("fourier-gaussian", "finite", euclid, seed=cfg.seed),
            aggregate("fourier-fresnel", "defDx", fresnel, seed=cfg.seed)]


def suite_gauss_covariance(cfg, opts):
    if opts.Q is not None:
        Qs = [parse_matrix(opts.Q)]
    else:
        rng = cfg.stream("covariance", 999).generator()
        Qs = [gaussian.random_spd(d, rng) for d in (1, 2, 3)]
    reps = [gaussian.covariance_check(gaussian.make_spec(Q, 1), cfg.n_samples, cfg.stream("covariance", j),
                                      cfg.sigma_threshold) for j, Q in enumerate(Qs)]
    return [_maybe_aggregate(reps, "gaussian-covariance", "finite", cfg)]


def _actions(cfg, opts):
    if isinstance(opts.action, list):
        # coefficient table from a JSON config: [[exponents, coefficient], ...]
        try:
            dim = opts.dim or len(opts.action[0][0])
            return [sdyson.action_from_table(dim, opts.action, opts.hbar)]
        except (IndexError, TypeError) as exc:
            raise ConfigError(f"bad action table: {exc}") from None
    if opts.action:
        e = parse(opts.action)
        poly = e.to_poly(opts.dim or max(e.n_vars, 1))
        return [sdyson.ToyAction.from_poly(poly, opts.hbar)]
    return [sdyson.random_quartic_action(1 + j % 2, cfg.stream("sdyson", j), opts.hbar) for j in range(5)]


def suite_sdyson_verify(cfg, opts):
    actions = _actions(cfg, opts)
    sd = [sdyson.schwinger_dyson_suite(a, opts.max_degree, cfg.abs_tol) for a in actions]
    gen = []
    for j, a in enumerate(actions):
        J = cfg.stream("sdyson", 100 + j).generator().uniform(-0.5, 0.5, size=a.dim)
        gen.append(sdyson.verify_generating_derivative(sdyson.SourcedAction(a, J), cfg.abs_tol))
    return [aggregate("schwinger-dyson", "Schwinger-Dyson", sd, seed=cfg.seed),
            aggregate("generating-derivative", "inout", gen, seed=cfg.seed)]


def _mu_case(action, label):
    phi0 = sdyson.stationary_point(action, np.zeros(action.dim))
    mu = sdyson.leading_mu(action, phi0)
    oracle = math.sqrt(abs(float(np.prod(np.linalg.eigvalsh(action.hessian(phi0))))))
    return VerificationReport("leading-mu", "mu", mu, oracle, abs(mu - oracle), abs_tol=1e-10 * max(1.0, oracle),
                              details={"action": label, "phi0": phi0})


def suite_sdyson_mu(cfg, opts):
    reps = [_mu_case(a, repr(a.poly)) for a in _actions(cfg, opts)]
    if not opts.action:
        # quadratic action: the DeWitt factor is the Gaussian volume normalization up to (2 pi)^{D/2}
        H = gaussian.random_spd(2, cfg.stream("sdyson", 200).generator(), cond_max=10.0)
        poly = Poly(2, {(2, 0): H[0, 0] / 2, (1, 1): H[0, 1], (0, 2): H[1, 1] / 2})
        a = sdyson.ToyAction.from_poly(poly)
        mu = sdyson.leading_mu(a, sdyson.stationary_point(a, np.ones(2)))
        nu = gaussian.dx_normalization(gaussian.make_spec(H / (2 * math.pi), 1)).real
        reps.append(VerificationReport("leading-mu-gaussian", "finite2", mu, 2 * math.pi * nu,
                                       abs(mu - 2 * math.pi * nu), abs_tol=1e-10 * mu))
    return [_maybe_aggregate(reps, "leading-mu", "mu", cfg)]


def _geom_field(opts, D, rng):
    return geometry.random_vector_field(D, opts.field_degree, rng)


def _backends(opts):
    return ("analytic", "fd") if opts.backend == "both" else (opts.backend,)


def _divergence_cases(cfg, opts, kind, key):
    names = [opts.manifold] if opts.manifold else [n for n, f in geometry.BUILTIN_MANIFOLDS.items()
                                                   if f(True).kind == kind]
    reps = []
    for j, name in enumerate(names):
        for b, backend in enumerate(_backends(opts)):
            M = geometry.builtin_manifold(name, backend)
            if M.kind != kind:
                raise ConfigError(f"{name} is not {kind}")
            X = _geom_field(opts, M.dim, cfg.stream(key, 100 + j).generator())
            reps.append(geometry.verify_divergence_identity(M, X, opts.points, cfg.stream(key, 10 * j + b)))
    return reps


def _invariance_report(identity, equation, reps, tol=1e-9):
    worst = max(max(abs(r.lhs), abs(r.rhs)) for r in reps)
    return VerificationReport(identity, equation, max(abs(r.lhs) for r in reps), max(abs(r.rhs) for r in reps),
                              worst, abs_tol=tol, passed=bool(worst <= tol and all(r.passed for r in reps)),
                              details={"cases": [r.to_dict() for r in reps]})


def suite_geom_riemann(cfg, opts):
    reps = _divergence_cases(cfg, opts, "riemannian", "riemann")
    out = [aggregate("divergence-riemannian", "Divg", reps, seed=cfg.seed)]
    if not opts.manifold or opts.manifold == "sphere2":
        S = geometry.builtin_manifold("sphere2")
        kill = [geometry.verify_divergence_identity(S, K, opts.points, cfg.stream("riemann", 500 + j))
                for j, K in enumerate(geometry.killing_fields("sphere2"))]
        out.append(_invariance_report("killing-invariance", "killing", kill))
    return out


def suite_geom_symplectic(cfg, opts):
    reps = _divergence_cases(cfg, opts, "symplectic", "symplectic")
    out = [aggregate("divergence-symplectic", "DivO", reps, seed=cfg.seed)]
    if not opts.manifold:
        D = geometry.builtin_manifold("darboux2")
        rng = cfg.stream("hamiltonian").generator()
        ham = []
        for j in range(5):
            H = geometry.poly_scalar_field(random_poly(2, 4, rng))
            X = geometry.hamiltonian_field(D, H)
            ham.append(geometry.verify_divergence_identity(D, X, opts.points // 5 or 1,
                                                           cfg.stream("hamiltonian", 1 + j)))
        out.append(_invariance_report("hamiltonian-invariance", "sevenfive", ham))
        out.append(pfaffian_report(cfg.stream("pfaffian")))
    return out


def pfaffian_report(stream: RngStream, n_cases: int = 20) -> VerificationReport:
    """Pf(A)^2 = det(A) for random antisymmetric A with D in {2, 4, 6}, plus the canonical blocks."""
    rng = stream.generator()
    worst = 0.0
    for j in range(n_cases):
        d = (2, 4, 6)[j % 3]
        A = rng.standard_normal((d, d))
        A = A - A.T
        det = np.linalg.det(A)
        worst = max(worst, abs(geometry.pfaffian(A) ** 2 - det) / max(1.0, abs(det)))
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    canon = max(abs(geometry.pfaffian(J) - 1.0), abs(geometry.pfaffian(np.kron(np.eye(2), J)) - 1.0))
    return VerificationReport("pfaffian", "volform", None, None, max(worst, canon), abs_tol=1e-10,
                              details={"n_cases": n_cases, "canonical_error": canon}, seed=stream.seed)


def suite_geom_algebra(cfg, opts):
    M = geometry.builtin_manifold(opts.manifold or "flat2")
    rng = cfg.stream("algebra").generator()
    reps = []
    for j in range(opts.triples):
        X = geometry.random_vector_field(M.dim, 2, rng, "X")
        Y = geometry.random_vector_field(M.dim, 2, rng, "Y")
        f = geometry.poly_scalar_field(random_poly(M.dim, 2, rng))
        reps.append(geometry.verify_dx_algebra(M, X, Y, f, 2, cfg.stream("algebra", 1 + j)))
    return [aggregate("dx-algebra", "fourthree", reps, seed=cfg.seed, details={"manifold": M.name})]


SUITES = {
    ("wiener", "cf"): suite_wiener_cf,
    ("wiener", "cm"): suite_wiener_cm,
    ("wiener", "malliavin"): suite_wiener_malliavin,
    ("chaos", "commutators"): suite_chaos_commutators,
    ("chaos", "bridge"): suite_chaos_bridge,
    ("gauss", "fourier"): suite_gauss_fourier,
    ("gauss", "covariance"): suite_gauss_covariance,
    ("sdyson", "verify"): suite_sdyson_verify,
    ("sdyson", "mu"): suite_sdyson_mu,
    ("geom", "riemann"): suite_geom_riemann,
    ("geom", "symplectic"): suite_geom_symplectic,
    ("geom", "algebra"): suite_geom_algebra,
}


# ---------------------------------------------------------------- argument handling

OPTION_DEFAULTS = {
    "atoms": None, "phi": None, "functional": None, "times": None, "dump_paths": None,
    "modes": 4, "degree": 4, "cases": 50,
    "Q": None, "s": "1", "xprime": None, "method": "quadrature", "dump_quadrature": None,
    "action": None, "dim": None, "hbar": 1.0, "max_degree": 4,
    "manifold": None, "backend": "both", "points": 100, "field_degree": 3, "triples": 50,
}


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("run configuration")
    g.add_argument("--seed", type=int, help="master seed (default: $VOLFORMS_SEED or 42)")
    g.add_argument("--grid-n", type=int, help="time steps on [0, 1] (default 256)")
    g.add_argument("--n-samples", type=int, help="Monte Carlo sample count (default 100000)")
    g.add_argument("--sigma-threshold", type=float, help="pass threshold in standard errors (default 3)")
    g.add_argument("--abs-tol", type=float, help="tolerance of the Schwinger-Dyson checks (default 1e-8)")
    g.add_argument("--output", help="directory for JSON reports (default ./reports)")
    g.add_argument("--workers", type=int, help="threads for path sampling (default 1)")
    g.add_argument("--config", help="JSON file whose keys mirror the long flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="volforms", description="Verify volume-form identities numerically.")
    top = parser.add_subparsers(dest="group", metavar="COMMAND", required=True)
    subs = {}
    for group, names in COMMANDS.items():
        gp = top.add_parser(group, help=f"{group} identities")
        gsub = gp.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)
        for name in names:
            p = gsub.add_parser(name)
            _common(p)
            subs[(group, name)] = p
    p_all = top.add_parser("all", help="run every default suite")
    _common(p_all)

    for name in ("cf", "cm", "malliavin"):
        subs[("wiener", name)].add_argument("--dump-paths", metavar="FILE", help="write one sampled path as t,w CSV")
    subs[("wiener", "cf")].add_argument("--atoms", help='dual measure as "a@t,a@t"')
    for name in ("cm", "malliavin"):
        p = subs[("wiener", name)]
        p.add_argument("--phi", help="shift: basis:k, linear or zero")
        p.add_argument("--functional", help="expression over w1..wm, see docs/expr.md")
        p.add_argument("--times", help="comma-separated times for w1..wm (default 1.0)")
    p = subs[("chaos", "commutators")]
    p.add_argument("--modes", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--cases", type=int)
    for name in ("fourier", "covariance"):
        subs[("gauss", name)].add_argument("--Q", help='matrix as "2,0;0,8", JSON, or @file')
    p = subs[("gauss", "fourier")]
    p.add_argument("--s", choices=("1", "i"))
    p.add_argument("--xprime", help="comma-separated x'")
    p.add_argument("--method", choices=("quadrature", "mc"))
    p.add_argument("--dump-quadrature", metavar="FILE", help="write the quadrature table as point,weight,value CSV")
    for name in ("verify", "mu"):
        p = subs[("sdyson", name)]
        p.add_argument("--action", help="polynomial action over w1..wD, e.g. \"0.5*w1^2+0.1*w1^4\"")
        p.add_argument("--dim", type=int, help="field dimension D (default: highest symbol used)")
        p.add_argument("--hbar", type=float)
    subs[("sdyson", "verify")].add_argument("--max-degree", type=int)
    for name in ("riemann", "symplectic", "algebra"):
        subs[("geom", name)].add_argument("--manifold", choices=sorted(geometry.BUILTIN_MANIFOLDS))
    for name in ("riemann", "symplectic"):
        p = subs[("geom", name)]
        p.add_argument("--backend", choices=("analytic", "fd", "both"))
        p.add_argument("--points", type=int)
        p.add_argument("--field-degree", type=int)
    subs[("geom", "algebra")].add_argument("--triples", type=int)
    return parser


def _resolve(args: argparse.Namespace) -> tuple[RunConfig, argparse.Namespace]:
    file_cfg = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        unknown = set(file_cfg) - {f.name for f in fields(RunConfig)} - set(OPTION_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    values = {}
    env_seed = os.environ.get("VOLFORMS_SEED")
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"VOLFORMS_SEED is not an integer: {env_seed!r}") from None
    for f in fields(RunConfig):
        if f.name in file_cfg:
            values[f.name] = file_cfg[f.name]
        if getattr(args, f.name, None) is not None:
            values[f.name] = getattr(args, f.name)
    cfg = RunConfig(**values)
    opts = argparse.Namespace()
    for key, default in OPTION_DEFAULTS.items():
        v = getattr(args, key, None)
        if v is None:
            v = file_cfg.get(key, default)
        setattr(opts, key, v)
    return cfg, opts


def collect(command: str, cfg: RunConfig, opts: argparse.Namespace) -> list[VerificationReport]:
    """Reports for ``"group sub"`` or ``"all"``."""
    if command == "all":
        out = []
        for key, suite in SUITES.items():
            out.extend(suite(cfg, opts))
        return out
    key = tuple(command.split())
    if key not in SUITES:
        raise ConfigError(f"unknown subcommand {command!r}")
    return SUITES[key](cfg, opts)


def run(command: str, cfg: RunConfig, opts: argparse.Namespace | None = None, stdout=None) -> int:
    """Run a subcommand, write its reports to ``cfg.output`` and return the exit status."""
    stdout = stdout or sys.stdout
    if opts is None:
        opts = argparse.Namespace(**OPTION_DEFAULTS)
    try:
        reports = collect(command, cfg, opts)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    os.makedirs(cfg.output, exist_ok=True)
    for rep in reports:
        name = f"{rep.identity}.json"
        write_atomic(os.path.join(cfg.output, name), rep.to_json(timestamp=stamp))
        print(rep.summary(), file=stdout)
    n_fail = sum(not r.passed for r in reports)
    print(f"{len(reports) - n_fail}/{len(reports)} identities passed; reports in {cfg.output}", file=stdout)
    return 0 if n_fail == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = "all" if args.group == "all" else f"{args.group} {args.command}"
    try:
        cfg, opts = _resolve(args)
    except (ConfigError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(command, cfg, opts)


if __name__ == "__main__":
    sys.exit(main())
