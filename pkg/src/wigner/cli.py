"""Command-line entry points: run orchestration, config parsing, grid dumps.

Heavy numerical imports happen inside functions so that ``--threads`` can cap
BLAS worker pools before any thread pool is created.
"""

from __future__ import annotations

import argparse
import configparser
import difflib
import os
import sys
import time
from dataclasses import dataclass, field

from .errors import ConfigurationError, NumericalError, WignerError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4

_MODES = ("evolve", "stationary", "moyal", "lindblad", "ensemble", "refine")

_KNOWN_KEYS = {
    "run": {"mode"},
    "model": {"potential", "mass", "hbar", "gamma", "diffusion"},
    "basis": {"order", "j_coarse", "j_fine", "q_min", "q_max", "p_min", "p_max"},
    "initial": {"type", "q0", "p0", "sigma_q", "sigma_p", "norm"},
    "solver": {"dt", "t_end", "scheme", "renormalize", "epsilon", "n_max",
               "n_min", "n_states", "pairs", "store_every"},
    "ensemble": {"n_max", "weights", "u0", "g"},
    "output": {"directory", "grid_resolution", "checkpoint_every"},
    "diagnostics": {"theta_loc", "theta_chaos", "theta_stab", "theta_frac",
                    "top_k"},
}


@dataclass
class RunConfig:
    mode: str
    potential_text: str
    mass: float
    hbar: float
    gamma: float
    diffusion: float
    order: int
    j_coarse: int
    j_fine: int
    q_box: tuple
    p_box: tuple
    initial: dict
    dt: float
    t_end: float
    scheme: str
    renormalize: bool
    epsilon: float
    n_max: int
    n_min: int
    n_states: int
    pairs: int
    store_every: int
    ensemble: dict
    out_directory: str
    grid_resolution: int
    checkpoint_every: int
    thresholds: dict
    raw_text: str = ""


def parse_config(path) -> RunConfig:
    """Read and validate an INI-like run config; reports ALL errors at once."""
    if not os.path.isfile(path):
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            raw = fh.read()
        parser.read_string(raw, source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"config syntax error: {exc}") from exc

    errors = []

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            close = difflib.get_close_matches(section, _KNOWN_KEYS, n=1)
            hint = f"; did you mean [{close[0]}]?" if close else ""
            errors.append(f"unknown section [{section}]{hint}")
            continue
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                close = difflib.get_close_matches(key, _KNOWN_KEYS[section], n=1)
                hint = f"; did you mean {close[0]!r}?" if close else ""
                errors.append(f"unknown key {key!r} in [{section}]{hint}")

    def get(section, key, default=None, cast=str, required=False):
        try:
            if parser.has_option(section, key):
                return cast(parser.get(section, key))
            if required:
                errors.append(f"missing required key {key!r} in [{section}]")
                return default
            return default
        except (ValueError, ConfigurationError) as exc:
            errors.append(f"[{section}] {key}: {exc}")
            return default

    def as_bool(text):
        t = text.strip().lower()
        if t in ("1", "true", "yes", "on"):
            return True
        if t in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")

    mode = get("run", "mode", required=True, default="evolve")
    if mode not in _MODES:
        errors.append(f"[run] mode must be one of {_MODES} (got {mode!r})")

    potential_text = get("model", "potential", default="0")
    mass = get("model", "mass", 1.0, float)
    hbar = get("model", "hbar", 1.0, float)
    gamma = get("model", "gamma", 0.0, float)
    diffusion = get("model", "diffusion", 0.0, float)
    if mass is not None and mass <= 0:
        errors.append("[model] mass must be positive")
    if hbar is not None and hbar <= 0:
        errors.append("[model] hbar must be positive")
    if gamma is not None and gamma < 0:
        errors.append("[model] gamma must be non-negative")
    if diffusion is not None and diffusion < 0:
        errors.append("[model] diffusion must be non-negative")
    from .model import parse_potential
    try:
        parse_potential(potential_text)
    except ConfigurationError as exc:
        errors.append(f"[model] potential: {exc}")

    order = get("basis", "order", 6, int)
    j_coarse = get("basis", "j_coarse", 3, int)
    j_fine = get("basis", "j_fine", 6, int)
    q_min = get("basis", "q_min", -5.0, float)
    q_max = get("basis", "q_max", 5.0, float)
    p_min = get("basis", "p_min", -5.0, float)
    p_max = get("basis", "p_max", 5.0, float)
    if order is not None and (order % 2 or not 2 <= order <= 10):
        errors.append("[basis] order must be an even integer in 2..10")
    if None not in (j_coarse, j_fine) and j_coarse > j_fine:
        errors.append("[basis] j_coarse must not exceed j_fine")
    if None not in (q_min, q_max) and q_min >= q_max:
        errors.append("[basis] q_min must be below q_max")
    if None not in (p_min, p_max) and p_min >= p_max:
        errors.append("[basis] p_min must be below p_max")

    initial = {
        "type": get("initial", "type", "gaussian"),
        "q0": get("initial", "q0", 0.0, float),
        "p0": get("initial", "p0", 0.0, float),
        "sigma_q": get("initial", "sigma_q", None,
                       lambda t: float(t)),
        "sigma_p": get("initial", "sigma_p", None,
                       lambda t: float(t)),
        "norm": get("initial", "norm", 1.0, float),
    }
    if initial["type"] not in ("gaussian",):
        errors.append(f"[initial] type must be 'gaussian' (got {initial['type']!r})")

    dt = get("solver", "dt", 0.01, float)
    t_end = get("solver", "t_end", 1.0, float)
    scheme = get("solver", "scheme", "implicit_midpoint")
    renormalize = get("solver", "renormalize", False, as_bool)
    epsilon = get("solver", "epsilon", 1e-4, float)
    n_max = get("solver", "n_max", j_fine if j_fine else 6, int)
    n_min = get("solver", "n_min", 4, int)
    n_states = get("solver", "n_states", 4, int)
    pairs = get("solver", "pairs", 4, int)
    store_every = get("solver", "store_every", 1, int)
    if dt is not None and dt <= 0:
        errors.append("[solver] dt must be positive")
    if t_end is not None and t_end < 0:
        errors.append("[solver] t_end must be non-negative")
    if scheme not in ("implicit_midpoint", "explicit_rk4"):
        errors.append("[solver] scheme must be implicit_midpoint or explicit_rk4")
    if epsilon is not None and epsilon <= 0:
        errors.append("[solver] epsilon must be positive")

    ensemble = None
    if parser.has_section("ensemble"):
        ensemble = {
            "n_max": get("ensemble", "n_max", 1, int),
            "weights": get("ensemble", "weights", "coherent:1.0"),
            "u0": get("ensemble", "u0", 1.0, float),
            "g": get("ensemble", "g", "q^2"),
        }
        try:
            parse_potential(ensemble["g"])
        except ConfigurationError as exc:
            errors.append(f"[ensemble] g: {exc}")
    elif mode == "ensemble":
        errors.append("mode 'ensemble' requires an [ensemble] section")

    out_directory = get("output", "directory", None)
    grid_resolution = get("output", "grid_resolution", 128, int)
    checkpoint_every = get("output", "checkpoint_every", 10, int)
    if grid_resolution is not None and grid_resolution < 2:
        errors.append("[output] grid_resolution must be >= 2 per axis")

    thresholds = {
        "theta_loc": get("diagnostics", "theta_loc", 0.05, float),
        "theta_chaos": get("diagnostics", "theta_chaos", 0.5, float),
        "theta_stab": get("diagnostics", "theta_stab", 1e-3, float),
        "theta_frac": get("diagnostics", "theta_frac", 0.9, float),
        "top_k": get("diagnostics", "top_k", 32, int),
    }

    if errors:
        raise ConfigurationError(
            "invalid configuration:\n  " + "\n  ".join(errors))

    return RunConfig(
        mode=mode, potential_text=potential_text, mass=mass, hbar=hbar,
        gamma=gamma, diffusion=diffusion, order=order, j_coarse=j_coarse,
        j_fine=j_fine, q_box=(q_min, q_max), p_box=(p_min, p_max),
        initial=initial, dt=dt, t_end=t_end, scheme=scheme,
        renormalize=renormalize, epsilon=epsilon, n_max=n_max, n_min=n_min,
        n_states=n_states, pairs=pairs, store_every=store_every,
        ensemble=ensemble, out_directory=out_directory,
        grid_resolution=grid_resolution, checkpoint_every=checkpoint_every,
        thresholds=thresholds, raw_text=raw,
    )


# ---------------------------------------------------------------------------
# grid dumps
# ---------------------------------------------------------------------------

def dump_grid(W, resolution: int, path) -> None:
    """Write a plain-text W(q,p) grid: WGRID 1 header, p-outer rows."""
    import numpy as np

    if resolution < 2:
        raise ConfigurationError("grid resolution must be >= 2 per axis")
    ps = W.ps
    qmin, qmax = ps.basis_q.domain
    pmin, pmax = ps.basis_p.domain
    qs = qmin + (qmax - qmin) * (np.arange(resolution) + 0.5) / resolution
    ps_ = pmin + (pmax - pmin) * (np.arange(resolution) + 0.5) / resolution
    vals = ps.evaluate_grid(np.real(W.coeffs), qs, ps_)  # [iq, ip]
    with open(path, "w") as fh:
        fh.write("WGRID 1\n")
        fh.write("%d %d %.17g %.17g %.17g %.17g %.17g\n"
                 % (resolution, resolution, qmin, qmax, pmin, pmax, W.time))
        for ip in range(resolution):
            fh.write(" ".join("%.17g" % vals[iq, ip] for iq in range(resolution)))
            fh.write("\n")


def load_grid(path):
    """Read a WGRID 1 file; returns (header dict, 2D array [ip, iq])."""
    import numpy as np

    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != "WGRID 1":
            raise ConfigurationError(f"{path}: not a WGRID 1 file")
        parts = fh.readline().split()
        nq, np_rows = int(parts[0]), int(parts[1])
        header = {
            "nq": nq, "np": np_rows,
            "qmin": float(parts[2]), "qmax": float(parts[3]),
            "pmin": float(parts[4]), "pmax": float(parts[5]),
            "time": float(parts[6]),
        }
        data = np.loadtxt(fh)
    data = np.atleast_2d(data)
    if data.shape != (np_rows, nq):
        raise ConfigurationError(f"{path}: grid shape mismatch")
    return header, data


def _dump_marginal(marg, resolution, path):
    import numpy as np

    a, b = marg.basis.domain
    xs = a + (b - a) * (np.arange(resolution) + 0.5) / resolution
    vals = marg.evaluate(xs)
    with open(path, "w") as fh:
        for x, v in zip(xs, vals):
            fh.write("%.17g %.17g\n" % (x, v))


# ---------------------------------------------------------------------------
# run orchestration
# ---------------------------------------------------------------------------

def _make_run_dir(cfg: RunConfig, override) -> str:
    root = override or cfg.out_directory or os.environ.get("WIGNER_OUT", ".")
    os.makedirs(root, exist_ok=True)
    base = os.path.join(root, f"run-{cfg.mode}")
    candidate = base
    suffix = 0
    while os.path.exists(candidate):
        suffix += 1
        candidate = f"{base}-{suffix}"
    os.makedirs(candidate)
    return candidate


def _build_phase_space(cfg: RunConfig, j_fine=None):
    from .assembly import PhaseSpaceBasis
    from .basis import WaveletBasis, daubechies_filter

    filt = daubechies_filter(cfg.order)
    j = j_fine if j_fine is not None else cfg.j_fine
    bq = WaveletBasis(filter=filt, j_coarse=min(cfg.j_coarse, j), j_fine=j,
                      domain=cfg.q_box)
    bp = WaveletBasis(filter=filt, j_coarse=min(cfg.j_coarse, j), j_fine=j,
                      domain=cfg.p_box)
    return PhaseSpaceBasis(bq, bp)


def _initial_field(cfg: RunConfig, ps):
    import numpy as np

    from .solve import CoefficientField

    ini = cfg.initial
    sq = ini["sigma_q"] if ini["sigma_q"] is not None else (cfg.hbar / 2.0) ** 0.5
    sp_ = ini["sigma_p"] if ini["sigma_p"] is not None else (cfg.hbar / 2.0) ** 0.5
    q0, p0, norm = ini["q0"], ini["p0"], ini["norm"]
    amp = norm / (2.0 * np.pi * sq * sp_)

    def f(q, p):
        return amp * np.exp(-((q - q0) ** 2) / (2 * sq ** 2)
                            - ((p - p0) ** 2) / (2 * sp_ ** 2))

    return CoefficientField(ps=ps, coeffs=ps.project(f))


def _model_params(cfg: RunConfig):
    from .model import ModelParams

    return ModelParams(mass=cfg.mass, hbar=cfg.hbar, gamma=cfg.gamma,
                       diffusion=cfg.diffusion)


def _thresholds(cfg: RunConfig):
    from .diagnostics import ClassifierThresholds

    return ClassifierThresholds(**cfg.thresholds)


def run(cfg: RunConfig, out_override=None, verbose=False) -> int:
    """Execute a validated config; writes manifest and artifacts; exit code."""
    import numpy as np
    import scipy

    from . import __version__
    from .diagnostics import diagnostics_report
    from .model import parse_potential
    from .solve import EvolutionConfig

    t_wall = time.time()
    run_dir = _make_run_dir(cfg, out_override)
    manifest = [
        "wigner run manifest",
        f"mode = {cfg.mode}",
        f"package_version = {__version__}",
        f"python_version = {sys.version.split()[0]}",
        f"numpy_version = {np.__version__}",
        f"scipy_version = {scipy.__version__}",
        "",
        "[config]",
        cfg.raw_text.rstrip(),
        "",
    ]
    not_converged = False
    U = parse_potential(cfg.potential_text)
    params = _model_params(cfg)
    evo_cfg = EvolutionConfig(dt=cfg.dt, t_end=cfg.t_end, scheme=cfg.scheme,
                              renormalize=cfg.renormalize,
                              store_every=cfg.store_every)

    try:
        if cfg.mode in ("evolve", "lindblad"):
            trajectory = _run_evolution(cfg, U, params, evo_cfg, run_dir)
        elif cfg.mode == "ensemble":
            trajectory = _run_ensemble(cfg, params, evo_cfg, run_dir)
        elif cfg.mode == "stationary":
            trajectory = _run_stationary(cfg, U, params, run_dir, manifest)
        elif cfg.mode == "moyal":
            trajectory = _run_moyal(cfg, U, params, run_dir, manifest)
        elif cfg.mode == "refine":
            trajectory, not_converged = _run_refine(cfg, U, params, run_dir,
                                                    manifest)
        else:  # pragma: no cover - parse_config rejects unknown modes
            raise ConfigurationError(f"unhandled mode {cfg.mode!r}")
    except NumericalError as exc:
        _write_failure(run_dir, manifest, f"numerical error: {exc}")
        if verbose:
            raise
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    final = trajectory[-1]
    dump_grid(trajectory[0], cfg.grid_resolution,
              os.path.join(run_dir, "w_initial.wgrid"))
    dump_grid(final, cfg.grid_resolution,
              os.path.join(run_dir, "w_final.wgrid"))
    _dump_scale_parts(cfg, final, run_dir)
    _dump_checkpoints(cfg, trajectory, run_dir)

    from .diagnostics import marginals
    dq, dp = marginals(final)
    _dump_marginal(dq, cfg.grid_resolution,
                   os.path.join(run_dir, "marginal_q.txt"))
    _dump_marginal(dp, cfg.grid_resolution,
                   os.path.join(run_dir, "marginal_p.txt"))

    if len(trajectory) >= 3:
        report = diagnostics_report(trajectory, hbar=cfg.hbar,
                                    thresholds=_thresholds(cfg))
    else:
        report = diagnostics_report([final] * 3, hbar=cfg.hbar,
                                    thresholds=_thresholds(cfg))
    manifest += ["", "[diagnostics]", report.to_text().rstrip(), ""]
    manifest.append(f"converged = {not not_converged}")

    with open(os.path.join(run_dir, "manifest.txt"), "w") as fh:
        fh.write("\n".join(manifest) + "\n")
    with open(os.path.join(run_dir, "timing.txt"), "w") as fh:
        fh.write(f"wall_seconds = {time.time() - t_wall:.3f}\n")

    if verbose:
        print(f"run artifacts in {run_dir}")
        print(report.to_text(), end="")
    else:
        print(run_dir)
    return EXIT_NOT_CONVERGED if not_converged else EXIT_OK


def _run_evolution(cfg, U, params, evo_cfg, run_dir):
    from .ensemble import lindblad_evolve

    ps = _build_phase_space(cfg)
    W0 = _initial_field(cfg, ps)
    return lindblad_evolve(W0, U, params, evo_cfg)


def _run_ensemble(cfg, params, evo_cfg, run_dir):
    import numpy as np

    from .ensemble import (FockEnsemble, coherent_weights,
                           evolve_fock_hierarchy, incoherent_superpose)
    from .model import parse_potential

    ps = _build_phase_space(cfg)
    W0 = _initial_field(cfg, ps)
    spec = cfg.ensemble
    text = spec["weights"].strip()
    if text.startswith("coherent:"):
        weights = coherent_weights(float(text.split(":", 1)[1]), spec["n_max"])
    else:
        weights = np.array([float(tok) for tok in text.replace(",", " ").split()])
        if weights.size != spec["n_max"] + 1:
            raise ConfigurationError(
                f"[ensemble] expected {spec['n_max'] + 1} weights, "
                f"got {weights.size}")
        weights = weights / weights.sum()
    ens = FockEnsemble(weights=weights, U0=spec["u0"],
                       g=parse_potential(spec["g"]),
                       fields=[W0.copy() for _ in weights])
    evolved = evolve_fock_hierarchy(ens, params, evo_cfg)
    out = incoherent_superpose(evolved)
    return [incoherent_superpose(ens), out, out.copy()]


def _run_stationary(cfg, U, params, run_dir, manifest):
    from .assembly import assemble_stationary_cnumber
    from .solve import stationary_eigen

    ps = _build_phase_space(cfg)
    A = assemble_stationary_cnumber(ps, U, params)
    states = stationary_eigen(A, cfg.n_states)
    manifest.append("[eigenvalues]")
    for i, (eps, _) in enumerate(states):
        manifest.append(f"eps_{i} = {eps:.12g}")
    fields = [W for _, W in states]
    return [fields[0], fields[0].copy(), fields[0].copy()]


def _run_moyal(cfg, U, params, run_dir, manifest):
    from .assembly import assemble_stationary_pair
    from .solve import moyal_eigen

    ps = _build_phase_space(cfg)
    A_sym, A_anti = assemble_stationary_pair(ps, U, params)
    pairs = moyal_eigen(A_sym, A_anti, cfg.pairs, hbar=params.hbar)
    manifest.append("[eigenvalues]")
    for i, (e_lo, e_hi, _) in enumerate(pairs):
        manifest.append(f"pair_{i} = {e_lo:.12g} {e_hi:.12g}")
    import numpy as np

    from .solve import CoefficientField
    W = pairs[0][2]
    W = CoefficientField(ps=W.ps, coeffs=np.real(W.coeffs), time=W.time)
    return [W, W.copy(), W.copy()]


def _run_refine(cfg, U, params, run_dir, manifest):
    from .assembly import assemble_stationary_cnumber
    from .solve import refine_until, stationary_eigen

    def solve_at_level(N):
        ps = _build_phase_space(cfg, j_fine=N)
        A = assemble_stationary_cnumber(ps, U, params)
        return stationary_eigen(A, 1)[0][1]

    W, report = refine_until(solve_at_level, cfg.epsilon, cfg.n_max,
                             n_min=cfg.n_min)
    manifest.append("[refinement]")
    for N, diff in report.levels_tried:
        manifest.append(f"level_{N}_difference = {diff:.12g}")
    manifest.append(f"accepted_level = {report.accepted_level}")
    manifest.append(f"refine_converged = {report.converged}")
    manifest.append(f"monotone = {report.monotone}")
    return [W, W.copy(), W.copy()], not report.converged


def _dump_scale_parts(cfg, final, run_dir):
    from .solve import reconstruct_by_scale

    bq = final.ps.basis_q
    cut = min(bq.j_coarse + 1, bq.j_fine)
    slow, fast = reconstruct_by_scale(final, cut)
    dump_grid(slow, cfg.grid_resolution,
              os.path.join(run_dir, "scale_slow.wgrid"))
    for i, part in enumerate(fast):
        dump_grid(part, cfg.grid_resolution,
                  os.path.join(run_dir, f"scale_fast_{cut + i}.wgrid"))


def _dump_checkpoints(cfg, trajectory, run_dir):
    import numpy as np

    kept = trajectory[:: max(cfg.checkpoint_every, 1)]
    if trajectory[-1] is not kept[-1]:
        kept = kept + [trajectory[-1]]
    with open(os.path.join(run_dir, "checkpoints.txt"), "w") as fh:
        for i, W in enumerate(kept):
            name = f"checkpoint_{i:04d}.npy"
            np.save(os.path.join(run_dir, name), W.coeffs)
            fh.write("%s %.17g\n" % (name, W.time))


def _write_failure(run_dir, manifest, message):
    manifest += ["", f"error = {message}"]
    with open(os.path.join(run_dir, "manifest.txt"), "w") as fh:
        fh.write("\n".join(manifest) + "\n")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _cap_threads(n):
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(n)


def _cmd_run(args) -> int:
    _cap_threads(args.threads)
    try:
        cfg = parse_config(args.config)
    except ConfigurationError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg, out_override=args.out, verbose=args.verbose)
    except ConfigurationError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def _cmd_validate(args) -> int:
    try:
        parse_config(args.config)
    except ConfigurationError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


def _cmd_tables(args) -> int:
    _cap_threads(args.threads)
    from .basis import connection_coefficients, daubechies_filter

    try:
        filt = daubechies_filter(args.order)
    except (ConfigurationError, WignerError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    print(f"filter order {args.order}:")
    print("  taps:", " ".join("%.17g" % h for h in filt.taps))
    for d in range(1, args.max_deriv + 1):
        try:
            table = connection_coefficients(filt, 0, d)
        except ConfigurationError as exc:
            print(f"  derivative {d}: {exc}")
            continue
        print(f"  derivative {d} offsets {table.offsets.min()}..{table.offsets.max()}:")
        print("   ", " ".join("%.12g" % v for v in table.values))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wigner",
        description="Wavelet-Galerkin Wigner-function solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a run config")
    p_run.add_argument("config")
    p_run.add_argument("--threads", type=int, default=None,
                       help="cap BLAS/worker threads (1 for determinism)")
    p_run.add_argument("--out", default=None, help="output root directory")
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="validate a run config")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_tab = sub.add_parser("tables", help="precompute/inspect basis tables")
    p_tab.add_argument("--order", type=int, required=True)
    p_tab.add_argument("--max-deriv", type=int, default=2)
    p_tab.add_argument("--threads", type=int, default=None)
    p_tab.set_defaults(func=_cmd_tables)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WignerError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
