"""Command-line front end.

Subcommands: sweep (stability maps), spectrum (eigenvalues of one scheme
instance), simulate (time-stepping trajectories), bounds (one-way analytic
curves), validate (cross-check battery), dump-matrices (assembled A and B).
Exit codes: 0 success, 1 analysis or validation failure, 2 usage errors.
"""

import argparse
import configparser
import sys

import numpy as np

from . import assembly, normalmode, spectral, stepper, sweep
from .errors import ParameterDomainError, SchemeError
from .params import DimensionlessParams


def _fmt(value):
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _add_param_arguments(parser):
    parser.add_argument("--scheme", required=True, choices=sorted(assembly.SCHEMES))
    parser.add_argument("--d-minus", type=float, default=0.0)
    parser.add_argument("--d-plus", type=float, default=0.0)
    parser.add_argument("--beta-minus", type=float, default=0.0)
    parser.add_argument("--beta-plus", type=float, default=0.0)
    parser.add_argument("--r", type=float, default=1.0)
    parser.add_argument("--n-minus", type=int, default=sweep.DEFAULT_N_MINUS)
    parser.add_argument("--n-plus", type=int, default=sweep.DEFAULT_N_PLUS)


def _params_from_args(args):
    return DimensionlessParams(
        d_plus=args.d_plus,
        d_minus=args.d_minus,
        beta_plus=args.beta_plus,
        beta_minus=args.beta_minus,
        r=args.r,
    )


# --- sweep ---


def _axis_from_config(section, prefix):
    return sweep.Axis(
        name=section[prefix],
        lo=float(section.get(f"{prefix}_lo", sweep.DEFAULT_LO)),
        hi=float(section.get(f"{prefix}_hi", sweep.DEFAULT_HI)),
        points=int(section.get(f"{prefix}_points", sweep.DEFAULT_POINTS)),
        scale=section.get(f"{prefix}_scale", "log"),
    )


def _sweep_spec_from_config(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path, encoding="utf-8"):
        raise ParameterDomainError(f"config file not found: {path}")
    for name in ("scheme", "axes", "fixed"):
        if not parser.has_section(name):
            raise ParameterDomainError(f"sweep config needs a [{name}] section")
    scheme_name = parser["scheme"].get("name")
    if scheme_name not in assembly.SCHEMES:
        raise ParameterDomainError(f"unknown scheme name {scheme_name!r}")
    axes = parser["axes"]
    fixed = {key: float(value) for key, value in parser["fixed"].items()}
    grid = parser["grid"] if parser.has_section("grid") else {}
    spec = sweep.SweepSpec(
        scheme=assembly.SCHEMES[scheme_name],
        axis_x=_axis_from_config(axes, "x"),
        axis_y=_axis_from_config(axes, "y"),
        fixed=fixed,
        n_minus=int(grid.get("n_minus", sweep.DEFAULT_N_MINUS)),
        n_plus=int(grid.get("n_plus", sweep.DEFAULT_N_PLUS)),
        tol=float(grid.get("tol", 1e-8)),
    )
    output = dict(parser["output"]) if parser.has_section("output") else {}
    return spec, output


def _replace_spec(spec, **updates):
    from dataclasses import replace

    return replace(spec, **updates)


def _cmd_sweep(args):
    if args.config:
        spec, output = _sweep_spec_from_config(args.config)
        if args.scheme:
            spec = _replace_spec(spec, scheme=assembly.SCHEMES[args.scheme])
    elif args.preset:
        scheme = args.scheme or "bulk-explicit-flux"
        spec = sweep.preset_sweep(args.preset, scheme=scheme, variant=args.variant, r=args.r)
        output = {}
    else:
        print("error: sweep needs --config or --preset", file=sys.stderr)
        return 2
    if args.n_minus is not None:
        spec = _replace_spec(spec, n_minus=args.n_minus)
    if args.n_plus is not None:
        spec = _replace_spec(spec, n_plus=args.n_plus)
    if args.tol is not None:
        spec = _replace_spec(spec, tol=args.tol)
    csv_path = args.csv or output.get("csv")
    pgm_path = args.pgm or output.get("pgm")
    if not csv_path:
        print("error: no CSV output path (use --csv or [output] csv)", file=sys.stderr)
        return 2
    field = sweep.run_sweep(spec)
    sweep.write_csv(field, csv_path)
    if pgm_path:
        sweep.write_pgm(field, pgm_path)
    counts = {name: int((field.classification == name).sum())
              for name in ("stable", "marginal", "unstable", "failed")}
    total = field.classification.size
    print(f"{field.metadata['scheme']}: {total} cells "
          f"({counts['stable']} stable, {counts['marginal']} marginal, "
          f"{counts['unstable']} unstable, {counts['failed']} failed) -> {csv_path}")
    return 0


# --- spectrum ---


def _cmd_spectrum(args):
    p = _params_from_args(args)
    pair = assembly.assemble(assembly.SCHEMES[args.scheme], p, args.n_minus, args.n_plus)
    spectrum = spectral.eigen_spectrum(spectral.update_matrix(pair))
    lines = ["re,im"]
    lines += [f"{_fmt(ev.real)},{_fmt(ev.imag)}" for ev in spectrum.eigenvalues]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    verdict = spectral.classify(spectrum.lambda_max, args.tol)
    print(f"lambda_max = {_fmt(spectrum.lambda_max)} ({verdict.value})", file=sys.stderr)
    return 0


# --- simulate ---


def _cmd_simulate(args):
    scheme = assembly.SCHEMES[args.scheme]
    p = _params_from_args(args)
    pair = assembly.assemble(scheme, p, args.n_minus, args.n_plus)
    layout = pair.layout
    state = stepper.random_state(layout, seed=args.seed)
    log_norms = [0.0]
    rows = ["step,norm,growth_estimate"]
    rows.append(f"0,{_fmt(1.0)},nan")
    total = 0.0
    for k in range(1, args.steps + 1):
        if args.stepper == "monolithic":
            state = stepper.step_monolithic(pair, state)
        else:
            state = stepper.step_partitioned(scheme, p, args.n_minus, args.n_plus, state)
        gain = stepper.state_norm(state)
        if gain == 0.0:
            rows.append(f"{k},0.0,nan")
            break
        total += np.log(gain)
        log_norms.append(total)
        # renormalize so unstable schemes cannot overflow the state
        vector = stepper.pack_state(state, layout) / gain
        state = stepper.unpack_state(vector, layout, state.step_index)
        if k >= args.burn_in + 2:
            window = np.asarray(log_norms[args.burn_in:])
            slope = np.polyfit(np.arange(window.shape[0]), window, 1)[0]
            estimate = _fmt(np.exp(slope))
        else:
            estimate = "nan"
        rows.append(f"{k},{_fmt(np.exp(total))},{estimate}")
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# --- bounds ---


def _bounds_values(d):
    return (
        normalmode.one_way_explicit_bound(d),
        normalmode.beljaars_bound(d),
        2.0 * d,
    )


def _cmd_bounds(args):
    if args.d is not None:
        explicit, beljaars, admissible = _bounds_values(args.d)
        print(f"beta_max_explicit,{_fmt(explicit)}")
        print(f"beta_max_beljaars,{_fmt(beljaars)}")
        print(f"beta_min_implicit_admissible,{_fmt(admissible)}")
        return 0
    values = np.logspace(np.log10(args.d_lo), np.log10(args.d_hi), args.points)
    print("d,beta_max_explicit,beta_max_beljaars,beta_min_implicit_admissible")
    for d in values:
        explicit, beljaars, admissible = _bounds_values(float(d))
        print(f"{_fmt(d)},{_fmt(explicit)},{_fmt(beljaars)},{_fmt(admissible)}")
    return 0


# --- validate ---


def _check(name, condition, failures, messages):
    messages.append(f"{'ok  ' if condition else 'FAIL'} {name}")
    if not condition:
        failures.append(name)


def _lambda_max(scheme, p, n_minus, n_plus):
    pair = assembly.assemble(scheme, p, n_minus, n_plus)
    return spectral.eigen_spectrum(spectral.update_matrix(pair)).lambda_max


def _validate_one_way(failures, messages):
    explicit = assembly.SCHEMES["one-way-explicit-flux"]
    implicit = assembly.SCHEMES["one-way-implicit-flux"]
    for d in (0.1, 1.0, 10.0):
        bound = normalmode.one_way_explicit_bound(d)
        p_hot = DimensionlessParams(0.0, d, 0.0, 2.0 * bound, 1.0)
        lam = _lambda_max(explicit, p_hot, 150, 1)
        # the scan keeps only admissible modes; its dominant root is the growth
        solutions = normalmode.gks_scan(explicit, p_hot)
        root = abs(solutions[0].A) if solutions else float("nan")
        _check(f"one-way explicit growth matches the scanned mode at d={d}",
               solutions and abs(lam - root) <= 1e-2 * root, failures, messages)
        p_cool = DimensionlessParams(0.0, d, 0.0, 0.5 * bound, 1.0)
        _check(f"one-way explicit stable below the bound at d={d}",
               _lambda_max(explicit, p_cool, 150, 1) <= 1.0 + 1e-8, failures, messages)
    rng = np.random.default_rng(seed=0)
    betas = 10.0 ** rng.uniform(-2, 2, size=12)
    ds = 10.0 ** rng.uniform(-2, 2, size=12)
    worst = 0.0
    for beta, d in zip(betas, ds):
        p = DimensionlessParams(0.0, float(d), 0.0, float(beta), 1.0)
        worst = max(worst, _lambda_max(implicit, p, 80, 1))
    _check("one-way implicit stable across sampled parameters",
           worst <= 1.0 + 1e-8, failures, messages)


def _validate_bulk(failures, messages):
    rng = np.random.default_rng(seed=1)
    for name in ("bulk-partial-flux", "bulk-implicit-flux", "bulk-sequential"):
        scheme = assembly.SCHEMES[name]
        worst = 0.0
        for _ in range(8):
            values = 10.0 ** rng.uniform(-2, 2, size=4)
            p = DimensionlessParams(values[0], values[1], values[2], values[3], 1.0)
            worst = max(worst, _lambda_max(scheme, p, 15, 15))
        _check(f"{name} stable across sampled parameters", worst <= 1.0 + 1e-8,
               failures, messages)
    scheme = assembly.SCHEMES["bulk-explicit-flux"]
    agree = True
    for _ in range(10):
        values = 10.0 ** rng.uniform(-2, 2, size=4)
        p = DimensionlessParams(values[0], values[1], values[2], values[3], 1.0)
        lam = _lambda_max(scheme, p, 40, 40)
        if abs(lam - 1.0) <= 5e-3:
            continue
        # the annulus must reach past the observed growth or the scan is blind
        scan = normalmode.ScanSettings(radius_max=max(10.0, 1.5 * lam + 1.0))
        if normalmode.normal_mode_verdict(scheme, p, scan) != (lam <= 1.0):
            agree = False
    _check("bulk explicit-flux scan verdicts match matrix classification", agree,
           failures, messages)


def _validate_dn(failures, messages):
    explicit = assembly.SCHEMES["dn-explicit"]
    agree = True
    for r in (2000.0, 1.0, 5e-4):
        for dm, dp in ((0.2, 0.2), (0.2, 0.7), (0.7, 0.2), (0.45, 0.45)):
            p = DimensionlessParams(dp, dm, 0.0, 0.0, r)
            lam = _lambda_max(explicit, p, 100, 100)
            if abs(lam - 1.0) <= 5e-3:
                continue
            if normalmode.normal_mode_verdict(explicit, p) != (lam <= 1.0):
                agree = False
    _check("dn-explicit verdict rule matches matrix classification", agree,
           failures, messages)
    implicit = assembly.SCHEMES["dn-implicit"]
    from scipy.optimize import minimize_scalar

    ok = True
    for dm in (0.1, 1.0):
        p = DimensionlessParams(1.0, dm, 0.0, 0.0, 1e-10)
        target = 1.0 / (1.0 + 4.0 * dm)
        result = minimize_scalar(
            lambda a: abs(normalmode.dispersion_residual(implicit, p, a)),
            bounds=(0.5 * target, min(1.5 * target, 0.999)), method="bounded",
            options={"xatol": 1e-12},
        )
        if abs(result.x - target) > 1e-6:
            ok = False
    _check("dn-implicit small-ratio root sits at 1/(1+4d)", ok, failures, messages)


def _cmd_validate(args):
    failures, messages = [], []
    if args.suite in ("one-way", "all"):
        _validate_one_way(failures, messages)
    if args.suite in ("bulk", "all"):
        _validate_bulk(failures, messages)
    if args.suite in ("dn", "all"):
        _validate_dn(failures, messages)
    for message in messages:
        print(message)
    passed = len(messages) - len(failures)
    print(f"{passed} passed, {len(failures)} failed")
    return 1 if failures else 0


# --- dump-matrices ---


def _cmd_dump_matrices(args):
    p = _params_from_args(args)
    pair = assembly.assemble(assembly.SCHEMES[args.scheme], p, args.n_minus, args.n_plus)
    assembly.write_dense_csv(pair.A, f"{args.out_prefix}_A.csv")
    assembly.write_dense_csv(pair.B, f"{args.out_prefix}_B.csv")
    print(f"wrote {args.out_prefix}_A.csv and {args.out_prefix}_B.csv ({pair.n}x{pair.n})")
    return 0


# --- parser ---


def _build_parser():
    parser = argparse.ArgumentParser(prog="cplstab",
                                     description="Stability analysis of coupled diffusion schemes")
    commands = parser.add_subparsers(dest="command", required=True)

    p_sweep = commands.add_parser("sweep", help="map lambda_max over a parameter plane")
    p_sweep.add_argument("--config", help="INI sweep description")
    p_sweep.add_argument("--preset", choices=sweep.PRESET_NAMES)
    p_sweep.add_argument("--scheme", choices=sorted(assembly.SCHEMES))
    p_sweep.add_argument("--variant", type=int, default=0, help="variant index for fig4/fig6")
    p_sweep.add_argument("--r", type=float, default=1.0, help="heat-content ratio for fig8/fig9")
    p_sweep.add_argument("--csv", help="output CSV path (overrides config)")
    p_sweep.add_argument("--pgm", help="optional PGM rendering path")
    p_sweep.add_argument("--n-minus", type=int, default=None)
    p_sweep.add_argument("--n-plus", type=int, default=None)
    p_sweep.add_argument("--tol", type=float, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_spectrum = commands.add_parser("spectrum", help="eigenvalues of one scheme instance")
    _add_param_arguments(p_spectrum)
    p_spectrum.add_argument("--tol", type=float, default=1e-8)
    p_spectrum.add_argument("--out", help="write CSV here instead of stdout")
    p_spectrum.set_defaults(func=_cmd_spectrum)

    p_simulate = commands.add_parser("simulate", help="run a trajectory and fit its growth")
    _add_param_arguments(p_simulate)
    p_simulate.add_argument("--steps", type=int, default=300)
    p_simulate.add_argument("--seed", type=int, default=0)
    p_simulate.add_argument("--burn-in", type=int, default=50)
    p_simulate.add_argument("--stepper", choices=("monolithic", "partitioned"),
                            default="monolithic")
    p_simulate.add_argument("--out", help="write CSV here instead of stdout")
    p_simulate.set_defaults(func=_cmd_simulate)

    p_bounds = commands.add_parser("bounds", help="one-way analytic stability curves")
    p_bounds.add_argument("--d", type=float, help="single evaluation point")
    p_bounds.add_argument("--d-lo", type=float, default=1e-2)
    p_bounds.add_argument("--d-hi", type=float, default=1e3)
    p_bounds.add_argument("--points", type=int, default=101)
    p_bounds.set_defaults(func=_cmd_bounds)

    p_validate = commands.add_parser("validate", help="cross-check battery")
    p_validate.add_argument("--suite", choices=("one-way", "bulk", "dn", "all"), default="all")
    p_validate.set_defaults(func=_cmd_validate)

    p_dump = commands.add_parser("dump-matrices", help="write assembled A and B as CSV")
    _add_param_arguments(p_dump)
    p_dump.add_argument("--out-prefix", required=True)
    p_dump.set_defaults(func=_cmd_dump_matrices)

    return parser


def cli_main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code) if err.code is not None else 0
    try:
        return args.func(args)
    except (ParameterDomainError, SchemeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # analysis failures keep a distinct exit code
        print(f"failure: {err}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())
