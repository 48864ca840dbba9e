"""Command line front-end.

Every number written here comes from a library call; the CLI only parses
the configuration, loops and formats.

Configuration files hold one ``key = value`` per line with dotted keys::

    units = omega_v
    cavity.omega_c = 0.0          # or cavity.length / cavity.alpha_deg / cavity.n_eff
    cavity.kappa_c = 2.0
    cavity.g_N = 7.0
    molecule.omega_m = 0.0
    molecule.kappa_tilde = 0.01
    molecule.mode1.omega_v = 1.0
    molecule.mode1.S = 1.0
    molecule.mode1.Q = 0.9
    molecule.mode1.multiplicity = 1
    environment.k_B_T = 1.0
    environment.omega_L = 25.0
    numerics.grid_points = 4001
    numerics.grid_span = 40.0
    numerics.tolerance = 1e-12
    numerics.max_order = 512
    numerics.detuning_range = -14:14
    output.path = spectrum.csv

A line ``[cavity]`` sets a prefix for the keys that follow, so sectioned
files work too.  ``#`` starts a comment.
"""
import argparse
import concurrent.futures
import dataclasses
import hashlib
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .analysis import PolaritonFeatures, PolaritonModel, extract_features
from .errors import AmbiguousSplittingError, ConfigurationError, DomainError, PolaritonixError
from .oracle import closed_form_distance, convolution_table_errors, detailed_balance_error
from .pe import DEFAULT_TOLERANCE, MAX_ORDER, ThermalEnv, VibrationalMode, total_pe
from .response import (
    CavityParams,
    MoleculeParams,
    absorption_mixture,
    cavity_frequency_from_geometry,
    coupled_oscillator_reference,
    effective_kappa_m,
    elastic_spectrum,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_AMBIGUOUS = 4
EXIT_VALIDATION = 5

NORMALIZATION_TOL = 1e-10
DETAILED_BALANCE_TOL = 1e-2
ORACLE_TOL = 1e-2
CONVOLUTION_TOL = 1e-3

FEATURE_FIELDS = [f.name for f in dataclasses.fields(PolaritonFeatures)]
SWEEP_PARAMETERS = ("detuning", "temperature")

_KNOWN_KEYS = {
    "units",
    "cavity.omega_c", "cavity.kappa_c", "cavity.g_N", "cavity.length", "cavity.alpha_deg",
    "cavity.n_eff", "cavity.speed_of_light",
    "molecule.omega_m", "molecule.kappa_tilde",
    "environment.k_B_T", "environment.omega_L",
    "numerics.grid_points", "numerics.grid_span", "numerics.tolerance", "numerics.max_order",
    "numerics.detuning_range",
    "output.path",
}
_MODE_KEYS = {"omega_v", "S", "Q", "multiplicity"}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Parsed configuration with the raw key/value pairs kept for the header."""

    cavity: CavityParams
    molecule: MoleculeParams
    env: ThermalEnv
    grid_points: int = 4001
    grid_span: float = None
    tolerance: float = DEFAULT_TOLERANCE
    max_order: int = MAX_ORDER
    detuning_range: tuple = None
    output: str = None
    units: str = "omega_v"
    raw: tuple = ()


def parse_key_values(text):
    """Read ``key = value`` lines into an ordered dict of strings."""
    values = {}
    prefix = ""
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            prefix = line[1:-1].strip()
            prefix = prefix + "." if prefix else ""
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = prefix + key
        if key in values:
            raise ConfigurationError(f"line {number}: duplicate key {key!r}")
        values[key] = value
    return values


def _number(values, key, default=None, cast=float):
    if key not in values:
        if default is None:
            raise ConfigurationError(f"missing required key {key!r}")
        return default
    try:
        return cast(values[key])
    except ValueError:
        raise ConfigurationError(f"{key}: cannot read {values[key]!r} as a number") from None


def _range(text, key):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigurationError(f"{key}: expected 'start:stop', got {text!r}") from None
    if not lo < hi:
        raise ConfigurationError(f"{key}: start must be below stop")
    return lo, hi


def config_from_values(values, require_modes=True):
    """Build a :class:`RunConfig` from parsed key/value pairs.

    Raises
    ------
    ConfigurationError
        Unknown or missing keys, unreadable numbers, or unphysical values.
    """
    modes = {}
    for key in values:
        parts = key.split(".")
        if len(parts) == 3 and parts[0] == "molecule" and parts[1].startswith("mode"):
            if parts[2] not in _MODE_KEYS:
                raise ConfigurationError(f"unknown mode field {key!r}")
            modes.setdefault(parts[1], {})[parts[2]] = key
        elif key not in _KNOWN_KEYS:
            raise ConfigurationError(f"unknown key {key!r}")

    try:
        mode_list = []
        for name in sorted(modes, key=lambda n: (len(n), n)):
            prefix = f"molecule.{name}."
            mode_list.append(VibrationalMode(
                _number(values, prefix + "omega_v"),
                _number(values, prefix + "S"),
                _number(values, prefix + "Q"),
                _number(values, prefix + "multiplicity", 1, int),
            ))
        if require_modes and not mode_list:
            raise ConfigurationError("at least one vibrational mode is required")

        if "cavity.omega_c" in values:
            omega_c = _number(values, "cavity.omega_c")
        elif "cavity.length" in values:
            omega_c = cavity_frequency_from_geometry(
                _number(values, "cavity.length"),
                math.radians(_number(values, "cavity.alpha_deg", 0.0)),
                _number(values, "cavity.n_eff", math.inf),
                _number(values, "cavity.speed_of_light", 299_792_458.0),
            )
        else:
            raise ConfigurationError("give cavity.omega_c or the cavity geometry")
        cavity = CavityParams(omega_c, _number(values, "cavity.kappa_c"), _number(values, "cavity.g_N"))
        molecule = MoleculeParams(
            _number(values, "molecule.omega_m"),
            _number(values, "molecule.kappa_tilde", 0.0),
            tuple(mode_list),
        )
        effective_kappa_m(molecule)
        cutoff = values.get("environment.omega_L")
        env = ThermalEnv(_number(values, "environment.k_B_T"),
                         None if cutoff is None else _number(values, "environment.omega_L"))
    except DomainError as exc:
        raise ConfigurationError(str(exc)) from None

    detuning = values.get("numerics.detuning_range")
    grid_points = _number(values, "numerics.grid_points", 4001, int)
    if grid_points < 2:
        raise ConfigurationError("numerics.grid_points must be at least 2")
    span = values.get("numerics.grid_span")
    return RunConfig(
        cavity=cavity,
        molecule=molecule,
        env=env,
        grid_points=grid_points,
        grid_span=None if span is None else _number(values, "numerics.grid_span"),
        tolerance=_number(values, "numerics.tolerance", DEFAULT_TOLERANCE),
        max_order=_number(values, "numerics.max_order", MAX_ORDER, int),
        detuning_range=None if detuning is None else _range(detuning, "numerics.detuning_range"),
        output=values.get("output.path"),
        units=values.get("units", "omega_v"),
        raw=tuple(values.items()),
    )


def load_config(path, overrides=(), require_modes=True):
    """Read a configuration file; ``overrides`` are extra ``key=value`` strings."""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    values = parse_key_values(text)
    for item in overrides:
        extra = parse_key_values(item)
        if not extra:
            raise ConfigurationError(f"override {item!r} is not 'key = value'")
        values.update(extra)
    return config_from_values(values, require_modes)


# ---------------------------------------------------------------- output


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, str):
        return value
    return f"{float(value):.16e}"  # 17 significant digits round-trip exactly


def _header(command, config, extra=()):
    lines = [f"# polaritonix {__version__}", f"# command: {command}"]
    lines += [f"# config: {key} = {value}" for key, value in config.raw]
    lines += [f"# {line}" for line in extra]
    return lines


def write_csv(path, header, columns, rows):
    """Write a ``#`` header, the column names and the rows; ``-`` means stdout."""
    body = "\n".join(header + [",".join(columns)] + [",".join(_fmt(v) for v in row) for row in rows]) + "\n"
    if path in (None, "-"):
        sys.stdout.write(body)
        return None
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(body)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None
    return body


def write_manifest(path, command, config, body):
    """Small sidecar file naming the tool version, config and output digest."""
    if path in (None, "-"):
        return
    lines = [f"tool = polaritonix {__version__}", f"command = {command}", f"output = {path}",
             f"sha256 = {hashlib.sha256(body.encode()).hexdigest()}"]
    lines += [f"config.{key} = {value}" for key, value in config.raw]
    with open(path + ".manifest", "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def read_csv(path):
    """Parse a CSV written by this module into ``(columns, rows)`` of strings."""
    with open(path, encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle if not line.startswith("#")]
    columns = lines[0].split(",")
    return columns, [line.split(",") for line in lines[1:] if line]


def read_features(path):
    """Load the single record written by ``features`` back into a dataclass."""
    columns, rows = read_csv(path)
    record = dict(zip(columns, rows[0]))
    kwargs = {name: (float(record[name]) if record[name] else None) for name in FEATURE_FIELDS}
    return PolaritonFeatures(**kwargs)


# ---------------------------------------------------------------- computations


def _grid(config):
    from .response import default_grid

    if config.grid_span is None:
        return default_grid(config.cavity, config.molecule, config.grid_points)
    centre = config.molecule.omega_m
    return np.linspace(centre - config.grid_span, centre + config.grid_span, config.grid_points)


def _absorption(config):
    return absorption_mixture(config.molecule, config.env, config.tolerance, config.max_order)


def run_spectrum(config):
    """Columns ``omega_d, transmission, absorption_re, absorption_im``."""
    absorption = _absorption(config)
    grid = _grid(config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        spectrum = elastic_spectrum(config.cavity, config.molecule, config.env, grid, absorption)
    a = absorption(grid - config.molecule.omega_m + config.molecule.polaron_shift)
    columns = ["omega_d", "transmission", "absorption_re", "absorption_im"]
    return columns, list(zip(grid, spectrum.values, a.real, a.imag)), []


def run_absorption(config):
    """Columns ``omega, absorption, absorption_re, absorption_im``.

    ``absorption`` is ``Re(-A)`` at the same argument used inside the
    cavity response, so its maximum sits near ``omega_m`` for large Q.
    """
    absorption = _absorption(config)
    grid = _grid(config)
    a = absorption(grid - config.molecule.omega_m + config.molecule.polaron_shift)
    columns = ["omega", "absorption", "absorption_re", "absorption_im"]
    return columns, list(zip(grid, -a.real, a.real, a.imag)), [f"kappa_m: {absorption.kappa_m!r}"]


def _features_row(config):
    features = extract_features(config.cavity, config.molecule, config.env, config.detuning_range,
                                model=PolaritonModel(config.cavity, config.molecule, config.env,
                                                     _absorption(config)))
    return [getattr(features, name) for name in FEATURE_FIELDS]


def run_features(config):
    return FEATURE_FIELDS, [_features_row(config)], []


def _sweep_row(task):
    config, parameter, value = task
    try:
        if parameter == "temperature":
            row = _features_row(dataclasses.replace(config, env=dataclasses.replace(config.env, temperature=value)))
        else:
            model = PolaritonModel(config.cavity, config.molecule, config.env, _absorption(config))
            lower, upper = model.polariton_pair(value)
            gm, gp = model.linewidths(value)
            row = [upper.position, lower.position, upper.position - lower.position, None,
                   gp, gm, upper.height / lower.height, None]
        return [value] + row + [""]
    except (PolaritonixError, ValueError) as exc:
        return [value] + [None] * len(FEATURE_FIELDS) + [f"{type(exc).__name__}: {exc}".replace(",", ";")]


def workers():
    """Pool size from ``POLARITONIX_THREADS`` (default: CPU count)."""
    text = os.environ.get("POLARITONIX_THREADS")
    if text is None:
        return os.cpu_count() or 1
    try:
        n = int(text)
    except ValueError:
        raise ConfigurationError("POLARITONIX_THREADS must be an integer") from None
    if n < 1:
        raise ConfigurationError("POLARITONIX_THREADS must be at least 1")
    return n


def sweep_values(text):
    """``start:stop:count`` as an evenly spaced array (count >= 2)."""
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise ConfigurationError(f"--range expects start:stop:count, got {text!r}") from None
    if count < 2:
        raise ConfigurationError("--range count must be at least 2")
    return np.linspace(start, stop, count)


def run_sweep(config, parameter, values):
    """One row per value, in order.

    A temperature sweep re-extracts every feature.  A detuning sweep reports
    the two polariton peaks at each cavity detuning: ``rabi_splitting`` is
    then the local peak spacing and ``delta_R``/``delta_Gamma`` stay empty.
    Failed rows keep empty cells and say why in ``reason``.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigurationError(f"unknown sweep parameter {parameter!r}; use one of {SWEEP_PARAMETERS}")
    tasks = [(config, parameter, float(v)) for v in values]
    n = min(workers(), len(tasks))
    if n == 1:
        rows = [_sweep_row(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    return [parameter] + FEATURE_FIELDS + ["reason"], rows, []


def run_baseline(config):
    """Coupled-oscillator spectrum at the configured detuning."""
    kappa_m = effective_kappa_m(config.molecule)
    detuning = config.cavity.omega_c - config.molecule.omega_m
    ref = coupled_oscillator_reference(config.cavity, kappa_m, detuning, _grid(config))
    extra = [f"omega_plus: {ref.omega_plus!r}", f"omega_minus: {ref.omega_minus!r}"]
    return ["omega_d", "transmission"], list(zip(ref.spectrum.grid, ref.spectrum.values)), extra


def run_validate(config):
    """Each check as ``(name, measured, tolerance, passed)``."""
    checks = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pe = total_pe(list(config.molecule.modes), config.env, config.tolerance, config.max_order)
    checks.append(("normalization", abs(float(pe.total_amplitude().real) - 1.0), NORMALIZATION_TOL))
    cutoff = config.env.cutoff_for(list(config.molecule.modes))
    for i, mode in enumerate(config.molecule.modes, 1):
        if mode.total_huang_rhys == 0:
            continue
        env = dataclasses.replace(config.env, cutoff=cutoff)
        single = total_pe([mode], env, config.tolerance, config.max_order)
        distance, energies, p = closed_form_distance(mode, env, pe=single)
        balance, _ = detailed_balance_error(energies, p, env.beta)
        checks.append((f"series_vs_oracle_mode{i}", distance, ORACLE_TOL))
        checks.append((f"detailed_balance_mode{i}", balance, DETAILED_BALANCE_TOL))
    for name, error in convolution_table_errors():
        checks.append((f"convolution_{name}", error, CONVOLUTION_TOL))
    rows = [(name, err, tol, "pass" if err < tol else "fail") for name, err, tol in checks]
    return ["check", "error", "tolerance", "status"], rows, []


# ---------------------------------------------------------------- entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="polaritonix", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"polaritonix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("spectrum", "elastic transmission |r|^2 and the absorption function"),
        ("absorption", "molecular absorption profile Re(-A)"),
        ("features", "Rabi splitting, linewidths and asymmetries"),
        ("sweep", "features along a detuning or temperature sweep"),
        ("baseline", "coupled-oscillator reference spectrum"),
        ("validate", "series vs oracle cross-checks"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="key = value parameter file")
        p.add_argument("--out", help="output CSV (default: output.path or stdout)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
        p.add_argument("--grid-points", type=int)
        p.add_argument("--grid-span", type=float, help="half-width of the frequency grid around omega_m")
        p.add_argument("--tolerance", type=float, help="series truncation tolerance")
        if name == "sweep":
            p.add_argument("--param", required=True, help="detuning or temperature")
            p.add_argument("--range", required=True, dest="sweep_range", help="start:stop:count")
    return parser


def _apply_flags(args):
    overrides = list(args.set)
    if args.grid_points is not None:
        overrides.append(f"numerics.grid_points = {args.grid_points}")
    if args.grid_span is not None:
        overrides.append(f"numerics.grid_span = {args.grid_span!r}")
    if args.tolerance is not None:
        overrides.append(f"numerics.tolerance = {args.tolerance!r}")
    return overrides


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # a negative start such as "-2:2:5" would otherwise be read as an option
    for i, item in enumerate(argv[:-1]):
        if item == "--range" and argv[i + 1].startswith("-"):
            argv[i:i + 2] = [f"--range={argv[i + 1]}"]
            break
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        config = load_config(args.config, _apply_flags(args), require_modes=args.command != "baseline")
        if args.command == "sweep":
            columns, rows, extra = run_sweep(config, args.param, sweep_values(args.sweep_range))
        else:
            runner = {
                "spectrum": run_spectrum, "absorption": run_absorption, "features": run_features,
                "baseline": run_baseline, "validate": run_validate,
            }[args.command]
            columns, rows, extra = runner(config)
        out = args.out or config.output
        body = write_csv(out, _header(args.command, config, extra), columns, rows)
        if body is not None:
            write_manifest(out, args.command, config, body)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AmbiguousSplittingError as exc:
        print(f"ambiguous splitting ({exc.n_peaks} peaks): {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.command == "validate" and any(row[3] == "fail" for row in rows):
        for row in rows:
            if row[3] == "fail":
                print(f"validation failed: {row[0]} error {row[1]:.3e} >= {row[2]:.1e}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
