"""Command-line front end: `backscatter-sim sweep | analytic | selftest`"""

import os
import math
import sys
import logging
import argparse
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import analysis
from .config import (
    ANALYTIC_FORMULAS,
    DEFAULT_BLOCKS,
    DEFAULT_ETA,
    DEFAULT_GAMMA_DB,
    DEFAULT_K,
    DEFAULT_N,
    DEFAULT_NOISE_POWER,
    DEFAULT_PRIOR_OF_ONE,
    DEFAULT_PSK_ORDER,
    DEFAULT_SEED,
    DEFAULT_T,
    DETECTOR_NAMES,
    SWEEP_PRESETS,
    LOG_LEVEL,
    OUTPUT_PATH,
    SWEEP_AXES,
    default_threads,
)
from .errors import BackscatterSimError, ConfigError, ParameterError
from .montecarlo import MAX_SEED, ChannelSpec, ExperimentConfig, sweep
from .report_writer import RunManifest, write_csv, write_manifest, write_plot
from .selftest import run_selftest

logger = logging.getLogger(__name__)

# Keys a manifest adds on top of the experiment settings
MANIFEST_KEYS = ("version", "timestamp", "axis", "values", "csv_path", "manifest_path", "plot_path")

AXIS_LABELS = {
    "N": "samples per half-symbol N",
    "T": "training symbols T",
    "gamma_db": "SNR (dB)",
    "rcd": "relative channel difference",
    "prior": "P(bit = 1)",
}


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (float(value_db) / 10.0)


def linear_to_db(value: float) -> float:
    if not value > 0:
        raise ParameterError(f"cannot express {value} in dB")
    return 10.0 * math.log10(value)


class ExperimentFile(BaseModel):
    """Validated contents of an experiment configuration or manifest file"""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(DEFAULT_N, ge=1)
    t: int = Field(DEFAULT_T, ge=0)
    k: int = Field(DEFAULT_K, ge=1)
    gamma_db: float = DEFAULT_GAMMA_DB
    noise_power: float = Field(DEFAULT_NOISE_POWER, gt=0)
    prior_of_one: float = Field(DEFAULT_PRIOR_OF_ONE, ge=0, le=1)
    source: Literal["gaussian", "psk"] = "gaussian"
    psk_order: int = Field(DEFAULT_PSK_ORDER, ge=2)
    channel_mode: Literal["rayleigh", "fixed_rcd", "fixed"] = "rayleigh"
    rcd: float = Field(0.5, ge=0, le=1)
    rcd_branch: Literal["h1_stronger", "h0_stronger"] = "h1_stronger"
    h_st: Optional[str] = None
    h_sr: Optional[str] = None
    h_tr: Optional[str] = None
    eta: float = Field(DEFAULT_ETA, gt=0, le=1)
    detectors: Tuple[str, ...] = DETECTOR_NAMES
    blocks: int = Field(DEFAULT_BLOCKS, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0, le=MAX_SEED)
    baseline_threshold: Literal["blind", "pilot"] = "blind"

    version: Optional[str] = None
    timestamp: Optional[str] = None
    axis: Optional[str] = None
    values: Optional[str] = None
    csv_path: Optional[str] = None
    manifest_path: Optional[str] = None
    plot_path: Optional[str] = None

    @field_validator("detectors", mode="before")
    @classmethod
    def split_detectors(cls, value):
        if isinstance(value, str):
            value = [part.strip() for part in value.split(",") if part.strip()]
        unknown = [d for d in value if d not in DETECTOR_NAMES]
        if unknown:
            raise ValueError(f"unknown detector(s) {unknown}; valid: {list(DETECTOR_NAMES)}")
        if not value:
            raise ValueError("at least one detector must be selected")
        return tuple(value)

    @field_validator("h_st", "h_sr", "h_tr")
    @classmethod
    def check_complex(cls, value):
        if value is not None:
            try:
                complex(value.replace(" ", ""))
            except ValueError:
                raise ValueError(f"'{value}' is not a complex literal such as 0.3+1.2j")
        return value

    @classmethod
    def from_settings(cls, settings: Dict[str, str]) -> "ExperimentFile":
        try:
            return cls.model_validate(settings)
        except ValidationError as e:
            first = e.errors()[0]
            key = str(first["loc"][0]) if first["loc"] else None
            raise ConfigError(f"invalid setting '{key}': {first['msg']}", key=key) from e

    def channel_spec(self) -> ChannelSpec:
        if self.channel_mode == "fixed":
            missing = [name for name in ("h_st", "h_sr", "h_tr") if getattr(self, name) is None]
            if missing:
                raise ConfigError(f"channel_mode = fixed needs '{missing[0]}'", key=missing[0])
            gains = tuple(complex(getattr(self, name).replace(" ", "")) for name in ("h_st", "h_sr", "h_tr"))
            return ChannelSpec(mode="fixed", fixed=(*gains, self.eta), eta=self.eta)
        stray = [name for name in ("h_st", "h_sr", "h_tr") if getattr(self, name) is not None]
        if stray:
            raise ConfigError(
                f"'{stray[0]}' only applies with channel_mode = fixed, not {self.channel_mode}", key=stray[0]
            )
        try:
            return ChannelSpec(mode=self.channel_mode, rcd=self.rcd, branch=self.rcd_branch, eta=self.eta)
        except ParameterError as e:
            raise ConfigError(f"invalid setting 'rcd': {e}", key="rcd") from e

    def to_experiment(self) -> ExperimentConfig:
        try:
            return ExperimentConfig.build(
                n=self.n,
                gamma=db_to_linear(self.gamma_db),
                source_kind=self.source,
                nw=self.noise_power,
                psk_order=self.psk_order,
                prior_of_one=self.prior_of_one,
                k=self.k,
                t=self.t,
                channel=self.channel_spec(),
                detectors=self.detectors,
                blocks=self.blocks,
                seed=self.seed,
                baseline_threshold=self.baseline_threshold,
            )
        except ParameterError as e:
            raise ConfigError(f"inconsistent configuration: {e}") from e


def parse_config_text(text: str) -> Dict[str, str]:
    """Flat `key = value` lines; `#` starts a comment, blank lines are skipped"""
    settings: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            key = line.split()[0]
            raise ConfigError(f"line {number}: expected 'key = value' for '{key}'", key=key)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {number}: missing key before '='")
        if not value:
            raise ConfigError(f"line {number}: key '{key}' has no value", key=key)
        if key in settings:
            raise ConfigError(f"line {number}: key '{key}' is set twice", key=key)
        settings[key] = value
    return settings


def read_config_file(path: str) -> Dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file '{path}': {e.strerror or e}", key="config") from e
    logger.info(f"Loaded config file: {path}")
    return parse_config_text(text)


def format_values(values: List[float]) -> str:
    """Comma list that parses back to exactly the same floats"""
    return ",".join(str(int(v)) if float(v).is_integer() else repr(float(v)) for v in values)


def parse_values(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"invalid setting 'values': {e}", key="values") from e
    if not values:
        raise ConfigError("invalid setting 'values': no axis values given", key="values")
    return values


def _output_prefix(args, preset_name: Optional[str]) -> str:
    if args.out:
        return args.out
    if args.config:
        stem = os.path.splitext(os.path.basename(args.config))[0]
    else:
        stem = preset_name
    return os.path.join(OUTPUT_PATH, stem)


def cmd_sweep(args) -> int:
    settings: Dict[str, str] = {}
    preset = None
    if args.preset:
        preset = SWEEP_PRESETS.get(args.preset)
        if preset is None:
            raise ConfigError(
                f"unknown preset '{args.preset}'; valid: {sorted(SWEEP_PRESETS)}", key="preset"
            )
        settings.update(preset.settings)
        settings["axis"] = preset.axis
        settings["values"] = format_values(preset.values)
    if args.config:
        settings.update(read_config_file(args.config))
    if not args.config and preset is None:
        raise ConfigError("sweep needs a config file or --preset", key="config")
    if args.seed is not None:
        settings["seed"] = str(args.seed)

    experiment = ExperimentFile.from_settings(settings)
    base = experiment.to_experiment()

    axis = args.axis or experiment.axis
    if axis is None:
        raise ConfigError("no sweep axis given (--axis or 'axis' key)", key="axis")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"invalid setting 'axis': '{axis}' not in {list(SWEEP_AXES)}", key="axis")
    values_text = args.values or experiment.values
    if values_text is None:
        raise ConfigError("no sweep values given (--values or 'values' key)", key="values")
    values = parse_values(values_text)

    if axis == "gamma_db":
        engine_axis, engine_values = "gamma", [db_to_linear(v) for v in values]
    else:
        engine_axis, engine_values = axis, values

    prefix = _output_prefix(args, preset.name if preset else None)
    csv_path = f"{prefix}.csv"
    manifest_path = f"{prefix}.manifest"
    plot_path = f"{prefix}.svg" if args.plot else None

    snapshot = {key: value for key, value in settings.items() if key not in MANIFEST_KEYS}
    manifest = RunManifest(
        settings=snapshot,
        seed=base.seed,
        axis=axis,
        values=format_values(values),
        csv_path=csv_path,
        manifest_path=manifest_path,
        plot_path=plot_path,
    )

    threads = args.threads if args.threads is not None else default_threads()
    logger.info(f"Sweeping {axis} over {len(values)} values with up to {threads} worker(s)")
    table = sweep(base, engine_axis, engine_values, threads=threads, axis_labels=values)

    directory = os.path.dirname(prefix)
    if directory:
        os.makedirs(directory, exist_ok=True)
    write_manifest(manifest)
    write_csv(table, csv_path)
    if plot_path:
        title = preset.description if preset else f"BER vs {axis}"
        write_plot(table, plot_path, AXIS_LABELS[axis], title)

    print(f"✅ Wrote {csv_path} ({len(table)} rows)")
    return 0


def evaluate_formula(formula: str, params: Dict[str, float]) -> float:
    """Evaluate one entry of ANALYTIC_FORMULAS; gamma is given in dB"""
    if formula not in ANALYTIC_FORMULAS:
        raise ConfigError(
            f"unknown formula '{formula}'; valid: {', '.join(ANALYTIC_FORMULAS)}", key="formula"
        )
    for name in ANALYTIC_FORMULAS[formula]:
        if params.get(name) is None:
            raise ConfigError(f"formula '{formula}' needs --{name.replace('_', '-')}", key=name)

    n = params.get("n")
    if n is not None and n != int(n):
        raise ConfigError(f"invalid setting 'n': N must be an integer, got {n}", key="n")
    n = int(n) if n is not None else None
    gamma = db_to_linear(params["gamma_db"]) if params.get("gamma_db") is not None else None
    h = (params.get("h0sq"), params.get("h1sq"))

    if formula in ("secomc-exact", "nocomc-exact"):
        v = analysis.VarPair(params["sigma0"], params["sigma1"])
        if formula == "secomc-exact":
            return analysis.ber_secomc_gaussian_exact(v, n)
        return analysis.ber_nocomc_gaussian_exact(v, n)
    if formula == "nocomc-compose":
        return analysis.ber_nocomc_from_secomc(params["p"])
    if formula == "rcd":
        return analysis.rcd_from_magnitudes(*h)

    with_gamma = {
        "secomc-approx": analysis.ber_secomc_gaussian_approx,
        "secomc-det-approx": analysis.ber_secomc_deterministic_approx,
        "secomc-det-highsnr": analysis.ber_secomc_deterministic_highsnr,
        "baseline-approx": analysis.ber_baseline_gaussian_approx,
        "nocomc-approx": analysis.ber_nocomc_gaussian_approx,
        "nocomc-det-approx": analysis.ber_nocomc_deterministic_approx,
        "nocomc-det-highsnr": analysis.ber_nocomc_deterministic_highsnr,
    }
    if formula in with_gamma:
        return with_gamma[formula](*h, gamma, n)
    floors = {
        "secomc-floor": analysis.ber_secomc_gaussian_floor,
        "baseline-floor": analysis.ber_baseline_gaussian_floor,
        "nocomc-floor": analysis.ber_nocomc_gaussian_floor,
    }
    return floors[formula](*h, n)


def cmd_analytic(args) -> int:
    formula = args.formula or args.formula_option
    if formula is None:
        raise ConfigError(f"no formula given; valid: {', '.join(ANALYTIC_FORMULAS)}", key="formula")
    params = {
        "sigma0": args.sigma0, "sigma1": args.sigma1, "n": args.n,
        "h0sq": args.h0sq, "h1sq": args.h1sq, "gamma_db": args.gamma_db, "p": args.p,
    }
    try:
        value = evaluate_formula(formula, params)
    except ParameterError as e:
        raise ConfigError(f"invalid parameters for '{formula}': {e}") from e
    print(repr(float(value)))
    return 0


def cmd_selftest(args) -> int:
    results = run_selftest()
    failed = [r for r in results if not r.passed]
    for r in failed:
        logger.error(f"Self-test failed: {r.name}")
    return 3 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="backscatter-sim",
        description="Ambient backscatter link simulator with Manchester energy detectors",
    )
    parser.add_argument("--log-level", default=LOG_LEVEL, help="logging level (default from BACKSCATTER_SIM_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    p_sweep = commands.add_parser("sweep", help="run a Monte Carlo parameter sweep")
    p_sweep.add_argument("config", nargs="?", help="experiment config or manifest file")
    p_sweep.add_argument("--preset", help=f"built-in experiment design: {', '.join(SWEEP_PRESETS)}")
    p_sweep.add_argument("--axis", help=f"sweep axis: {', '.join(SWEEP_AXES)}")
    p_sweep.add_argument("--values", help="comma separated axis values")
    p_sweep.add_argument("--out", help="output prefix for <out>.csv, <out>.manifest and <out>.svg")
    p_sweep.add_argument("--seed", type=int, help="override the config seed")
    p_sweep.add_argument("--plot", action="store_true", help="also write an SVG plot")
    p_sweep.add_argument("--threads", type=int, help="worker cap (default BACKSCATTER_SIM_THREADS or CPU count)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_analytic = commands.add_parser("analytic", help="evaluate a closed-form BER expression")
    p_analytic.add_argument("formula", nargs="?", help=", ".join(ANALYTIC_FORMULAS))
    p_analytic.add_argument("--formula", dest="formula_option", help=argparse.SUPPRESS)
    p_analytic.add_argument("--sigma0", type=float, help="variance under the non-backscatter state")
    p_analytic.add_argument("--sigma1", type=float, help="variance under the backscatter state")
    p_analytic.add_argument("--n", type=float, help="samples per half-symbol")
    p_analytic.add_argument("--h0sq", type=float, help="|h0|^2")
    p_analytic.add_argument("--h1sq", type=float, help="|h1|^2")
    p_analytic.add_argument("--gamma-db", dest="gamma_db", type=float, help="SNR in dB")
    p_analytic.add_argument("--p", type=float, help="SeCoMC BER to compose into NoCoMC")
    p_analytic.set_defaults(func=cmd_analytic)

    p_selftest = commands.add_parser("selftest", help="run the fast acceptance checks")
    p_selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        print(f"❌ {e}", file=sys.stderr)
        return 1
    except OSError as e:
        logger.error(f"I/O error: {str(e)}")
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except BackscatterSimError as e:
        logger.error(f"Error: {str(e)}")
        print(f"❌ {e}", file=sys.stderr)
        return 1
