"""Monte Carlo link simulation for the Manchester energy detectors"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import analysis
from .coding import diff_manchester_encode, manchester_encode
from .config import (
    BASELINE_THRESHOLD_MODES,
    CSV_COLUMNS,
    DEFAULT_ETA,
    DETECTOR_NAMES,
    Z_95,
)
from .detectors import (
    SeCoMCState,
    baseline_detect_many,
    baseline_train,
    chip_energies,
    nocomc_detect_frame,
    secomc_detect_many,
    secomc_train_arrays,
    symbol_energies,
)
from .errors import ConfigError, ParameterError
from .signal_model import (
    AmbientSource,
    ChannelState,
    LinkParams,
    NoiseModel,
    RcdBranch,
    draw_channel,
    receive_chips,
    sigma_sq,
    synthesize_channel_with_rcd,
)

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1
SWEEPABLE = ("N", "T", "gamma", "rcd", "prior")


class ChannelMode(str, Enum):
    RAYLEIGH = "rayleigh"
    FIXED_RCD = "fixed_rcd"
    FIXED = "fixed"


@dataclass(frozen=True)
class ChannelSpec:
    mode: ChannelMode = ChannelMode.RAYLEIGH
    rcd: float = 0.5
    branch: RcdBranch = RcdBranch.H1_STRONGER
    fixed: Optional[Tuple[complex, complex, complex, float]] = None
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        mode = ChannelMode(self.mode)
        if not (0.0 < self.eta <= 1.0):
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "branch", RcdBranch(self.branch))
        if mode == ChannelMode.FIXED_RCD:
            # validates range and branch
            synthesize_channel_with_rcd(self.rcd, self.branch)
        if mode == ChannelMode.FIXED:
            if self.fixed is None:
                raise ParameterError("fixed channel mode needs (h_st, h_sr, h_tr, eta)")
            draw_channel(None, fixed=self.fixed)


@dataclass(frozen=True)
class ExperimentConfig:
    link: LinkParams
    source: AmbientSource
    noise: NoiseModel
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    detectors: Tuple[str, ...] = DETECTOR_NAMES
    blocks: int = 1000
    seed: int = 0
    baseline_threshold: str = "blind"

    def __post_init__(self):
        detectors = tuple(self.detectors)
        object.__setattr__(self, "detectors", detectors)
        if not detectors:
            raise ConfigError("at least one detector must be selected", key="detectors")
        unknown = [d for d in detectors if d not in DETECTOR_NAMES]
        if unknown:
            raise ConfigError(f"unknown detector(s) {unknown}; valid: {list(DETECTOR_NAMES)}", key="detectors")
        if self.blocks < 1:
            raise ConfigError(f"blocks must be at least 1, got {self.blocks}", key="blocks")
        if not (0 <= self.seed <= MAX_SEED):
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}", key="seed")
        if self.baseline_threshold not in BASELINE_THRESHOLD_MODES:
            raise ConfigError(
                f"baseline_threshold must be one of {list(BASELINE_THRESHOLD_MODES)}", key="baseline_threshold"
            )
        needs_training = [d for d in detectors if d in ("secomc", "baseline")]
        if needs_training and self.link.t < 1:
            raise ConfigError(f"{needs_training} need T >= 1 training symbols", key="t")
        if not math.isclose(self.source.ps / self.noise.nw, self.link.gamma, rel_tol=1e-9):
            raise ConfigError(
                f"gamma {self.link.gamma} disagrees with ps/nw = {self.source.ps / self.noise.nw}", key="gamma_db"
            )

    @classmethod
    def build(
        cls,
        n: int,
        gamma: float,
        source_kind="gaussian",
        nw: float = 1.0,
        psk_order: int = 8,
        prior_of_one: float = 0.5,
        k: int = 30,
        t: int = 2,
        channel: Optional[ChannelSpec] = None,
        detectors: Sequence[str] = DETECTOR_NAMES,
        blocks: int = 1000,
        seed: int = 0,
        baseline_threshold: str = "blind",
    ) -> "ExperimentConfig":
        """Assemble a config with ps derived from gamma and nw"""
        return cls(
            link=LinkParams(n=n, gamma=gamma, prior_of_one=prior_of_one, k=k, t=t),
            source=AmbientSource(kind=source_kind, ps=gamma * nw, modulation_order=psk_order),
            noise=NoiseModel(nw=nw),
            channel=channel if channel is not None else ChannelSpec(),
            detectors=tuple(detectors),
            blocks=blocks,
            seed=seed,
            baseline_threshold=baseline_threshold,
        )

    def with_value(self, axis: str, value: float) -> "ExperimentConfig":
        """Copy of this config with one sweep parameter changed"""
        if not math.isfinite(float(value)):
            raise ConfigError(f"{axis} values must be finite, got {value}", key=axis)
        try:
            if axis == "N":
                return replace(self, link=replace(self.link, n=_as_count(value, axis)))
            if axis == "T":
                return replace(self, link=replace(self.link, t=_as_count(value, axis)))
            if axis == "gamma":
                return replace(
                    self,
                    link=replace(self.link, gamma=float(value)),
                    source=replace(self.source, ps=float(value) * self.noise.nw),
                )
            if axis == "prior":
                return replace(self, link=replace(self.link, prior_of_one=float(value)))
            if axis == "rcd":
                if ChannelMode(self.channel.mode) != ChannelMode.FIXED_RCD:
                    raise ConfigError("an rcd sweep needs channel_mode = fixed_rcd", key="channel_mode")
                return replace(self, channel=replace(self.channel, rcd=float(value)))
        except ParameterError as e:
            raise ConfigError(f"invalid {axis} value {value}: {e}", key=axis) from e
        raise ConfigError(f"unknown sweep axis '{axis}'; valid: {list(SWEEPABLE)}", key="axis")


def _as_count(value: float, axis: str) -> int:
    if not math.isfinite(float(value)) or float(value) != int(value):
        raise ConfigError(f"{axis} must be an integer, got {value}", key=axis)
    return int(value)


@dataclass(frozen=True)
class BerEstimate:
    errors: int
    trials: int
    ber: float
    half_width_95: float

    @classmethod
    def from_counts(cls, errors: int, trials: int) -> "BerEstimate":
        if trials <= 0:
            raise ConfigError("a BER estimate needs at least one trial")
        ber = errors / trials
        return cls(
            errors=int(errors),
            trials=int(trials),
            ber=ber,
            half_width_95=Z_95 * math.sqrt(ber * (1.0 - ber) / trials),
        )


@dataclass
class BlockOutcome:
    errors: Dict[str, int]
    trials: Dict[str, int]
    h0_sq: float
    h1_sq: float
    relation_correct: Optional[bool] = None
    degenerate: bool = False


@dataclass(frozen=True)
class BlockStreams:
    """Independent random streams for one coherence block"""

    channel: np.random.Generator
    signal: np.random.Generator
    noise: np.random.Generator
    bits: np.random.Generator

    @classmethod
    def for_block(cls, seed: int, block_index: int) -> "BlockStreams":
        sequence = np.random.SeedSequence(entropy=seed, spawn_key=(block_index,))
        return cls(*(np.random.default_rng(child) for child in sequence.spawn(4)))

    @classmethod
    def from_generator(cls, rng: np.random.Generator) -> "BlockStreams":
        return cls(*rng.spawn(4))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    estimates: Dict[str, BerEstimate]
    analytic: Dict[str, Tuple[float, float, float]]
    relation_error_rate: Optional[float] = None
    degenerate_blocks: int = 0


def _block_channel(cfg: ExperimentConfig, rng: np.random.Generator) -> ChannelState:
    mode = ChannelMode(cfg.channel.mode)
    if mode == ChannelMode.FIXED_RCD:
        return synthesize_channel_with_rcd(cfg.channel.rcd, cfg.channel.branch, eta=cfg.channel.eta)
    if mode == ChannelMode.FIXED:
        return draw_channel(rng, fixed=cfg.channel.fixed)
    return draw_channel(rng, eta=cfg.channel.eta)


def run_block(cfg: ExperimentConfig, rng) -> BlockOutcome:
    """Simulate one coherence block for every configured detector.

    All detectors see the same channel and the same K information bits; each
    gets its own transmission in its own line code. Training and preamble
    symbols are not counted as trials.
    """
    streams = rng if isinstance(rng, BlockStreams) else BlockStreams.from_generator(rng)
    link, src, noise = cfg.link, cfg.source, cfg.noise
    ch = _block_channel(cfg, streams.channel)
    bits = (streams.bits.random(link.k) < link.prior_of_one).astype(np.int8)

    s0 = sigma_sq(ch.h0, src.ps, noise.nw)
    s1 = sigma_sq(ch.h1, src.ps, noise.nw)
    outcome = BlockOutcome(errors={}, trials={}, h0_sq=ch.h0_sq, h1_sq=ch.h1_sq, degenerate=s0 == s1)

    def record(name: str, decided: np.ndarray):
        outcome.errors[name] = int(np.count_nonzero(decided != bits))
        outcome.trials[name] = int(bits.size)

    if "secomc" in cfg.detectors or "secomc_genie" in cfg.detectors:
        t = link.t if "secomc" in cfg.detectors else 0
        frame = manchester_encode(np.concatenate((np.ones(t, dtype=np.int8), bits)))
        received = receive_chips(frame.chips, ch, src, noise, link.n, streams.signal, streams.noise)
        za, zb = chip_energies(received)
        if "secomc" in cfg.detectors:
            trained = secomc_train_arrays(za[:t], zb[:t], link.n)
            outcome.relation_correct = trained.relation == SeCoMCState.genie(s0, s1).relation
            record("secomc", secomc_detect_many(trained, za[t:], zb[t:]))
        if "secomc_genie" in cfg.detectors:
            record("secomc_genie", secomc_detect_many(SeCoMCState.genie(s0, s1), za[t:], zb[t:]))

    if "nocomc" in cfg.detectors:
        frame = diff_manchester_encode(bits)
        received = receive_chips(frame.chips, ch, src, noise, link.n, streams.signal, streams.noise)
        za, zb = chip_energies(received)
        record("nocomc", nocomc_detect_frame(za, zb))

    if "baseline" in cfg.detectors:
        # uncoded on-off keying, 2N samples per information bit
        t = link.t
        states = np.concatenate((np.zeros(t, dtype=np.int8), np.ones(t, dtype=np.int8), bits))
        received = receive_chips(states, ch, src, noise, 2 * link.n, streams.signal, streams.noise)
        energy = symbol_energies(received)
        unlabeled = energy[2 * t:] if cfg.baseline_threshold == "blind" else None
        state = baseline_train(energy[:t], energy[t:2 * t], unlabeled)
        record("baseline", baseline_detect_many(state, energy[2 * t:]))

    return outcome


@dataclass
class _Tally:
    errors: Dict[str, int]
    trials: Dict[str, int]
    h0_sq: List[float]
    h1_sq: List[float]
    relation_wrong: int = 0
    relation_blocks: int = 0
    degenerate: int = 0


def _run_block_range(cfg: ExperimentConfig, start: int, stop: int) -> _Tally:
    tally = _Tally(
        errors={d: 0 for d in cfg.detectors},
        trials={d: 0 for d in cfg.detectors},
        h0_sq=[],
        h1_sq=[],
    )
    for index in range(start, stop):
        outcome = run_block(cfg, BlockStreams.for_block(cfg.seed, index))
        for name in cfg.detectors:
            tally.errors[name] += outcome.errors[name]
            tally.trials[name] += outcome.trials[name]
        tally.h0_sq.append(outcome.h0_sq)
        tally.h1_sq.append(outcome.h1_sq)
        if outcome.relation_correct is not None:
            tally.relation_blocks += 1
            tally.relation_wrong += 0 if outcome.relation_correct else 1
        tally.degenerate += int(outcome.degenerate)
    return tally


def _block_ranges(blocks: int, workers: int) -> List[Tuple[int, int]]:
    chunks = min(blocks, workers * 4)
    edges = np.linspace(0, blocks, chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def estimate_ber(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Aggregate `blocks` independent blocks.

    Block i always uses the stream derived from (seed, i), so the result does
    not depend on the number of workers or on scheduling.
    """
    ranges = _block_ranges(cfg.blocks, max(1, threads))
    if threads > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            tallies = list(pool.map(_run_block_range, [cfg] * len(ranges), *zip(*ranges)))
    else:
        tallies = [_run_block_range(cfg, a, b) for a, b in ranges]

    estimates = {}
    for name in cfg.detectors:
        errors = sum(t.errors[name] for t in tallies)
        trials = sum(t.trials[name] for t in tallies)
        estimates[name] = BerEstimate.from_counts(errors, trials)

    h0_sq = np.concatenate([t.h0_sq for t in tallies])
    h1_sq = np.concatenate([t.h1_sq for t in tallies])
    analytic = {}
    for name in cfg.detectors:
        values = analysis.analytic_for_channel(
            name, cfg.source.kind, h0_sq, h1_sq, cfg.link.gamma, cfg.link.n
        )
        analytic[name] = tuple(float(np.mean(v)) for v in values)

    relation_blocks = sum(t.relation_blocks for t in tallies)
    relation_error_rate = (
        sum(t.relation_wrong for t in tallies) / relation_blocks if relation_blocks else None
    )
    degenerate = sum(t.degenerate for t in tallies)
    if degenerate:
        logger.warning(f"{degenerate} of {cfg.blocks} blocks have equal hypothesis variances; detection cannot succeed there")

    return ExperimentResult(
        config=cfg,
        estimates=estimates,
        analytic=analytic,
        relation_error_rate=relation_error_rate,
        degenerate_blocks=degenerate,
    )


def sweep(
    base: ExperimentConfig,
    axis: str,
    values: Sequence[float],
    threads: int = 1,
    axis_labels: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """One row per value per detector with simulated and analytic BER.

    axis_labels replaces the values in the `axis` column, e.g. to report SNR
    in dB while sweeping the linear gamma.
    """
    values = list(values)
    if not values:
        raise ConfigError("a sweep needs at least one axis value", key="values")
    if axis not in SWEEPABLE:
        raise ConfigError(f"unknown sweep axis '{axis}'; valid: {list(SWEEPABLE)}", key="axis")
    labels = list(axis_labels) if axis_labels is not None else values

    rows = []
    for value, label in zip(values, labels):
        cfg = base.with_value(axis, value)
        logger.info(f"Sweep point {axis}={label}: {cfg.blocks} blocks x {cfg.link.k} bits")
        result = estimate_ber(cfg, threads=threads)
        if result.relation_error_rate is not None:
            logger.info(f"Training picked the wrong variance relation in {result.relation_error_rate:.2%} of blocks")
        for name in cfg.detectors:
            est = result.estimates[name]
            exact, approx, floor = result.analytic[name]
            rows.append({
                "axis": label,
                "detector": name,
                "ber_sim": est.ber,
                "ci95": est.half_width_95,
                "ber_exact": exact,
                "ber_approx": approx,
                "ber_floor": floor,
                "errors": est.errors,
                "trials": est.trials,
            })
    return pd.DataFrame(rows, columns=CSV_COLUMNS)
