"""Config-driven runners for training, search, grid and validation campaigns."""
from __future__ import annotations

import logging
from pathlib import Path

from . import seeding
from .baseline import GridAxis, GridSpec, LabelledConfig, run_grid, validate_configs
from .config import Config
from .linksim import SignalConfig
from .pipeline import DualReceiver
from .receivers.io import load_model, save_model
from .receivers.neural import NeuralReceiver, build_model
from .receivers.training import TrainBudget, train
from .records import CampaignWriter, environment, file_sha256, read_campaign
from .search import SearchConfig, SearchSpace, run_campaign

log = logging.getLogger(__name__)

TRAIN_PRESET_FOR = {"PTLC": "PTLC", "FTLC": "FTLC", "FTHC": "FTHC", "FTHC-desk": "FTHC"}


def signal_config(cfg: Config, model: NeuralReceiver) -> SignalConfig:
    s = cfg.signal
    return SignalConfig(s.n_symbols, s.subcarrier_spacing, s.n_prb, tuple(s.pilot_symbols),
                        cfg.modulation_for(model.config.bits_out), s.carrier_frequency)


def make_objective(cfg: Config, model: NeuralReceiver) -> DualReceiver:
    return DualReceiver(model, signal_config(cfg, model), cfg.channel.profile, cfg.channel.n_sinusoids)


def search_space(cfg: Config) -> SearchSpace:
    s = cfg.search
    return SearchSpace.from_bounds((s.speed.min, s.speed.max), (s.delay_spread.min, s.delay_spread.max),
                                   (s.snr.min, s.snr.max))


def search_config(cfg: Config) -> SearchConfig:
    s = cfg.search
    return SearchConfig(s.episodes, s.max_iters, s.batch, s.lr, s.patience, s.max_halvings,
                        s.min_delta, s.threshold, s.resample, cfg.seed)


def grid_spec(cfg: Config) -> GridSpec:
    g = cfg.grid
    return GridSpec(*(GridAxis(a.min, a.max, a.count) for a in (g.speed, g.delay_spread, g.snr)))


def model_path(cfg: Config, override: str | None = None) -> Path:
    path = override or cfg.model.path
    if path is None:
        raise FileNotFoundError("no model file given (use --model or model.path)")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    return path


def _snapshot(cfg: Config, model_file: Path | None) -> dict:
    snap = cfg.model_dump(mode="json")
    if model_file is not None:
        snap["model"]["path"] = str(model_file)
    return snap


def train_model(cfg: Config, out: str | Path) -> Path:
    preset = cfg.model.preset or cfg.preset
    model = build_model(preset)
    t = cfg.train
    budget = TrainBudget(t.steps, t.batch, t.lr, t.lr_final, seed=cfg.seed, precision=t.precision)
    s = cfg.signal
    base = SignalConfig(s.n_symbols, s.subcarrier_spacing, s.n_prb, tuple(s.pilot_symbols),
                        carrier_frequency=s.carrier_frequency)
    result = train(model, TRAIN_PRESET_FOR[preset], budget, base)
    return save_model(out, model, {**result.manifest(), "model_preset": preset,
                                   "config": cfg.model_dump(mode="json")})


def run_search(cfg: Config, model_file: Path, out: str | Path):
    model, _ = load_model(model_file)
    objective = make_objective(cfg, model)
    env = environment(cfg.seed, "float64", file_sha256(model_file))
    with CampaignWriter(out, "search", _snapshot(cfg, model_file), env) as w:
        result = run_campaign(objective, search_space(cfg), search_config(cfg),
                              on_record=lambda r: w.append(r.to_dict()))
        w.summary = result.summary
    return result


def run_grid_campaign(cfg: Config, model_file: Path, out: str | Path):
    model, _ = load_model(model_file)
    objective = make_objective(cfg, model)
    env = environment(cfg.seed, "float64", file_sha256(model_file))
    spec = grid_spec(cfg)
    with CampaignWriter(out, "grid", _snapshot(cfg, model_file), env) as w:
        records = run_grid(objective, spec, cfg.grid.batch, cfg.grid.threshold, cfg.seed,
                           on_record=lambda r: w.append(r.to_dict()))
        w.summary = {"total_tests": len(records), "flagged": sum(r.failed for r in records)}
    return records


def labelled_configs(campaign_file: str | Path) -> tuple[str, list[LabelledConfig]]:
    """Configurations to validate: every search episode's final point, or
    every flagged grid point (labelled as a found failure)."""
    camp = read_campaign(campaign_file)
    if camp.kind == "search":
        out = []
        for r in camp.records:
            sc = r["trace"][-1]["scenario"]
            out.append(LabelledConfig(r["episode"], r["outcome"], sc["speed"], sc["delay_spread"], sc["snr"]))
        return "search", out
    if camp.kind == "grid":
        return "grid", [LabelledConfig(r["id"], "FailSearch", r["speed"], r["delay_spread"], r["snr"])
                        for r in camp.records if r["failed"]]
    raise ValueError(f"cannot validate a {camp.kind!r} campaign")


def run_validation(cfg: Config, model_file: Path, source: str | Path, out: str | Path):
    model, _ = load_model(model_file)
    objective = make_objective(cfg, model)
    source_kind, configs = labelled_configs(source)
    v = cfg.validation
    env = environment(cfg.seed, "float64", file_sha256(model_file))
    snap = _snapshot(cfg, model_file)
    snap.update(source_kind=source_kind, source=str(source), source_sha256=file_sha256(source))

    def evaluate(params, seed, n):
        return objective.large_sample(params, seed, n, chunk=v.chunk)

    with CampaignWriter(out, "validate", snap, env) as w:
        result = validate_configs(evaluate, configs, v.n_realizations, tuple(v.thresholds),
                                  seeding.derive(cfg.seed, seeding.STREAM_VALIDATION))
        for row in result.rows:
            w.append(row.to_dict())
        w.summary = {str(t): result.counts(t).to_dict() for t in result.thresholds}
    return result
