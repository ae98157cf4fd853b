"""Shared fixtures: trained receivers cached on disk and the acceptance summary."""
from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict
from pathlib import Path

import pytest

from rxprobe.receivers.io import load_model, save_model
from rxprobe.receivers.neural import build_model
from rxprobe.receivers.training import TrainBudget, train

CACHE = Path(os.environ.get("RXPROBE_CACHE", Path(__file__).resolve().parents[1] / ".cache"))
DESK_BUDGET = TrainBudget(n_steps=3000, batch=16, lr=2e-3, lr_final=1e-5, seed=0)
TRAIN_PRESET = {"PTLC": "PTLC", "FTLC": "FTLC", "FTHC-desk": "FTHC"}

ACCEPTANCE: list[tuple[str, bool, str]] = []


def cache_path(preset: str, budget: TrainBudget) -> Path:
    key = json.dumps({"preset": preset, **asdict(budget), "log_every": None}, sort_keys=True)
    digest = hashlib.sha256(key.encode()).hexdigest()[:12]
    return CACHE / f"{preset}-{digest}.npz"


def trained(preset: str, budget: TrainBudget = DESK_BUDGET):
    """Train ``preset`` once per budget; later sessions load the cached file."""
    path = cache_path(preset, budget)
    if not path.exists():
        logging.getLogger(__name__).info("training %s (%d steps)", preset, budget.n_steps)
        model = build_model(preset)
        result = train(model, TRAIN_PRESET[preset], budget)
        CACHE.mkdir(parents=True, exist_ok=True)
        save_model(path, model, {**result.manifest(), "model_preset": preset})
    model, header = load_model(path)
    return model, path, header


@pytest.fixture(scope="session")
def ptlc():
    return trained("PTLC")


@pytest.fixture(scope="session")
def ftlc():
    return trained("FTLC")


@pytest.fixture(scope="session")
def fthc_desk():
    return trained("FTHC-desk")


@pytest.fixture(scope="session")
def acceptance():
    """Collects ``(criterion, passed, detail)`` lines printed at the end of the run."""
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
