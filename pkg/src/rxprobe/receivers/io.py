"""Model files: ``.npz`` archives with a JSON header, no pickling."""
from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from ..fsutil import atomic_write_bytes
from .neural import ModelConfig, NeuralReceiver

FORMAT = "rxprobe-model"
FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


def save_model(path: str | Path, model: NeuralReceiver, manifest: dict | None = None) -> Path:
    path = Path(path)
    header = {"format": FORMAT, "version": FORMAT_VERSION, "config": model.config.to_dict(),
              "n_params": model.n_params, "manifest": manifest or {}}
    arrays = {f"p{i:03d}": p.data for i, p in enumerate(model.params)}
    arrays["header"] = np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    atomic_write_bytes(path, buf.getvalue())
    return path


def read_header(path: str | Path) -> dict:
    with np.load(path, allow_pickle=False) as z:
        return _header(z, path)


def _header(z, path) -> dict:
    if "header" not in z.files:
        raise ModelFileError(f"{path}: not a model file (no header)")
    header = json.loads(z["header"].tobytes().decode())
    if header.get("format") != FORMAT:
        raise ModelFileError(f"{path}: unexpected format {header.get('format')!r}")
    if header.get("version") != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported model file version {header.get('version')}")
    return header


def load_model(path: str | Path) -> tuple[NeuralReceiver, dict]:
    """Return the model and its header (config + training manifest)."""
    with np.load(path, allow_pickle=False) as z:
        header = _header(z, path)
        model = NeuralReceiver(ModelConfig(**header["config"]))
        params = model.params
        if len([k for k in z.files if k.startswith("p")]) != len(params):
            raise ModelFileError(f"{path}: parameter count does not match config")
        for i, p in enumerate(params):
            data = z[f"p{i:03d}"]
            if data.shape != p.shape:
                raise ModelFileError(f"{path}: parameter {i} has shape {data.shape}, expected {p.shape}")
            p.data = data.astype(np.float64)
    model.set_trainable(False)
    return model, header

