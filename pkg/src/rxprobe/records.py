"""Line-delimited JSON campaign files.

Layout: a header line, one line per record, a closing summary line::

    {"type": "header", "schema": 1, "kind": "search", "config": {...}, "env": {...}}
    {"type": "record", ...}
    {"type": "summary", ...}

Files are written to a temporary sibling and renamed into place when the
campaign completes; a failed run leaves nothing behind.
"""
from __future__ import annotations

import hashlib
import json
import os
import platform
import tempfile
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
KINDS = ("search", "grid", "validate", "train")


class CampaignFileError(ValueError):
    pass


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def environment(seed: int, precision: str = "float64", model_sha256: str | None = None) -> dict:
    return {"seed": seed, "precision": precision, "code_version": code_version(),
            "numpy": np.__version__, "python": platform.python_version(),
            "model_sha256": model_sha256}


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


class CampaignWriter:
    """Stream records to ``path`` atomically.

    ::

        with CampaignWriter(path, "search", config, env) as w:
            w.append(rec.to_dict())
            w.summary = {...}
    """

    def __init__(self, path: str | Path, kind: str, config: dict, env: dict):
        if kind not in KINDS:
            raise ValueError(f"unknown campaign kind {kind!r}")
        self.path = Path(path)
        self.header = {"type": "header", "schema": SCHEMA_VERSION, "kind": kind,
                       "config": config, "env": env}
        self.summary: dict | None = None
        self.n_records = 0
        self._fh = None
        self._tmp = None

    def __enter__(self) -> "CampaignWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, self._tmp = tempfile.mkstemp(dir=self.path.parent, prefix=f".{self.path.name}.", suffix=".tmp")
        self._fh = os.fdopen(fd, "w", encoding="utf-8")
        self._fh.write(dumps(self.header) + "\n")
        return self

    def append(self, record: dict) -> None:
        self._fh.write(dumps({"type": "record", **record}) + "\n")
        self._fh.flush()
        self.n_records += 1

    def __exit__(self, exc_type, exc, tb) -> None:
        try:
            if exc_type is None:
                self._fh.write(dumps({"type": "summary", **(self.summary or {})}) + "\n")
            self._fh.close()
            if exc_type is None:
                os.replace(self._tmp, self.path)
        finally:
            if os.path.exists(self._tmp):
                os.unlink(self._tmp)


@dataclass
class Campaign:
    header: dict
    records: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.header["kind"]

    @property
    def config(self) -> dict:
        return self.header["config"]

    def records_checksum(self) -> str:
        return hashlib.sha256("\n".join(dumps(r) for r in self.records).encode()).hexdigest()


def write_campaign(path: str | Path, kind: str, config: dict, env: dict, records: list[dict],
                   summary: dict) -> Path:
    with CampaignWriter(path, kind, config, env) as w:
        for r in records:
            w.append(r)
        w.summary = summary
    return Path(path)


def read_campaign(path: str | Path) -> Campaign:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise CampaignFileError(f"cannot read {path}: {err.strerror}") from None
    if not lines:
        raise CampaignFileError(f"{path}: empty campaign file")
    try:
        items = [json.loads(line) for line in lines if line.strip()]
    except json.JSONDecodeError as err:
        raise CampaignFileError(f"{path}: malformed line {err.lineno}: {err.msg}") from None
    header = items[0]
    if header.get("type") != "header":
        raise CampaignFileError(f"{path}: first line is not a header")
    if header.get("schema") != SCHEMA_VERSION:
        raise CampaignFileError(f"{path}: unsupported schema version {header.get('schema')}")
    if header.get("kind") not in KINDS:
        raise CampaignFileError(f"{path}: unknown campaign kind {header.get('kind')!r}")
    camp = Campaign(header)
    for item in items[1:]:
        kind = item.pop("type", None)
        if kind == "record":
            camp.records.append(item)
        elif kind == "summary":
            camp.summary = item
        else:
            raise CampaignFileError(f"{path}: unexpected line type {kind!r}")
    return camp
