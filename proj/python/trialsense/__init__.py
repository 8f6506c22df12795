# SPDX-License-Identifier: Apache-2.0
"""Multimodal deception detection: feature extraction, fusion and recurrent classifiers."""

from __future__ import annotations

import json
import os
from typing import Any, Iterable, Mapping, Optional

from ._core import (
    TrialsenseError,
    __version__,
    gradcheck,
    hz_to_mel,
    landmark_features,
    mel_to_hz,
    mfcc,
    read_wav,
    split,
    synthesize,
)
from . import _core

__all__ = [
    "TrialsenseError",
    "__version__",
    "evaluate",
    "gradcheck",
    "grid",
    "hz_to_mel",
    "landmark_features",
    "mel_to_hz",
    "mfcc",
    "read_wav",
    "split",
    "synthesize",
    "train",
]


def _config_json(config: Optional[Mapping[str, Any]]) -> str:
    return json.dumps(config) if config else ""


def train(manifest: os.PathLike | str, model: str, combo: str, output: os.PathLike | str,
          config: Optional[Mapping[str, Any]] = None) -> list[dict]:
    """Train on the manifest's training split and write a checkpoint. Returns the epoch history."""
    return json.loads(_core._train(os.fspath(manifest), model, combo, os.fspath(output), _config_json(config)))


def evaluate(checkpoint: os.PathLike | str, manifest: os.PathLike | str, all_samples: bool = False) -> dict:
    """Accuracy, confusion counts and per-sample predictions."""
    return json.loads(_core._evaluate(os.fspath(checkpoint), os.fspath(manifest), all_samples))


def grid(manifest: os.PathLike | str, models: Iterable[str] = ("lstm", "bilstm", "miniconv"),
         combos: Iterable[str] = (), config: Optional[Mapping[str, Any]] = None, jobs: int = 1) -> dict:
    """Model x modality grid on one shared split. An empty `combos` means all seven."""
    return json.loads(_core._grid(os.fspath(manifest), list(models), list(combos), _config_json(config), jobs))
