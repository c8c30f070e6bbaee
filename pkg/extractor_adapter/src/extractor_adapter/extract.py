"""End-to-end extraction: directory of images -> FSET file + JSON manifest."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .errors import AdapterError, ConfigError, EmptyInputError
from .fset import write_fset
from .images import DecodeError, list_candidates, load_rgb
from .model import MODE_NAMES, MODEL_NAMES, WEIGHTS_POLICIES, build_extractor, preprocessing

log = logging.getLogger("extractor_adapter")


@dataclass(frozen=True)
class ExtractorConfig:
    """Validated settings for one extraction run."""

    images_dir: str
    out_path: str
    model: str = "resnet34"
    mode: str = "conv"
    batch: int = 64
    device: str = "cpu"
    weights: str = "auto"

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODEL_NAMES}")
        if self.mode not in MODE_NAMES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODE_NAMES}")
        if self.weights not in WEIGHTS_POLICIES:
            raise ConfigError(
                f"unknown weights policy {self.weights!r}; expected one of {WEIGHTS_POLICIES}"
            )
        if not isinstance(self.batch, int) or isinstance(self.batch, bool) or self.batch < 1:
            raise ConfigError(f"batch size must be an integer >= 1, got {self.batch!r}")
        if not self.images_dir:
            raise ConfigError("images_dir must be a non-empty path")
        if not self.out_path:
            raise ConfigError("out_path must be a non-empty path")
        if not self.device:
            raise ConfigError("device must be a non-empty selector such as 'cpu'")


@dataclass(frozen=True)
class ExtractionResult:
    n: int
    d: int
    space_tag: str
    files: tuple[str, ...]
    skipped: tuple[tuple[str, str], ...]
    out_path: str
    manifest_path: str
    weights: dict


def manifest_path_for(out_path) -> Path:
    return Path(out_path).with_suffix(".manifest.json")


def run_extraction(config: ExtractorConfig) -> ExtractionResult:
    """Extract one row per decodable image, in filename order.

    Writes the FSET file and a JSON manifest describing the model, mode,
    weights source, preprocessing, row order, and any skipped files.
    """
    candidates = list_candidates(config.images_dir)
    if not candidates:
        raise EmptyInputError(f"image directory {config.images_dir} contains no files")

    device = torch.device(config.device)
    head, dim, space_tag, weights_info = build_extractor(config.model, config.mode, config.weights)
    transform, preprocess_info = preprocessing(config.model)
    head.to(device)

    row_files: list[str] = []
    skipped: list[tuple[str, str]] = []
    chunks: list[np.ndarray] = []
    pending: list[torch.Tensor] = []

    def flush():
        if not pending:
            return
        batch = torch.stack(pending).to(device)
        with torch.inference_mode():
            out = head(batch)
        chunks.append(out.cpu().numpy().astype(np.float32, copy=False))
        pending.clear()

    for path in candidates:
        try:
            image = load_rgb(path)
        except DecodeError as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped.append((path.name, str(exc)))
            continue
        pending.append(transform(image))
        row_files.append(path.name)
        if len(pending) == config.batch:
            flush()
    flush()

    if not row_files:
        raise EmptyInputError(
            f"no decodable image in {config.images_dir} ({len(skipped)} file(s) skipped)"
        )

    rows = np.concatenate(chunks, axis=0)
    if rows.shape != (len(row_files), dim):
        raise AdapterError(f"extractor produced shape {rows.shape}, expected ({len(row_files)}, {dim})")

    write_fset(config.out_path, rows, space_tag)
    manifest = {
        "model": config.model,
        "mode": config.mode,
        "space": space_tag,
        "n": len(row_files),
        "d": dim,
        "batch": config.batch,
        "device": config.device,
        "weights": weights_info,
        "preprocessing": preprocess_info,
        "images_dir": str(config.images_dir),
        "images": row_files,
        "skipped": [{"file": name, "error": reason} for name, reason in skipped],
        "output": Path(config.out_path).name,
    }
    manifest_path = manifest_path_for(config.out_path)
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    return ExtractionResult(
        n=len(row_files),
        d=dim,
        space_tag=space_tag,
        files=tuple(row_files),
        skipped=tuple(skipped),
        out_path=str(config.out_path),
        manifest_path=str(manifest_path),
        weights=weights_info,
    )
