"""Reading kernel-matrix artifacts and class labels.

Artifacts are the plain-text matrix format with a <path>.meta.json sidecar
produced by the kernel toolkit; the harness only depends on that file
contract, not on the toolkit itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ArtifactError(ValueError):
    pass


@dataclass(frozen=True)
class KernelArtifact:
    path: str
    values: np.ndarray
    meta: dict

    @property
    def label(self) -> str:
        """Stable hyperparameter tag used in reports and selection counts."""
        parts = []
        for key in ("h", "lambda", "gamma", "solver"):
            if self.meta.get(key) is not None:
                parts.append(f"{key}={self.meta[key]:g}" if isinstance(self.meta[key], float)
                             else f"{key}={self.meta[key]}")
        return ",".join(parts) if parts else Path(self.path).stem

    def sort_key(self):
        def num(key):
            v = self.meta.get(key)
            return (0, float(v)) if isinstance(v, (int, float)) else (1, 0.0)
        return (*num("h"), *num("lambda"), *num("gamma"), self.path)


def read_kernel_artifact(path) -> KernelArtifact:
    path = Path(path)
    meta_path = Path(str(path) + ".meta.json")
    if not path.exists():
        raise ArtifactError(f"missing matrix file: {path}")
    if not meta_path.exists():
        raise ArtifactError(f"missing metadata sidecar: {meta_path}")
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split()])
    widths = {len(r) for r in rows}
    if not rows or len(widths) != 1:
        raise ArtifactError(f"{path}: not a rectangular matrix")
    values = np.asarray(rows, dtype=np.float64)
    if values.shape[0] != values.shape[1]:
        raise ArtifactError(f"{path}: matrix is {values.shape}, expected square")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{meta_path}: unparseable metadata ({exc})") from exc
    if meta.get("kind") != "kernel":
        raise ArtifactError(f"{path}: expected a kernel artifact, got kind={meta.get('kind')!r}")
    return KernelArtifact(str(path), values, meta)


def read_labels(path) -> np.ndarray:
    """One class label per line, same order as the matrix rows."""
    labels = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                labels.append(int(line.split(",")[0]))
    return np.asarray(labels, dtype=np.int64)
