"""Repeated stratified cross-validation over precomputed kernel matrices.

Protocol: for each of `repeats` repetitions, split the dataset into
`folds` stratified folds; per fold, pick the (kernel artifact, C) pair by
accuracy on a single stratified 80/20 validation split of the training
portion only, refit on the full training portion, and score the held-out
fold. A classical SVM runs directly on the (possibly indefinite) Gram
matrix; no spectrum clipping is applied, and the report says so.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.svm import SVC

from .artifacts import ArtifactError, KernelArtifact, read_kernel_artifact, read_labels


@dataclass(frozen=True)
class ExperimentSpec:
    artifact_paths: tuple[str, ...]
    labels_path: str
    c_grid: tuple[float, ...]
    folds: int = 10
    repeats: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.artifact_paths:
            raise ArtifactError("no kernel artifacts given")
        if not self.c_grid:
            raise ArtifactError("C grid is empty")
        if self.folds < 2 or self.repeats < 1:
            raise ArtifactError(f"invalid folds/repeats: {self.folds}/{self.repeats}")


def load_experiment(spec: ExperimentSpec):
    artifacts = [read_kernel_artifact(p) for p in spec.artifact_paths]
    artifacts.sort(key=lambda a: a.sort_key())
    sizes = {a.values.shape[0] for a in artifacts}
    if len(sizes) != 1:
        raise ArtifactError(f"artifacts disagree on N: {sorted(sizes)}")
    names = {a.meta.get("dataset") for a in artifacts}
    if len(names) != 1:
        raise ArtifactError(f"artifacts disagree on dataset name: {sorted(map(str, names))}")
    labels = read_labels(spec.labels_path)
    n = sizes.pop()
    if len(labels) != n:
        raise ArtifactError(f"{len(labels)} labels for {n} x {n} matrices")
    return artifacts, labels


def stratified_folds(labels: np.ndarray, n_folds: int, rng) -> list[np.ndarray]:
    """Round-robin per class after a shuffle; class counts per fold differ by <= 1."""
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    offset = 0
    for cls in np.unique(labels):
        idx = rng.permutation(np.where(labels == cls)[0])
        for k, i in enumerate(idx):
            folds[(k + offset) % n_folds].append(int(i))
        offset += len(idx)
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


def stratified_holdout(indices: np.ndarray, labels: np.ndarray, rng,
                       val_fraction: float = 0.2):
    """Single stratified split of `indices` into (train, validation)."""
    tr: list[int] = []
    val: list[int] = []
    for cls in np.unique(labels[indices]):
        idx = rng.permutation(indices[labels[indices] == cls])
        n_val = int(round(val_fraction * len(idx)))
        if len(idx) >= 2:
            n_val = max(1, min(n_val, len(idx) - 1))
        else:
            n_val = 0
        val.extend(idx[:n_val])
        tr.extend(idx[n_val:])
    return np.sort(np.asarray(tr, dtype=np.int64)), np.sort(np.asarray(val, dtype=np.int64))


def _fit_score(kernel, labels, train, test, c):
    clf = SVC(kernel="precomputed", C=c)
    clf.fit(kernel[np.ix_(train, train)], labels[train])
    return float(clf.score(kernel[np.ix_(test, train)], labels[test]))


def _run_repeat(repeat, artifacts, labels, spec):
    rng_folds = np.random.default_rng(np.random.SeedSequence([spec.seed, repeat]))
    folds = stratified_folds(labels, spec.folds, rng_folds)
    all_idx = np.arange(len(labels))
    results = []
    for fold_i, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, test_idx)
        rng_inner = np.random.default_rng(np.random.SeedSequence([spec.seed, repeat, fold_i]))
        inner_tr, inner_val = stratified_holdout(train_idx, labels, rng_inner)
        best = None
        for a_i, artifact in enumerate(artifacts):
            for c in spec.c_grid:
                if len(inner_val):
                    acc = _fit_score(artifact.values, labels, inner_tr, inner_val, c)
                else:
                    acc = _fit_score(artifact.values, labels, inner_tr, inner_tr, c)
                if best is None or acc > best[0]:
                    best = (acc, a_i, c)
        _, a_i, c = best
        test_acc = _fit_score(artifacts[a_i].values, labels, train_idx, test_idx, c)
        selection_indices = np.union1d(inner_tr, inner_val)
        results.append({
            "repeat": repeat,
            "fold": fold_i,
            "accuracy": test_acc,
            "selected_artifact": artifacts[a_i].label,
            "selected_c": c,
            "test_indices": test_idx.tolist(),
            "selection_indices": selection_indices.tolist(),
            "selection_disjoint_from_test": not bool(
                np.intersect1d(selection_indices, test_idx).size),
        })
    return results


def cross_validate(spec: ExperimentSpec, n_jobs: int = 1) -> dict:
    """Run the full protocol and return the report as a JSON-ready dict."""
    artifacts, labels = load_experiment(spec)
    repeat_results = Parallel(n_jobs=n_jobs)(
        delayed(_run_repeat)(r, artifacts, labels, spec) for r in range(spec.repeats))
    folds_flat = [f for rep in repeat_results for f in rep]
    per_fold = [f["accuracy"] for f in folds_flat]
    repeat_means = [float(np.mean([f["accuracy"] for f in rep])) for rep in repeat_results]

    artifact_counts: dict[str, int] = {}
    c_counts: dict[str, int] = {}
    for f in folds_flat:
        artifact_counts[f["selected_artifact"]] = artifact_counts.get(f["selected_artifact"], 0) + 1
        key = f"{f['selected_c']:g}"
        c_counts[key] = c_counts.get(key, 0) + 1

    return {
        "dataset": artifacts[0].meta.get("dataset"),
        "n": int(artifacts[0].values.shape[0]),
        "folds": spec.folds,
        "repeats": spec.repeats,
        "seed": spec.seed,
        "c_grid": list(spec.c_grid),
        "artifacts": [a.label for a in artifacts],
        "accuracy_mean": float(np.mean(per_fold)),
        "accuracy_sd_over_repeats": float(np.std(repeat_means)),
        "accuracy_sd_over_folds": float(np.std(per_fold)),
        "repeat_means": repeat_means,
        "per_fold_accuracies": per_fold,
        "selection_frequencies": {"artifact": artifact_counts, "c": c_counts},
        "selection_audit_all_disjoint": all(
            f["selection_disjoint_from_test"] for f in folds_flat),
        "clipping": "none (classical SVM on the possibly indefinite Gram matrix)",
        "inner_selection": "single stratified 80/20 split of the training portion",
        "fold_details": folds_flat,
    }


def write_table(report: dict, path) -> None:
    with open(path, "w") as fh:
        fh.write("dataset\tn\taccuracy_mean\taccuracy_sd_over_repeats\t"
                 "accuracy_sd_over_folds\tfolds\trepeats\tseed\n")
        fh.write(f"{report['dataset']}\t{report['n']}\t"
                 f"{100 * report['accuracy_mean']:.2f}\t"
                 f"{100 * report['accuracy_sd_over_repeats']:.2f}\t"
                 f"{100 * report['accuracy_sd_over_folds']:.2f}\t"
                 f"{report['folds']}\t{report['repeats']}\t{report['seed']}\n")


def rank_methods(reports: list[dict]) -> list[dict]:
    """Average rank per method across datasets; tied accuracies share ranks."""
    if len(reports) < 2:
        raise ArtifactError("need at least two method reports to rank")
    methods = sorted({r["method"] for r in reports})
    datasets = sorted({r["dataset"] for r in reports})
    table = {}
    for r in reports:
        table[(r["method"], r["dataset"])] = float(r["accuracy_mean"])
    for m in methods:
        missing = [d for d in datasets if (m, d) not in table]
        if missing:
            raise ArtifactError(f"method {m!r} missing datasets: {missing}")

    totals = {m: 0.0 for m in methods}
    for d in datasets:
        accs = [table[(m, d)] for m in methods]
        order = sorted(range(len(methods)), key=lambda i: -accs[i])
        i = 0
        position = 1
        while i < len(order):
            j = i
            while j + 1 < len(order) and accs[order[j + 1]] == accs[order[i]]:
                j += 1
            shared = (position + position + (j - i)) / 2.0
            for k in range(i, j + 1):
                totals[methods[order[k]]] += shared
            position += j - i + 1
            i = j + 1
    return sorted(
        ({"method": m, "average_rank": totals[m] / len(datasets)} for m in methods),
        key=lambda r: r["average_rank"])
