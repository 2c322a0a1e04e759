"""
Dataset assembly: draw injections, solve each sample, label branch flows,
split and normalize.

Matrices are features x samples. x rows are [P; Q] net injections, y rows are
[V; theta] at every bus, p_br / q_br rows are sending-end branch flows. All
four are stored z-scored with statistics fitted on the training split.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config import config
from ..exceptions import (
    DataLoadError,
    DatasetError,
    NonConvergenceError,
    ShapeMismatchError,
    SingularJacobianError,
)
from ..grid import AdmittanceMatrix, NetworkCase, build_ybus
from ..io.loader import load_json_model
from ..io.writer import write_json_report, write_matrix_csv
from ..logging_config import get_logger
from ..models.inputs import UncertaintySpec
from ..models.outputs import DatasetManifest
from ..powerflow import branch_flows, solve_power_flow
from .distributions import draw_samples
from .normalizer import Normalizer

logger = get_logger("sampling")

SPLITS = ("train", "validation", "test")


@dataclass(frozen=True)
class DatasetSplit:
    x: np.ndarray
    y: np.ndarray
    p_br: np.ndarray
    q_br: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    p_br: np.ndarray
    q_br: np.ndarray
    x_norm: Normalizer
    y_norm: Normalizer
    p_norm: Normalizer
    q_norm: Normalizer
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    seed: int
    n_requested: int
    discarded: int = 0
    case_name: Optional[str] = None

    @property
    def n_samples(self) -> int:
        return self.x.shape[1]

    @property
    def n_bus(self) -> int:
        return self.x.shape[0] // 2

    @property
    def n_branch(self) -> int:
        return self.p_br.shape[0]

    def split(self, name: str) -> DatasetSplit:
        idx = {"train": self.train_idx, "validation": self.val_idx, "test": self.test_idx}.get(name)
        if idx is None:
            raise ValueError(f"unknown split {name!r}, expected one of {SPLITS}")
        return DatasetSplit(
            x=self.x[:, idx], y=self.y[:, idx], p_br=self.p_br[:, idx], q_br=self.q_br[:, idx]
        )

    def raw(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """denormalized x, y, p_br, q_br"""
        return (
            self.x_norm.invert(self.x),
            self.y_norm.invert(self.y),
            self.p_norm.invert(self.p_br),
            self.q_norm.invert(self.q_br),
        )

    def manifest(self) -> DatasetManifest:
        return DatasetManifest(
            case_name=self.case_name,
            n_bus=self.n_bus,
            n_branch=self.n_branch,
            n_requested=self.n_requested,
            n_samples=self.n_samples,
            discarded=self.discarded,
            seed=self.seed,
            split_sizes=(len(self.train_idx), len(self.val_idx), len(self.test_idx)),
        )


def split_fractions(split: Sequence[float]) -> Tuple[float, float, float]:
    """accepts fractions or counts (e.g. 10000,2000,10000); returns fractions"""
    if len(split) != 3:
        raise ValueError(f"split needs three parts (train, validation, test), got {len(split)}")
    if any(not s > 0 for s in split):
        raise ValueError(f"split parts must be positive, got {tuple(split)}")
    total = float(sum(split))
    return tuple(s / total for s in split)


def split_sizes(n: int, fractions: Sequence[float]) -> Tuple[int, int, int]:
    n_val = math.floor(fractions[1] * n)
    n_test = math.floor(fractions[2] * n)
    return n - n_val - n_test, n_val, n_test


def solve_samples(
    case: NetworkCase,
    injections: np.ndarray,
    ybus: AdmittanceMatrix = None,
    workers: int = 1,
    v0: Optional[np.ndarray] = None,
    theta0: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Solve every column of a [P; Q] injection matrix.

    v0 / theta0 warm-start every sample (typically the base-case solution);
    flat start otherwise.

    Returns:
        (v, theta, ok): n_bus x N magnitude / angle matrices (zeros where a
        sample failed) and the boolean convergence mask
    """
    if ybus is None:
        ybus = build_ybus(case)
    nb = case.n_bus
    n = injections.shape[1]

    def solve_one(k: int):
        try:
            return solve_power_flow(
                case, injections[:nb, k], injections[nb:, k], ybus=ybus, v0=v0, theta0=theta0
            )
        except (NonConvergenceError, SingularJacobianError) as e:
            logger.warning(f"sample {k} discarded: {e}")
            return None

    # map keeps sample order whatever the worker count
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(solve_one, range(n)))
    else:
        solutions = [solve_one(k) for k in range(n)]

    v = np.zeros((nb, n))
    theta = np.zeros((nb, n))
    ok = np.zeros(n, dtype=bool)
    for k, sol in enumerate(solutions):
        if sol is not None:
            v[:, k] = sol.v
            theta[:, k] = sol.theta
            ok[k] = True
    return v, theta, ok


def base_start(case: NetworkCase, ybus: AdmittanceMatrix = None) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """base-case (v, theta) to warm-start from; (None, None) when it does not solve"""
    p, q = case.base_injections()
    try:
        sol = solve_power_flow(case, p, q, ybus=ybus)
    except (NonConvergenceError, SingularJacobianError) as e:
        logger.warning(f"base case did not solve, using a flat start: {e}")
        return None, None
    return sol.v, sol.theta


def check_failures(failed: int, total: int) -> None:
    limit = config.sampling.max_failure_rate
    if failed > limit * total:
        raise DatasetError(failed, total, limit)
    if failed:
        logger.warning(f"discarded {failed} of {total} non-convergent samples")


def build_dataset(
    case: NetworkCase,
    spec: UncertaintySpec,
    n: int,
    seed: int,
    split: Sequence[float] = None,
    workers: int = 1,
    warm_start: bool = False,
) -> Dataset:
    """
    Draw n samples, solve them, and assemble a normalized dataset.

    warm_start starts every solve from the base-case solution instead of a
    flat start.

    Non-convergent samples are dropped before splitting. The converged pool is
    split in order: training first, then validation, then test; validation and
    test get floor(fraction * N) samples, training the rest. Normalizers are fit
    on the training columns only.

    Raises:
        DatasetError: more than the allowed share of samples did not converge
        ShapeMismatchError: spec and case disagree on the bus count
    """
    if spec.n_bus != case.n_bus:
        raise ShapeMismatchError("uncertainty spec bus count", (case.n_bus,), (spec.n_bus,))
    fractions = split_fractions(split if split is not None else config.sampling.default_split)

    logger.info(f"building dataset: {n} samples, seed {seed}, case {case.name}")
    raw_x = draw_samples(spec, n, seed)
    ybus = build_ybus(case)
    v0, theta0 = base_start(case, ybus) if warm_start else (None, None)
    v, theta, ok = solve_samples(case, raw_x, ybus=ybus, workers=workers, v0=v0, theta0=theta0)
    failed = int(n - ok.sum())
    check_failures(failed, n)

    raw_x = raw_x[:, ok]
    v, theta = v[:, ok], theta[:, ok]
    flows = branch_flows(v, theta, case.branches)
    raw_y = np.vstack([v, theta])

    pool = raw_x.shape[1]
    n_train, n_val, n_test = split_sizes(pool, fractions)
    idx = np.arange(pool)
    train_idx = idx[:n_train]
    val_idx = idx[n_train:n_train + n_val]
    test_idx = idx[n_train + n_val:]

    x_norm = Normalizer.fit(raw_x[:, train_idx])
    y_norm = Normalizer.fit(raw_y[:, train_idx])
    p_norm = _fit_flows(flows.p_from, train_idx)
    q_norm = _fit_flows(flows.q_from, train_idx)

    dataset = Dataset(
        x=x_norm.apply(raw_x),
        y=y_norm.apply(raw_y),
        p_br=p_norm.apply(flows.p_from),
        q_br=q_norm.apply(flows.q_from),
        x_norm=x_norm,
        y_norm=y_norm,
        p_norm=p_norm,
        q_norm=q_norm,
        train_idx=train_idx,
        val_idx=val_idx,
        test_idx=test_idx,
        seed=seed,
        n_requested=n,
        discarded=failed,
        case_name=case.name,
    )
    logger.info(
        f"dataset ready: {pool} samples ({n_train}/{n_val}/{n_test}), {failed} discarded"
    )
    return dataset


def _fit_flows(flows: np.ndarray, train_idx: np.ndarray) -> Normalizer:
    # a case without branches still gets a (0-feature) normalizer
    if flows.shape[0] == 0:
        return Normalizer.identity(0)
    return Normalizer.fit(flows[:, train_idx])


# --- persistence ------------------------------------------------------------

_NORMS = ("x", "y", "p", "q")


def save_dataset(dataset: Dataset, out_dir: Path) -> Path:
    """arrays.npz holds every float64 array; dataset.json the metadata"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    arrays = {
        "x": dataset.x,
        "y": dataset.y,
        "p_br": dataset.p_br,
        "q_br": dataset.q_br,
        "train_idx": dataset.train_idx,
        "val_idx": dataset.val_idx,
        "test_idx": dataset.test_idx,
    }
    for key in _NORMS:
        norm = getattr(dataset, f"{key}_norm")
        arrays[f"{key}_mean"] = norm.mean
        arrays[f"{key}_std"] = norm.std
    np.savez(out_dir / "arrays.npz", **arrays)
    write_json_report(dataset.manifest(), out_dir / "dataset.json")
    return out_dir


def load_dataset(path: Path) -> Dataset:
    path = Path(path)
    manifest = load_json_model(path / "dataset.json", DatasetManifest)
    npz = path / "arrays.npz"
    if not npz.exists():
        raise DataLoadError(str(npz), "file not found")
    with np.load(npz) as data:
        arrays = {k: data[k] for k in data.files}

    norms = {
        key: Normalizer(mean=arrays[f"{key}_mean"], std=arrays[f"{key}_std"]) for key in _NORMS
    }
    dataset = Dataset(
        x=arrays["x"],
        y=arrays["y"],
        p_br=arrays["p_br"],
        q_br=arrays["q_br"],
        x_norm=norms["x"],
        y_norm=norms["y"],
        p_norm=norms["p"],
        q_norm=norms["q"],
        train_idx=arrays["train_idx"],
        val_idx=arrays["val_idx"],
        test_idx=arrays["test_idx"],
        seed=manifest.seed,
        n_requested=manifest.n_requested,
        discarded=manifest.discarded,
        case_name=manifest.case_name,
    )
    if dataset.n_samples != manifest.n_samples or dataset.n_bus != manifest.n_bus:
        raise DataLoadError(str(path), "arrays do not match dataset.json")
    return dataset


def export_dataset_csv(dataset: Dataset, out_dir: Path) -> List[Path]:
    """denormalized matrices, one sample per row"""
    out_dir = Path(out_dir)
    x, y, p_br, q_br = dataset.raw()
    nb, nl = dataset.n_bus, dataset.n_branch
    return [
        write_matrix_csv(out_dir / "x.csv", x, [f"p_{i}" for i in range(nb)] + [f"q_{i}" for i in range(nb)]),
        write_matrix_csv(out_dir / "y.csv", y, [f"v_{i}" for i in range(nb)] + [f"theta_{i}" for i in range(nb)]),
        write_matrix_csv(out_dir / "p_br.csv", p_br, [f"p_br_{k}" for k in range(nl)]),
        write_matrix_csv(out_dir / "q_br.csv", q_br, [f"q_br_{k}" for k in range(nl)]),
    ]
