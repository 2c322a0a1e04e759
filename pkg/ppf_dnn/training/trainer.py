"""
Mini-batch training loop.

One epoch is one pass over the training split in a freshly shuffled order
(the shuffle stream is keyed by seed and epoch). After every epoch the
validation loss decides the best snapshot; training stops on patience, on
max_epochs, or (when enabled) once every accuracy index on the validation
split is at or below the target. The best-validation snapshot is returned,
except on an accuracy stop where the best snapshot misses the targets: then
the model that met them is returned.
"""

import time
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import NonFiniteGradientError, ShapeMismatchError, TrainingDivergedError
from ..grid import NetworkCase
from ..io.writer import write_csv_table
from ..logging_config import get_logger
from ..models.enums import InitScheme, StopReason
from ..models.inputs import TrainConfig
from ..models.outputs import EpochRecord, TrainHistory
from ..nn.init import init_balanced, init_he
from ..nn.network import DnnModel, forward
from ..pipeline.metrics import evaluate_indexes
from ..rng import make_rng
from ..sampling.normalizer import Normalizer
from .backprop import backprop
from .losses import PenaltyContext, loss_standard, penalty_terms
from .modes import mode_spec
from .rmsprop import RmspropState, rmsprop_step

logger = get_logger("training")

DEFAULT_HIDDEN = (100, 100, 100)

HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "J_P", "J_Q", "alpha", "beta", "seconds"]


def layer_sizes_for(n_bus: int, hidden: Sequence[int] = DEFAULT_HIDDEN) -> Tuple[int, ...]:
    """[2 n_bus, hidden..., 2 n_bus]"""
    return (2 * n_bus, *hidden, 2 * n_bus)


def build_model(
    mode,
    layer_sizes: Sequence[int],
    x_norm: Normalizer,
    y_norm: Normalizer,
    seed: int,
    case_name: Optional[str] = None,
) -> DnnModel:
    """an initialized network wired the way the mode wants it"""
    spec = mode_spec(mode)
    init = init_balanced if spec.init == InitScheme.BALANCED else init_he
    weights, biases = init(layer_sizes, seed)
    return DnnModel(
        layer_sizes=tuple(layer_sizes),
        weights=weights,
        biases=biases,
        x_norm=x_norm,
        y_norm=y_norm,
        output_activation=spec.output_activation,
        mode=spec.mode,
        init=spec.init.value,
        seed=seed,
        case_name=case_name,
    )


def _validation_loss(model: DnnModel, split) -> float:
    y_hat, _ = forward(model, split.x)
    return loss_standard(y_hat, split.y)


def train(
    config: TrainConfig,
    dataset,
    case: NetworkCase,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    model: Optional[DnnModel] = None,
) -> Tuple[DnnModel, TrainHistory]:
    """
    Train a network for config.mode.

    Args:
        config: hyperparameters and stopping rules
        dataset: normalized dataset (training, validation splits are used)
        case: the case the dataset was built from
        hidden: hidden layer widths when no model is given
        model: start from this network instead of a fresh initialization

    Returns:
        (best-validation model, or the model that met the accuracy targets, history)

    Raises:
        TrainingDivergedError: the loss or the parameters became non-finite
    """
    if dataset.n_bus != case.n_bus or dataset.n_branch != case.n_branch:
        raise ShapeMismatchError(
            "dataset vs case", (case.n_bus, case.n_branch), (dataset.n_bus, dataset.n_branch)
        )

    spec = mode_spec(config.mode)
    ctx = PenaltyContext.from_dataset(case, dataset) if spec.penalized else None
    if model is None:
        model = build_model(
            spec.mode, layer_sizes_for(case.n_bus, hidden), dataset.x_norm, dataset.y_norm,
            config.seed, case.name,
        )

    train_split = dataset.split("train")
    val_split = dataset.split("validation")
    if val_split.n == 0:
        logger.warning("empty validation split, early stopping follows the training split")
        val_split = train_split

    history = TrainHistory(mode=spec.mode)
    best = model.copy()
    best_val = _validation_loss(model, val_split)
    history.best_val_loss = best_val
    state = RmspropState.zeros_like(model)

    n_train = train_split.n
    bs = config.batch_size
    since_best = 0
    stop = StopReason.MAX_EPOCHS

    logger.info(
        f"training {spec.mode.value}: {n_train} samples, batch {bs}, "
        f"up to {config.max_epochs} epochs, layers {list(model.layer_sizes)}"
    )

    for epoch in range(1, config.max_epochs + 1):
        t0 = time.perf_counter()
        order = make_rng(config.seed, "shuffle", epoch).permutation(n_train)

        loss_sum = jp_sum = jq_sum = alpha_sum = beta_sum = 0.0
        n_batches = 0
        for start in range(0, n_train, bs):
            idx = order[start:start + bs]
            xb = train_split.x[:, idx]
            yb = train_split.y[:, idx]
            pb = train_split.p_br[:, idx]
            qb = train_split.q_br[:, idx]

            y_hat, trace = forward(model, xb)
            loss_sum += loss_standard(y_hat, yb) * len(idx)
            if ctx is not None:
                v, theta = ctx.split_raw(y_hat)
                j_p, j_q = penalty_terms(v, theta, pb, qb, ctx, len(idx))
                jp_sum += j_p * len(idx)
                jq_sum += j_q * len(idx)

            try:
                grads = backprop(spec.mode, model, trace, yb, pb, qb, ctx)
            except NonFiniteGradientError as err:
                raise TrainingDivergedError(epoch, spec.mode.value) from err
            rmsprop_step(state, model, grads, config)
            alpha_sum += grads.alpha
            beta_sum += grads.beta
            n_batches += 1

        train_loss = loss_sum / max(n_train, 1)
        if not np.isfinite(train_loss) or not model.is_finite():
            raise TrainingDivergedError(epoch, spec.mode.value)

        val_loss = _validation_loss(model, val_split)
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(epoch, spec.mode.value)

        record = EpochRecord(
            epoch=epoch,
            train_loss=train_loss,
            val_loss=val_loss,
            J_P=jp_sum / max(n_train, 1),
            J_Q=jq_sum / max(n_train, 1),
            alpha=alpha_sum / max(n_batches, 1),
            beta=beta_sum / max(n_batches, 1),
            seconds=time.perf_counter() - t0,
        )
        history.records.append(record)
        logger.debug(
            f"epoch {epoch}: train {train_loss:.6e} val {val_loss:.6e} "
            f"alpha {record.alpha:.3g} beta {record.beta:.3g}"
        )

        if val_loss < best_val:
            best_val = val_loss
            best = model.copy()
            history.best_epoch = epoch
            history.best_val_loss = best_val
            since_best = 0
        else:
            since_best += 1

        if config.stop_on_accuracy and epoch % config.accuracy_check_every == 0:
            report = evaluate_indexes(model, dataset, case, config.thresholds, split="validation")
            if report.meets(config.target_proportion):
                stop = StopReason.ACCURACY
                best_report = evaluate_indexes(best, dataset, case, config.thresholds, split="validation")
                if not best_report.meets(config.target_proportion):
                    logger.info(f"best snapshot (epoch {history.best_epoch}) misses the targets, keeping epoch {epoch}")
                    best = model.copy()
                    history.best_epoch = epoch
                    history.best_val_loss = val_loss
                break

        if since_best >= config.patience:
            stop = StopReason.PATIENCE
            break

    history.stop_reason = stop
    logger.info(
        f"{spec.mode.value} stopped ({stop.value}) after {history.n_epochs} epochs, "
        f"best epoch {history.best_epoch}, val loss {best_val:.6e}"
    )
    return best, history


def write_history_csv(history: TrainHistory, path) -> None:
    rows = [[getattr(r, c) for c in HISTORY_COLUMNS] for r in history.records]
    write_csv_table(path, HISTORY_COLUMNS, rows)
