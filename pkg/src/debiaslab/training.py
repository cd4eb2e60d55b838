"""Training loops: MLM pretraining/debias training and downstream task
fine-tuning. All loops are deterministic given (model state, data, seed).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from debiaslab.cda import ORIGIN_COUNTERFACTUAL, ORIGIN_ORIGINAL, SentenceRecord
from debiaslab.errors import DataError, NumericError
from debiaslab.model import (
    GROUP_DEBIAS, GROUP_HEAD, GROUP_TASK, AdapterConfig, EncodedBatch, Encoder,
    NLI_HEAD, STS_HEAD, encode_batch, encode_pair_batch, mlm_mask,
)
from debiaslab.numerics import AdamState, adam_step, child_rng
from debiaslab.metrics import nli_accuracy, sts_pearson

log = logging.getLogger(__name__)

SCHEDULE_PER_EPOCH = "per-epoch"  # each epoch: originals, then counterfactuals
SCHEDULE_ONCE = "once"  # all epochs over originals, then all epochs over counterfactuals
SCHEDULES = (SCHEDULE_PER_EPOCH, SCHEDULE_ONCE)

MODE_FULL = "full"
MODE_ADAPTER = "adapter"


@dataclass
class TrainStats:
    losses: list[float] = field(default_factory=list)
    steps: int = 0
    dev_metric: float | None = None


def _batches(items, batch_size):
    for i in range(0, len(items), batch_size):
        yield items[i : i + batch_size]


def _filtered(model: Encoder, grads: dict) -> dict:
    return {k: v for k, v in grads.items() if model.groups[k] in model.trainable_groups}


def _mlm_pass(model, sentences, state, stats, *, batch_size, mask_rate, rng):
    order = rng.permutation(len(sentences))
    for chunk in _batches(order, batch_size):
        batch = encode_batch([sentences[i] for i in chunk], model.vocab,
                             model.config.max_seq_len)
        masked = mlm_mask(batch, mask_rate, rng)
        loss, grads = model.mlm_loss_and_grads(masked)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite MLM loss at step {stats.steps}")
        state_grads = _filtered(model, grads)
        if state_grads:
            adam_step(model.params, state_grads, state)
        stats.losses.append(loss)
        stats.steps += 1


def train_mlm(model: Encoder, sentences: list[str], *, lr: float, batch_size: int,
              epochs: int, mask_rate: float, seed: int,
              max_steps: int | None = None) -> TrainStats:
    """Plain MLM training over a sentence list (used for from-scratch
    pretraining of the toy model). Honors model.trainable_groups."""
    if not sentences:
        raise DataError("empty corpus")
    state = AdamState(lr=lr)
    stats = TrainStats()
    for epoch in range(epochs):
        rng = child_rng(seed, 11, epoch)
        order = rng.permutation(len(sentences))
        for chunk in _batches(order, batch_size):
            if max_steps is not None and stats.steps >= max_steps:
                return stats
            batch = encode_batch([sentences[i] for i in chunk], model.vocab,
                                 model.config.max_seq_len)
            masked = mlm_mask(batch, mask_rate, rng)
            loss, grads = model.mlm_loss_and_grads(masked)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite MLM loss at step {stats.steps}")
            state_grads = _filtered(model, grads)
            if state_grads:
                adam_step(model.params, state_grads, state)
            stats.losses.append(loss)
            stats.steps += 1
    return stats


def train_debias(model: Encoder, records: list[SentenceRecord], *, lr: float,
                 batch_size: int, epochs: int, mask_rate: float, seed: int,
                 schedule: str = SCHEDULE_PER_EPOCH) -> TrainStats:
    """MLM training of the debias adapter on a two-sided corpus: the
    original portion is always consumed before the counterfactual portion.
    Only the debias-adapter group is updated; everything else stays
    bit-identical."""
    if GROUP_DEBIAS not in set(model.groups.values()):
        raise DataError("debias adapter not injected")
    if schedule not in SCHEDULES:
        raise DataError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
    if not records:
        raise DataError("empty corpus")
    model.set_trainable({GROUP_DEBIAS})
    originals = [r.text for r in records if r.origin == ORIGIN_ORIGINAL]
    counterfactuals = [r.text for r in records if r.origin == ORIGIN_COUNTERFACTUAL]
    state = AdamState(lr=lr)
    stats = TrainStats()
    if schedule == SCHEDULE_PER_EPOCH:
        for epoch in range(epochs):
            for part, portion in enumerate((originals, counterfactuals)):
                if portion:
                    rng = child_rng(seed, 13, epoch, part)
                    _mlm_pass(model, portion, state, stats, batch_size=batch_size,
                              mask_rate=mask_rate, rng=rng)
    else:
        for part, portion in enumerate((originals, counterfactuals)):
            for epoch in range(epochs):
                if portion:
                    rng = child_rng(seed, 13, epoch, part)
                    _mlm_pass(model, portion, state, stats, batch_size=batch_size,
                              mask_rate=mask_rate, rng=rng)
    return stats


def train_task(model: Encoder, rows, head: str, mode: str, *, lr: float,
               batch_size: int, epochs: int, seed: int,
               dev_rows=None, adapter_config: AdapterConfig | None = None) -> TrainStats:
    """Downstream fine-tuning on (sent1, sent2, gold) rows.

    mode=full updates every parameter group present; mode=adapter is the
    stacked regime: it requires a debias adapter, injects a task adapter
    on top, and updates only {task-adapter, head}, leaving base and debias
    parameters bit-identical.
    """
    if mode not in (MODE_FULL, MODE_ADAPTER):
        raise DataError(f"unknown training mode {mode!r}")
    if head not in (STS_HEAD, NLI_HEAD):
        raise DataError(f"unknown head {head!r}")
    if not rows:
        raise DataError("empty task dataset")
    model.ensure_head(head, seed=seed)
    if mode == MODE_ADAPTER:
        if GROUP_DEBIAS not in set(model.groups.values()):
            raise DataError("stacked mode requires a debias adapter")
        if GROUP_TASK not in set(model.groups.values()):
            model.add_adapter("task", adapter_config or AdapterConfig(), seed=seed)
        model.set_trainable({GROUP_TASK, GROUP_HEAD})
    else:
        model.set_trainable(set(model.groups.values()))
    state = AdamState(lr=lr)
    stats = TrainStats()
    golds = np.array([r[2] for r in rows], dtype=np.float64 if head == STS_HEAD else np.int64)
    for epoch in range(epochs):
        rng = child_rng(seed, 17, epoch)
        order = rng.permutation(len(rows))
        for chunk in _batches(order, batch_size):
            batch = encode_pair_batch([(rows[i][0], rows[i][1]) for i in chunk],
                                      model.vocab, model.config.max_seq_len)
            loss, grads = model.task_loss_and_grads(batch, head, golds[chunk])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite task loss at step {stats.steps}")
            state_grads = _filtered(model, grads)
            if state_grads:
                adam_step(model.params, state_grads, state)
            stats.losses.append(loss)
            stats.steps += 1
    if dev_rows:
        if head == NLI_HEAD:
            stats.dev_metric = nli_accuracy(make_nli_prob_fn(model), dev_rows)
        else:
            stats.dev_metric = sts_pearson(make_sts_score_fn(model), dev_rows)
    return stats


def predict_nli_batch(model: Encoder, pairs, batch_size: int = 32) -> np.ndarray:
    """Class distributions for premise/hypothesis pairs, shape (N, 3)."""
    out = []
    for i in range(0, len(pairs), batch_size):
        chunk = pairs[i : i + batch_size]
        batch = encode_pair_batch(list(chunk), model.vocab, model.config.max_seq_len)
        probs, _, _ = model.head_outputs(batch, NLI_HEAD)
        out.append(probs)
    return np.concatenate(out, axis=0)


def predict_sts_batch(model: Encoder, pairs, batch_size: int = 32) -> np.ndarray:
    out = []
    for i in range(0, len(pairs), batch_size):
        chunk = pairs[i : i + batch_size]
        batch = encode_pair_batch(list(chunk), model.vocab, model.config.max_seq_len)
        scores, _, _ = model.head_outputs(batch, STS_HEAD)
        out.append(scores)
    return np.concatenate(out, axis=0)


def make_nli_prob_fn(model: Encoder):
    def prob_fn(premise: str, hypothesis: str) -> np.ndarray:
        return predict_nli_batch(model, [(premise, hypothesis)])[0]

    return prob_fn


def make_sts_score_fn(model: Encoder):
    def score_fn(s1: str, s2: str) -> float:
        return float(predict_sts_batch(model, [(s1, s2)])[0])

    return score_fn
