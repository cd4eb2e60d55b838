"""Fairness-forgetting sweep (training-set size x seed x mode grid with
Student-t confidence intervals) and layer-range effect-size grids.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as scipy_stats

from debiaslab.checkpoint import load_checkpoint
from debiaslab.errors import DataError
from debiaslab.metrics import BiasSpec, LayerRange, nli_bias, weat_test
from debiaslab.model import GROUP_DEBIAS, NLI_HEAD, Encoder
from debiaslab.training import MODE_ADAPTER, MODE_FULL, predict_nli_batch, train_task

MODE_BASELINE = "full"  # plain model, full fine-tuning
MODE_DEBIAS_FULL = "debias-full"  # debias adapter present, full fine-tuning
MODE_DEBIAS_TA = "debias-ta"  # frozen debias adapter + trainable task adapter
SWEEP_MODES = (MODE_BASELINE, MODE_DEBIAS_FULL, MODE_DEBIAS_TA)

DEFAULT_SIZES = (100, 250, 500, 1000)


def student_t_ci(values, confidence: float = 0.95) -> tuple[float, float]:
    """(mean, half-width) of the confidence interval using the Student-t
    quantile with n-1 degrees of freedom and the sample std (ddof=1)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise DataError("confidence interval needs at least 2 runs")
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1))
    tcrit = float(scipy_stats.t.ppf((1.0 + confidence) / 2.0, arr.size - 1))
    return mean, tcrit * sd / float(np.sqrt(arr.size))


@dataclass
class SweepCell:
    mode: str
    size: int
    seed: int
    nn: float
    fn: float
    acc: float | None
    runtime: float

    def to_dict(self) -> dict:
        return {"mode": self.mode, "size": self.size, "seed": self.seed,
                "nn": self.nn, "fn": self.fn, "acc": self.acc, "runtime": self.runtime}


@dataclass
class SweepResult:
    cells: list[SweepCell]
    aggregates: dict = field(default_factory=dict)  # (mode, size) -> metric -> (mean, ci)

    def aggregate(self) -> None:
        self.aggregates = {}
        keys = sorted({(c.mode, c.size) for c in self.cells})
        for mode, size in keys:
            group = [c for c in self.cells if c.mode == mode and c.size == size]
            entry = {"n": len(group)}
            for metric in ("nn", "fn", "acc"):
                vals = [getattr(c, metric) for c in group if getattr(c, metric) is not None]
                if len(vals) >= 2:
                    entry[metric] = student_t_ci(vals)
            self.aggregates[(mode, size)] = entry

    def to_dict(self) -> dict:
        return {
            "cells": [c.to_dict() for c in self.cells],
            "aggregates": [
                {"mode": mode, "size": size,
                 **{k: (v if k == "n" else {"mean": v[0], "ci95": v[1]})
                    for k, v in entry.items()}}
                for (mode, size), entry in sorted(self.aggregates.items())
            ],
        }


def fairness_sweep(plain_ckpt, debiased_ckpt, task_rows, bias_pairs, *, sizes,
                   seeds, modes=SWEEP_MODES, dev_rows=None, lr: float = 1e-3,
                   batch_size: int = 16, epochs: int = 2) -> SweepResult:
    """For every (mode, size, seed): load a fresh model from the matching
    checkpoint, fine-tune on the first `size` task rows (seed-shuffled),
    then measure neutral-class statistics on the bias evaluation pairs and
    accuracy on the labeled dev rows. In the stacked mode the debias
    adapter is verified bit-frozen."""
    if len(seeds) < 2:
        raise DataError("sweep needs at least 2 seeds for confidence intervals")
    if max(sizes) > len(task_rows):
        raise DataError(f"task data has {len(task_rows)} rows < max size {max(sizes)}")
    for mode in modes:
        if mode not in SWEEP_MODES:
            raise DataError(f"unknown sweep mode {mode!r}")
    cells = []
    for mode in modes:
        ckpt = plain_ckpt if mode == MODE_BASELINE else debiased_ckpt
        for size in sizes:
            for seed in seeds:
                t0 = time.time()
                model = load_checkpoint(ckpt)
                if mode != MODE_BASELINE and GROUP_DEBIAS not in set(model.groups.values()):
                    raise DataError(f"checkpoint {ckpt} has no debias adapter")
                rows = _take(task_rows, size, seed)
                train_mode = MODE_ADAPTER if mode == MODE_DEBIAS_TA else MODE_FULL
                before = model.group_checksum(GROUP_DEBIAS) if mode == MODE_DEBIAS_TA else None
                stats = train_task(model, rows, NLI_HEAD, train_mode, lr=lr,
                                   batch_size=batch_size, epochs=epochs, seed=seed,
                                   dev_rows=dev_rows)
                if mode == MODE_DEBIAS_TA:
                    after = model.group_checksum(GROUP_DEBIAS)
                    if after != before:
                        raise DataError("debias adapter changed during stacked training")
                probs = predict_nli_batch(model, bias_pairs)
                fn = float((probs.argmax(axis=1) == 1).mean())
                nn = float(probs[:, 1].mean())
                cells.append(SweepCell(mode=mode, size=size, seed=seed, nn=nn, fn=fn,
                                       acc=stats.dev_metric, runtime=time.time() - t0))
    result = SweepResult(cells=cells)
    result.aggregate()
    return result


def _take(rows, size, seed):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 23])))
    order = rng.permutation(len(rows))[:size]
    return [rows[i] for i in order]


def heatmap_grid(model: Encoder, spec: BiasSpec, mode: str = "exact",
                 samples: int = 50_000, seed: int = 0) -> list[dict]:
    """One effect size + p-value per level range (m, n), m <= n; the grid
    over a depth-L encoder has (L+1)(L+2)/2 cells."""
    rows = []
    levels = model.config.layers
    for m in range(levels + 1):
        for n in range(m, levels + 1):
            res = weat_test(model, spec, LayerRange(m, n), mode=mode,
                            samples=samples, seed=seed)
            rows.append({"m": m, "n": n, "effect": res.effect_size, "p": res.p_value})
    return rows
