"""Deterministic numerics: activations, normalization, loss, Adam, RNG,
and a finite-difference gradient oracle.

Vector-level convenience ops validate their inputs; the batched hot
paths go through debiaslab.kernels directly.
"""

from dataclasses import dataclass, field

import numpy as np

from debiaslab import kernels
from debiaslab.errors import NumericError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; identical seed gives an identical stream."""
    return np.random.Generator(np.random.PCG64(seed))


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream derived from (seed, *keys); safe to partition
    work across keys without draws in one stream affecting another."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *keys])))


def check_finite(x: np.ndarray, what: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")
    return x


def softmax(v: np.ndarray) -> np.ndarray:
    """Probability vector from a finite score vector. Shift-invariant,
    order-preserving, sums to 1."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise NumericError("softmax of empty vector")
    check_finite(v, "softmax input")
    return kernels.softmax_rows(v.reshape(1, -1))[0]


def layer_norm(v: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Normalize v to zero mean / unit variance (population), then apply
    the elementwise affine (gain, bias). Zero-variance input with eps > 0
    returns the bias vector."""
    v = np.asarray(v, dtype=np.float64)
    gain = np.asarray(gain, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if not (v.shape == gain.shape == bias.shape):
        raise NumericError(
            f"layer_norm shape mismatch: v {v.shape}, gain {gain.shape}, bias {bias.shape}"
        )
    y, _, _ = kernels.layer_norm_rows(
        np.ascontiguousarray(v.reshape(1, -1)), gain.ravel(), bias.ravel(), eps
    )
    out = y[0].reshape(v.shape)
    check_finite(out, "layer_norm output")
    return out


def cross_entropy(logits: np.ndarray, target: int) -> float:
    """-log softmax(logits)[target]."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= target < logits.size:
        raise NumericError(f"cross_entropy target {target} out of range for {logits.size} classes")
    check_finite(logits, "cross_entropy logits")
    losses, _ = kernels.cross_entropy_rows(
        np.ascontiguousarray(logits.reshape(1, -1)), np.array([target], dtype=np.int64)
    )
    return float(losses[0])


@dataclass
class AdamState:
    """Optimizer state for a named set of parameters.

    Moments are lazily allocated per parameter name; the step counter
    increases by exactly 1 per adam_step call.
    """

    lr: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    step: int = 0
    moments: dict = field(default_factory=dict)

    def slot(self, name: str, shape) -> tuple[np.ndarray, np.ndarray]:
        if name not in self.moments:
            self.moments[name] = (np.zeros(shape, dtype=np.float64), np.zeros(shape, dtype=np.float64))
        return self.moments[name]


def adam_step(params: dict, grads: dict, state: AdamState) -> None:
    """One bias-corrected Adam step, in place, constant learning rate.

    params/grads: name -> float64 array of matching shape. Only names
    present in grads are updated.
    """
    state.step += 1
    for name, g in grads.items():
        p = params[name]
        if p.shape != g.shape:
            raise NumericError(f"adam_step shape mismatch for {name}: {p.shape} vs {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}")
        m, v = state.slot(name, p.shape)
        kernels.adam_update(
            p.reshape(-1), np.ascontiguousarray(g.reshape(-1)), m.reshape(-1), v.reshape(-1),
            state.step, state.lr, state.beta1, state.beta2, state.eps,
        )


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    return dy * (x > 0.0)


def gelu(x: np.ndarray) -> np.ndarray:
    return kernels.gelu_rows(np.ascontiguousarray(x.reshape(1, -1))).reshape(x.shape)


def gelu_backward(x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    return kernels.gelu_backward_rows(
        np.ascontiguousarray(x.reshape(1, -1)), np.ascontiguousarray(dy.reshape(1, -1))
    ).reshape(x.shape)


ACTIVATIONS = {
    "relu": (relu, relu_backward),
    "gelu": (gelu, gelu_backward),
}


def _rel_err(a: float, n: float) -> float:
    return abs(a - n) / max(abs(a), abs(n), 1e-8)


def grad_check(f, grad_fn, params: list, h: float = 1e-5) -> float:
    """Max relative error between grad_fn and central differences of f.

    f(params) -> scalar; grad_fn(params) -> list of arrays shaped like
    params. Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-8).
    """
    params = [np.asarray(p, dtype=np.float64) for p in params]
    analytic = grad_fn(params)
    worst = 0.0
    for pi, (p, a) in enumerate(zip(params, analytic)):
        flat = p.reshape(-1)
        aflat = np.asarray(a).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = f(params)
            flat[i] = orig - h
            fm = f(params)
            flat[i] = orig
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise NumericError(f"non-finite f during grad_check at param {pi}, coord {i}")
            num = (fp - fm) / (2.0 * h)
            worst = max(worst, _rel_err(aflat[i], num))
    return worst


def grad_check_adaptive(f, grad_fn, params: list, h: float = 8e-3, levels: int = 4) -> float:
    """grad_check for deep compositions where no single step width works:
    steep high-order curvature wants small h, roundoff on attenuated
    coordinates wants large h. Runs Richardson-extrapolated central
    differences over a ladder of halved steps and keeps, per coordinate,
    the estimate where successive extrapolations agree best.
    """
    params = [np.asarray(p, dtype=np.float64) for p in params]
    analytic = grad_fn(params)
    worst = 0.0
    for p, a in zip(params, analytic):
        flat = p.reshape(-1)
        aflat = np.asarray(a).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]

            def central(step):
                flat[i] = orig + step
                fp = f(params)
                flat[i] = orig - step
                fm = f(params)
                flat[i] = orig
                return (fp - fm) / (2.0 * step)

            d = [central(h / 2**k) for k in range(levels + 1)]
            rich = [(4.0 * d[k + 1] - d[k]) / 3.0 for k in range(levels)]
            gaps = [abs(rich[k + 1] - rich[k]) for k in range(levels - 1)]
            best = min(range(len(gaps)), key=gaps.__getitem__)
            worst = max(worst, _rel_err(aflat[i], rich[best + 1]))
    return worst
