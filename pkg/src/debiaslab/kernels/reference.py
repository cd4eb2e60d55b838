"""Numpy reference implementations of the hot kernels.

Used as the fallback backend when the compiled extension is unavailable
(see debiaslab.kernels). All kernels operate on C-contiguous float64
arrays and must match the compiled versions to near machine precision.
"""

import numpy as np

GELU_C = 0.7978845608028654  # sqrt(2/pi)
GELU_A = 0.044715


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax. x: (N, K) -> (N, K), rows sum to 1."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def layer_norm_rows(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float):
    """Row-wise layer norm with population variance.

    Returns (y, mean, rstd) where rstd = 1/sqrt(var + eps); mean/rstd are
    cached for the backward pass.
    """
    mean = x.mean(axis=1)
    var = ((x - mean[:, None]) ** 2).mean(axis=1)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean[:, None]) * rstd[:, None]
    y = gain[None, :] * xhat + bias[None, :]
    return y, mean, rstd


def layer_norm_backward_rows(dy, x, gain, mean, rstd):
    """Backward of layer_norm_rows. Returns (dx, dgain, dbias)."""
    k = x.shape[1]
    xhat = (x - mean[:, None]) * rstd[:, None]
    dxhat = dy * gain[None, :]
    dgain = (dy * xhat).sum(axis=0)
    dbias = dy.sum(axis=0)
    m1 = dxhat.sum(axis=1) / k
    m2 = (dxhat * xhat).sum(axis=1) / k
    dx = rstd[:, None] * (dxhat - m1[:, None] - xhat * m2[:, None])
    return dx, dgain, dbias


def cross_entropy_rows(logits: np.ndarray, targets: np.ndarray):
    """Per-row -log softmax(logits)[target] and its gradient.

    logits: (N, K), targets: (N,) int64. Returns (losses (N,), dlogits (N, K))
    with dlogits = softmax - onehot (unscaled).
    """
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    z = e.sum(axis=1)
    probs = e / z[:, None]
    idx = np.arange(logits.shape[0])
    losses = np.log(z) - shifted[idx, targets]
    dlogits = probs.copy()
    dlogits[idx, targets] -= 1.0
    return losses, dlogits


def adam_update(param, grad, m, v, t, lr, beta1, beta2, eps):
    """Fused in-place Adam step with bias correction. All arrays 1-D."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    param -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def gelu_rows(x: np.ndarray) -> np.ndarray:
    """Tanh-approximation GELU, elementwise."""
    inner = GELU_C * (x + GELU_A * x**3)
    return 0.5 * x * (1.0 + np.tanh(inner))


def gelu_backward_rows(x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Elementwise gradient of the tanh-approximation GELU."""
    inner = GELU_C * (x + GELU_A * x**3)
    t = np.tanh(inner)
    dinner = GELU_C * (1.0 + 3.0 * GELU_A * x * x)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner)
