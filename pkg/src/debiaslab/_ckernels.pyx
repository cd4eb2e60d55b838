# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernels: fused row-wise ops for the training inner loop.

Mirrors debiaslab.kernels.reference function-for-function. Matmuls stay
in numpy (BLAS); these kernels fuse the bandwidth-bound row operations
where numpy pays multiple passes and temporaries per call.
"""

import numpy as np

from libc.math cimport exp, log, sqrt, tanh, pow

cdef double GELU_C = 0.7978845608028654
cdef double GELU_A = 0.044715


def softmax_rows(double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], k = x.shape[1]
    out_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double mx, s
    for i in range(n):
        mx = x[i, 0]
        for j in range(1, k):
            if x[i, j] > mx:
                mx = x[i, j]
        s = 0.0
        for j in range(k):
            out[i, j] = exp(x[i, j] - mx)
            s += out[i, j]
        for j in range(k):
            out[i, j] /= s
    return out_arr


def layer_norm_rows(double[:, ::1] x, double[::1] gain, double[::1] bias, double eps):
    cdef Py_ssize_t n = x.shape[0], k = x.shape[1]
    y_arr = np.empty((n, k), dtype=np.float64)
    mean_arr = np.empty(n, dtype=np.float64)
    rstd_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] y = y_arr
    cdef double[::1] mean = mean_arr
    cdef double[::1] rstd = rstd_arr
    cdef Py_ssize_t i, j
    cdef double mu, var, d, r
    for i in range(n):
        mu = 0.0
        for j in range(k):
            mu += x[i, j]
        mu /= k
        var = 0.0
        for j in range(k):
            d = x[i, j] - mu
            var += d * d
        var /= k
        r = 1.0 / sqrt(var + eps)
        mean[i] = mu
        rstd[i] = r
        for j in range(k):
            y[i, j] = gain[j] * ((x[i, j] - mu) * r) + bias[j]
    return y_arr, mean_arr, rstd_arr


def layer_norm_backward_rows(double[:, ::1] dy, double[:, ::1] x,
                             double[::1] gain, double[::1] mean, double[::1] rstd):
    cdef Py_ssize_t n = x.shape[0], k = x.shape[1]
    dx_arr = np.empty((n, k), dtype=np.float64)
    dgain_arr = np.zeros(k, dtype=np.float64)
    dbias_arr = np.zeros(k, dtype=np.float64)
    cdef double[:, ::1] dx = dx_arr
    cdef double[::1] dgain = dgain_arr
    cdef double[::1] dbias = dbias_arr
    cdef Py_ssize_t i, j
    cdef double xhat, dxhat, m1, m2, r
    for i in range(n):
        r = rstd[i]
        m1 = 0.0
        m2 = 0.0
        for j in range(k):
            xhat = (x[i, j] - mean[i]) * r
            dxhat = dy[i, j] * gain[j]
            dgain[j] += dy[i, j] * xhat
            dbias[j] += dy[i, j]
            m1 += dxhat
            m2 += dxhat * xhat
        m1 /= k
        m2 /= k
        for j in range(k):
            xhat = (x[i, j] - mean[i]) * r
            dxhat = dy[i, j] * gain[j]
            dx[i, j] = r * (dxhat - m1 - xhat * m2)
    return dx_arr, dgain_arr, dbias_arr


def cross_entropy_rows(double[:, ::1] logits, long[::1] targets):
    cdef Py_ssize_t n = logits.shape[0], k = logits.shape[1]
    losses_arr = np.empty(n, dtype=np.float64)
    dlogits_arr = np.empty((n, k), dtype=np.float64)
    cdef double[::1] losses = losses_arr
    cdef double[:, ::1] dlogits = dlogits_arr
    cdef Py_ssize_t i, j
    cdef long tgt
    cdef double mx, s
    for i in range(n):
        tgt = targets[i]
        mx = logits[i, 0]
        for j in range(1, k):
            if logits[i, j] > mx:
                mx = logits[i, j]
        s = 0.0
        for j in range(k):
            dlogits[i, j] = exp(logits[i, j] - mx)
            s += dlogits[i, j]
        losses[i] = log(s) - (logits[i, tgt] - mx)
        for j in range(k):
            dlogits[i, j] /= s
        dlogits[i, tgt] -= 1.0
    return losses_arr, dlogits_arr


def adam_update(double[::1] param, double[::1] grad, double[::1] m, double[::1] v,
                long t, double lr, double beta1, double beta2, double eps):
    cdef Py_ssize_t n = param.shape[0]
    cdef double bc1 = 1.0 - pow(beta1, t)
    cdef double bc2 = 1.0 - pow(beta2, t)
    cdef Py_ssize_t i
    cdef double g
    for i in range(n):
        g = grad[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * g
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
        param[i] -= lr * (m[i] / bc1) / (sqrt(v[i] / bc2) + eps)


def gelu_rows(double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], k = x.shape[1]
    out_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double v, inner
    for i in range(n):
        for j in range(k):
            v = x[i, j]
            inner = GELU_C * (v + GELU_A * v * v * v)
            out[i, j] = 0.5 * v * (1.0 + tanh(inner))
    return out_arr


def gelu_backward_rows(double[:, ::1] x, double[:, ::1] dy):
    cdef Py_ssize_t n = x.shape[0], k = x.shape[1]
    dx_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] dx = dx_arr
    cdef Py_ssize_t i, j
    cdef double v, inner, t, dinner
    for i in range(n):
        for j in range(k):
            v = x[i, j]
            inner = GELU_C * (v + GELU_A * v * v * v)
            t = tanh(inner)
            dinner = GELU_C * (1.0 + 3.0 * GELU_A * v * v)
            dx[i, j] = dy[i, j] * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * dinner)
    return dx_arr
