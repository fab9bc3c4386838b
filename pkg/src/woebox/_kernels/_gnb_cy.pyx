# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the Gaussian kernels. Mirrors ``_gnb_py``."""

from libc.math cimport exp, isfinite, log

import numpy as np

cdef double LOG_TWO_PI = 1.8378770664093453


def log_density_table(x, means, variances, double log_floor):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, ::1] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef const double[:, ::1] var = np.ascontiguousarray(variances, dtype=np.float64)
    cdef Py_ssize_t k = mu.shape[0], d = mu.shape[1]
    out = np.empty((k, d), dtype=np.float64)
    cdef double[:, ::1] t = out
    cdef Py_ssize_t c, j
    cdef double z, v, val
    cdef long n_clamped = 0
    for c in range(k):
        for j in range(d):
            v = var[c, j]
            z = xv[j] - mu[c, j]
            val = -0.5 * (LOG_TWO_PI + log(v)) - 0.5 * z * z / v
            if not isfinite(val) or val < log_floor:
                val = log_floor
                n_clamped += 1
            t[c, j] = val
    return out, int(n_clamped)


cdef double _prior_lse(const double[::1] log_priors, const Py_ssize_t[::1] idx):
    cdef Py_ssize_t i
    cdef double m = log_priors[idx[0]]
    cdef double s = 0.0
    for i in range(idx.shape[0]):
        if log_priors[idx[i]] > m:
            m = log_priors[idx[i]]
    for i in range(idx.shape[0]):
        s += exp(log_priors[idx[i]] - m)
    return m + log(s)


def per_feature_woe(table, log_priors, u_idx, v_idx):
    cdef const double[:, ::1] t = np.ascontiguousarray(table, dtype=np.float64)
    cdef const double[::1] lp = np.ascontiguousarray(log_priors, dtype=np.float64)
    cdef const Py_ssize_t[::1] ui = np.ascontiguousarray(u_idx, dtype=np.intp)
    cdef const Py_ssize_t[::1] vi = np.ascontiguousarray(v_idx, dtype=np.intp)
    cdef Py_ssize_t d = t.shape[1]
    out = np.empty(d, dtype=np.float64)
    cdef double[::1] w = out
    cdef double lse_u_prior = _prior_lse(lp, ui)
    cdef double lse_v_prior = _prior_lse(lp, vi)
    cdef Py_ssize_t i, j
    cdef double m, s, a, ll_u, ll_v
    for j in range(d):
        m = lp[ui[0]] + t[ui[0], j]
        for i in range(ui.shape[0]):
            a = lp[ui[i]] + t[ui[i], j]
            if a > m:
                m = a
        s = 0.0
        for i in range(ui.shape[0]):
            s += exp(lp[ui[i]] + t[ui[i], j] - m)
        ll_u = m + log(s) - lse_u_prior

        m = lp[vi[0]] + t[vi[0], j]
        for i in range(vi.shape[0]):
            a = lp[vi[i]] + t[vi[i], j]
            if a > m:
                m = a
        s = 0.0
        for i in range(vi.shape[0]):
            s += exp(lp[vi[i]] + t[vi[i], j] - m)
        ll_v = m + log(s) - lse_v_prior

        w[j] = ll_u - ll_v
    return out
