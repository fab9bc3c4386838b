"""Pure numpy backend for the Gaussian kernels.

Reference implementation: the Cython backend must agree with these
results to float precision (summation order may differ by a few ulps).
"""

import numpy as np

LOG_TWO_PI = 1.8378770664093453


def log_density_table(x, means, variances, log_floor):
    """Per-class per-feature Gaussian log densities, floored at ``log_floor``.

    Returns ``(table, n_clamped)`` where ``table[c, j] = log N(x[j];
    means[c, j], variances[c, j])`` and ``n_clamped`` counts entries that
    were non-finite or below the floor and got raised to it.
    """
    x = np.asarray(x, dtype=np.float64)
    z = x[None, :] - means
    table = -0.5 * (LOG_TWO_PI + np.log(variances)) - 0.5 * z * z / variances
    bad = ~np.isfinite(table) | (table < log_floor)
    n_clamped = int(bad.sum())
    if n_clamped:
        table = np.where(bad, log_floor, table)
    return table, n_clamped


def _logsumexp(a, axis=None):
    a = np.asarray(a)
    if axis is None:
        m = float(np.max(a))
        return m + float(np.log(np.sum(np.exp(a - m))))
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def per_feature_woe(table, log_priors, u_idx, v_idx):
    """Per-feature weight of evidence of class set U against class set V.

    ``table`` is a (k, d) log-density table; each side's likelihood is the
    prior-weighted mixture over its class set, so column j yields
    ``log P(x_j | y in U) - log P(x_j | y in V)``.
    """
    table = np.asarray(table, dtype=np.float64)
    log_priors = np.asarray(log_priors, dtype=np.float64)
    u_idx = np.asarray(u_idx, dtype=np.intp)
    v_idx = np.asarray(v_idx, dtype=np.intp)
    ll_u = _side_log_mixture(table, log_priors, u_idx)
    ll_v = _side_log_mixture(table, log_priors, v_idx)
    return ll_u - ll_v


def _side_log_mixture(table, log_priors, idx):
    weighted = table[idx, :] + log_priors[idx][:, None]
    return _logsumexp(weighted, axis=0) - _logsumexp(log_priors[idx])
