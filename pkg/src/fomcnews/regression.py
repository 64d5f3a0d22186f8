"""Ordinary least squares with White sandwich standard errors.

Shared by the surprise projection, the channel regressions, and the event
study. The design matrix is passed with its intercept column already in
place; nothing here adds one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InsufficientObservationsError, SingularDesignError

COND_WARN_THRESHOLD = 1e12


@dataclass
class OlsFit:
    coefficients: np.ndarray
    robust_cov: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r2: float
    n_obs: int
    df_resid: int
    hc: str = "HC1"


def ols_hc(X, y, hc: str = "HC1") -> OlsFit:
    """OLS of ``y`` on ``X`` with HC0 or HC1 sandwich covariance.

    HC1 applies the small-sample scaling T/(T-k). p-values use a Student-t
    reference with T-k degrees of freedom. Residual-free designs give zero
    standard errors and t-stats of 0 (coefficient exactly identified).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64).ravel()
    T, k = X.shape
    if y.shape[0] != T:
        raise ValueError(f"X has {T} rows but y has {y.shape[0]} entries")
    if hc not in ("HC0", "HC1"):
        raise ValueError(f"hc must be 'HC0' or 'HC1', got {hc!r}")
    if T <= k:
        raise InsufficientObservationsError(f"{T} observations for {k} parameters")
    if np.linalg.matrix_rank(X) < k:
        raise SingularDesignError("design matrix is rank deficient")

    cond = np.linalg.cond(X)
    if cond > COND_WARN_THRESHOLD:
        warnings.warn(f"design condition number {cond:.3g} exceeds "
                      f"{COND_WARN_THRESHOLD:.0e}", RuntimeWarning, stacklevel=2)

    q, r = np.linalg.qr(X)
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - X @ coef

    xtx_inv = np.linalg.solve(r.T @ r, np.eye(k))
    meat = (X * resid[:, None] ** 2).T @ X
    cov = xtx_inv @ meat @ xtx_inv
    if hc == "HC1":
        cov *= T / (T - k)
    cov = (cov + cov.T) / 2.0

    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0.0, coef / se, 0.0)
    p = 2.0 * stats.t.sf(np.abs(t), df=T - k)

    sst = np.sum((y - y.mean()) ** 2)
    ssr = np.sum(resid**2)
    if sst > 0.0:
        r2 = 1.0 - ssr / sst
    else:
        r2 = 1.0 if np.isclose(ssr, 0.0) else 0.0

    return OlsFit(coefficients=coef, robust_cov=cov, standard_errors=se,
                  t_stats=t, p_values=p, r2=float(r2), n_obs=T,
                  df_resid=T - k, hc=hc)


def significance_stars(p: float) -> str:
    """Table footer convention: *** p<0.01, ** p<0.05, * p<0.1."""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""
