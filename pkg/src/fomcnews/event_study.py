"""Daily-rate event study: responses to the raw surprise and its components.

For each outcome series (a daily change in a nominal or TIPS yield around
the announcement) two equations are estimated on the same rows:

    change_t = a0 + beta  * shock_t                       + e_t
    change_t = a1 + gamma * monetary_t + mu * news_t      + eps_t

Comparing beta with gamma shows how purging the surprise of its news content
changes the measured pass-through. Rows are deleted listwise per outcome
(TIPS series start later), identically for both equations.
"""

from __future__ import annotations

import datetime
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import OutcomePanel
from .regression import ols_hc, significance_stars

MIN_OBS = 4


@dataclass
class EventStudyRow:
    outcome: str
    n_obs: int
    beta: float
    beta_se: float
    beta_stars: str
    gamma: float
    gamma_se: float
    gamma_stars: str
    mu: float
    mu_se: float
    mu_stars: str
    beta_p: float
    gamma_p: float
    mu_p: float


def run_event_study(outcomes: OutcomePanel, keys, shock, news, monetary,
                    hc: str = "HC1") -> list[EventStudyRow]:
    """Estimate both equations per outcome; outcomes with fewer than
    ``MIN_OBS`` present meetings are skipped with a warning."""
    keys = list(keys)
    shock = np.asarray(shock, dtype=float).ravel()
    news = np.asarray(news, dtype=float).ravel()
    monetary = np.asarray(monetary, dtype=float).ravel()
    if not shock.shape[0] == news.shape[0] == monetary.shape[0] == len(keys):
        raise ValueError("component series are not aligned with keys")

    rows = []
    for name in outcomes.names():
        col = outcomes.columns[name]
        idx = [i for i, k in enumerate(keys) if k in col]
        if len(idx) < MIN_OBS:
            warnings.warn(f"outcome {name!r} skipped: only {len(idx)} "
                          f"observations", stacklevel=2)
            continue
        y = np.array([col[keys[i]] for i in idx])
        s, n, m = shock[idx], news[idx], monetary[idx]

        eq5 = ols_hc(np.column_stack([np.ones_like(s), s]), y, hc=hc)
        eq6 = ols_hc(np.column_stack([np.ones_like(s), m, n]), y, hc=hc)

        rows.append(EventStudyRow(
            outcome=name, n_obs=len(idx),
            beta=float(eq5.coefficients[1]), beta_se=float(eq5.standard_errors[1]),
            beta_stars=significance_stars(eq5.p_values[1]),
            gamma=float(eq6.coefficients[1]), gamma_se=float(eq6.standard_errors[1]),
            gamma_stars=significance_stars(eq6.p_values[1]),
            mu=float(eq6.coefficients[2]), mu_se=float(eq6.standard_errors[2]),
            mu_stars=significance_stars(eq6.p_values[2]),
            beta_p=float(eq5.p_values[1]), gamma_p=float(eq6.p_values[1]),
            mu_p=float(eq6.p_values[2])))
    return rows
