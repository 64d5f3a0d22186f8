"""CSV and aligned-text renderers for the pipeline's output artifacts.

Column layouts are part of the package contract (consumers parse them):

* stage-3 summary:  subsample,shock,r2,theta,se,t,p
* stage-2 summary:  subsample,shock,eta_nyt,lambda_nyt,r2_nyt,eta_fomc,lambda_fomc,r2_fomc
* series:           date,shock,news,monetary
* event study:      outcome,beta,beta_se,beta_stars,gamma,gamma_se,gamma_stars,mu,mu_se,mu_stars,n_obs
* channels:         subsample,shock,r2,theta_rgdp,p_rgdp,theta_cpi,p_cpi
* impulse responses: variable,horizon,median,lo66,hi66,lo90,hi90

Floats are written with repr-exact precision in the series file (downstream
stages re-read it) and 10 significant digits elsewhere; both are
deterministic, so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import datetime

import numpy as np

from .bvar import IrfResult
from .dataset import TargetName
from .decomposition import ChannelResult, DecompositionResult
from .event_study import EventStudyRow

STAGE3_COLUMNS = ["subsample", "shock", "r2", "theta", "se", "t", "p"]
STAGE2_COLUMNS = ["subsample", "shock", "eta_nyt", "lambda_nyt", "r2_nyt",
                  "eta_fomc", "lambda_fomc", "r2_fomc"]
SERIES_COLUMNS = ["date", "shock", "news", "monetary"]
EVENT_STUDY_COLUMNS = ["outcome", "beta", "beta_se", "beta_stars",
                       "gamma", "gamma_se", "gamma_stars",
                       "mu", "mu_se", "mu_stars", "n_obs"]
CHANNELS_COLUMNS = ["subsample", "shock", "r2", "theta_rgdp", "p_rgdp",
                    "theta_cpi", "p_cpi"]
IRF_COLUMNS = ["variable", "horizon", "median", "lo66", "hi66", "lo90", "hi90"]


def fmt(x: float) -> str:
    return format(float(x), ".10g")


def fmt_exact(x: float) -> str:
    return format(float(x), ".17g")


def write_stage3_csv(path, subsample: str, result: DecompositionResult) -> None:
    ols = result.stage3.ols
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STAGE3_COLUMNS)
        w.writerow([subsample, result.shock_name.value, fmt(result.stage3.r2),
                    fmt(result.stage3.theta), fmt(ols.standard_errors[1]),
                    fmt(ols.t_stats[1]), fmt(ols.p_values[1])])


def write_stage2_csv(path, subsample: str, result: DecompositionResult) -> None:
    from .dataset import Source

    nyt = result.selected[Source.NYT]
    fomc = result.selected[Source.FOMC]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STAGE2_COLUMNS)
        w.writerow([subsample, result.shock_name.value,
                    fmt(nyt.eta), fmt(nyt.lam),
                    fmt(result.models[Source.NYT].stage2_r2),
                    fmt(fomc.eta), fmt(fomc.lam),
                    fmt(result.models[Source.FOMC].stage2_r2)])


def write_series_csv(path, keys, shock, news, monetary) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        for k, s, n, m in zip(keys, shock, news, monetary):
            w.writerow([k.isoformat(), fmt_exact(s), fmt_exact(n), fmt_exact(m)])


def read_series_csv(path):
    """Read back a series file: (keys, shock, news, monetary)."""
    from .errors import ParseError

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != SERIES_COLUMNS:
        raise ParseError(f"{path}: not a decomposition series file")
    keys, cols = [], ([], [], [])
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise ParseError(f"{path}, line {lineno}: expected 4 fields")
        try:
            keys.append(datetime.date.fromisoformat(row[0]))
            for c, cell in zip(cols, row[1:]):
                c.append(float(cell))
        except ValueError as exc:
            raise ParseError(f"{path}, line {lineno}: {exc}") from None
    return (tuple(keys),) + tuple(np.array(c) for c in cols)


def write_event_study_csv(path, rows: list[EventStudyRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_STUDY_COLUMNS)
        for r in rows:
            w.writerow([r.outcome, fmt(r.beta), fmt(r.beta_se), r.beta_stars,
                        fmt(r.gamma), fmt(r.gamma_se), r.gamma_stars,
                        fmt(r.mu), fmt(r.mu_se), r.mu_stars, r.n_obs])


def write_channels_csv(path, subsample: str, result: ChannelResult) -> None:
    header = ["subsample", "shock", "r2"]
    cells = [subsample, result.shock_name.value, fmt(result.r2)]
    for t in result.targets:
        header += [f"theta_{t.value}", f"p_{t.value}"]
        cells += [fmt(result.theta(t)), fmt(result.p_value(t))]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerow(cells)


def write_irf_csv(path, irf: IrfResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(IRF_COLUMNS)
        for vi, name in enumerate(irf.variables):
            for h in irf.horizons:
                w.writerow([name, int(h), fmt(irf.median[vi, h]),
                            fmt(irf.lo66[vi, h]), fmt(irf.hi66[vi, h]),
                            fmt(irf.lo90[vi, h]), fmt(irf.hi90[vi, h])])


def render_event_study_text(rows: list[EventStudyRow], shock_label: str) -> str:
    """Aligned text block: coefficient with stars, parenthesized SE below, N."""
    headers = ["", shock_label, "Monetary", "News", "Observations"]
    lines = [headers]
    for r in rows:
        lines.append([r.outcome,
                      f"{r.beta:.3f}{r.beta_stars}",
                      f"{r.gamma:.3f}{r.gamma_stars}",
                      f"{r.mu:.3f}{r.mu_stars}",
                      str(r.n_obs)])
        lines.append(["", f"({r.beta_se:.3f})", f"({r.gamma_se:.3f})",
                      f"({r.mu_se:.3f})", ""])
    widths = [max(len(row[i]) for row in lines) for i in range(5)]
    out = []
    for row in lines:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    out.append("")
    out.append("Robust standard errors in parentheses")
    out.append("*** p<0.01, ** p<0.05, * p<0.1")
    return "\n".join(out) + "\n"


def render_stage_summary_text(stage3_row: dict, stage2_row: dict) -> str:
    lines = ["Surprise projection (stage 3)",
             "  " + ", ".join(f"{k}={v}" for k, v in stage3_row.items()),
             "Selected expectation models (stage 2)",
             "  " + ", ".join(f"{k}={v}" for k, v in stage2_row.items())]
    return "\n".join(lines) + "\n"
