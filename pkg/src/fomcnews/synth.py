"""Synthetic meeting panels with known ground truth, plus brute-force oracles.

The generator builds partially overlapping information sets for the two
corpora from a shared factor: with overlap ``rho``, embedding coordinate j
satisfies corr(X_fomc[:, j], X_nyt[:, j]) = rho. The policy rate loads on a
sparse coefficient vector through the FOMC embeddings; the public-side
coefficients are then pinned to ``rho * beta`` so that both expectation
equations hold with conditionally mean-zero errors. The expectation gap,
news, and monetary series are therefore known exactly:

    gap   = beta' X_fomc - rho * beta' X_nyt
    shock = zeta + theta * gap + nu
    news  = zeta + theta * gap,   monetary = nu
"""

from __future__ import annotations

import csv
import datetime
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .dataset import (AnalysisSample, DropReport, EmbeddingPanel, OutcomePanel,
                      ShockName, Source, TargetName)
from .elastic_net import PenaltySpec, objective_value

FFR_BASE = 8.0
RGDP_BASE = 250.0
CPI_BASE = 230.0

DEFAULT_OUTCOMES = {
    # name -> (gamma on monetary, mu on news, noise sd, fraction of sample missing at start)
    "Nominal 3 month": (0.6, 1.2, 0.05, 0.0),
    "Nominal 2 years": (1.1, 0.4, 0.05, 0.0),
    "Nominal 10 years": (0.6, -0.6, 0.05, 0.0),
    "TIPS Real 5 years": (0.9, -1.7, 0.05, 0.3),
}


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``rho`` is the correlation between the two sources' information sets.
    ``latent_rank`` caps the rank of the embedding matrices: coordinates are
    mixtures of that many latent factors, mimicking the sharply decaying
    spectrum of transformer document embeddings (and keeping the stage-2
    regressions from interpolating the target when d exceeds T). ``None``
    draws full-rank embeddings.
    """

    T: int = 106
    d: int = 768
    sparsity: int = 8
    noise_nyt: float = 0.05
    noise_fomc: float = 0.05
    noise_nu: float = 0.5
    theta: float = 0.5
    zeta: float = 0.0
    theta_channels: tuple[float, float] | None = None
    rho: float = 0.7
    latent_rank: int | None = 16
    seed: int = 0
    shock_name: ShockName = ShockName.PNS

    def __post_init__(self):
        if self.T < 8:
            raise ValueError(f"T must be >= 8, got {self.T}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        for name in ("noise_nyt", "noise_fomc", "noise_nu"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if not 1 <= self.sparsity <= self.d:
            raise ValueError("sparsity must be between 1 and d")
        if self.latent_rank is not None and not 1 <= self.latent_rank <= self.d:
            raise ValueError("latent_rank must be between 1 and d")


@dataclass
class SyntheticDataset:
    sample: AnalysisSample
    config: SynthConfig
    beta_fomc: dict[TargetName, np.ndarray]
    beta_nyt: dict[TargetName, np.ndarray]
    alpha: dict[TargetName, float]
    theta: dict[TargetName, float]
    zeta: float
    true_gap: dict[TargetName, np.ndarray]
    true_news: np.ndarray
    true_monetary: np.ndarray
    outcomes: OutcomePanel = field(default=None)
    outcome_truth: dict[str, tuple[float, float]] = field(default_factory=dict)


def meeting_calendar(T: int, start: datetime.date = datetime.date(2000, 1, 25),
                     spacing_days: int = 45) -> list[datetime.date]:
    """Evenly spaced synthetic FOMC-style meeting dates (about 8 per year)."""
    return [start + datetime.timedelta(days=spacing_days * i) for i in range(T)]


def _sparse_beta(rng: np.random.Generator, d: int, sparsity: int) -> np.ndarray:
    """Sparse unit-norm coefficient vector with clearly nonzero entries."""
    beta = np.zeros(d)
    support = rng.choice(d, size=sparsity, replace=False)
    vals = rng.normal(size=sparsity)
    vals += 0.5 * np.sign(vals)  # keep entries away from zero
    beta[support] = vals
    return beta / np.linalg.norm(beta)


def generate(config: SynthConfig) -> SyntheticDataset:
    """Draw one synthetic dataset; identical output for identical config."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    T, d, rho = config.T, config.d, config.rho

    r = config.latent_rank if config.latent_rank is not None else d
    # geometric factor-variance decay: the factor spectrum falls off the way
    # document-embedding spectra do, so shrinking a fit distorts its
    # direction instead of only rescaling it
    factor_sd = np.geomspace(1.0, 0.3, r) if config.latent_rank is not None else np.ones(r)
    shared = rng.normal(size=(T, r))
    Z_fomc = (np.sqrt(rho) * shared
              + np.sqrt(1.0 - rho) * rng.normal(size=(T, r))) * factor_sd
    Z_nyt = (np.sqrt(rho) * shared
             + np.sqrt(1.0 - rho) * rng.normal(size=(T, r))) * factor_sd
    if config.latent_rank is None:
        mix = np.eye(d)
    else:
        mix = rng.normal(size=(r, d)) / np.sqrt(r)
    X_fomc = Z_fomc @ mix
    X_nyt = Z_nyt @ mix

    beta_f: dict[TargetName, np.ndarray] = {}
    beta_n: dict[TargetName, np.ndarray] = {}
    alpha = {TargetName.FFR: FFR_BASE, TargetName.RGDP: RGDP_BASE,
             TargetName.CPI: CPI_BASE}
    targets: dict[TargetName, np.ndarray] = {}
    gaps: dict[TargetName, np.ndarray] = {}
    for t in TargetName:
        b = _sparse_beta(rng, d, config.sparsity)
        b /= np.linalg.norm(mix @ b)  # unit-variance expectation signal
        beta_f[t] = b
        beta_n[t] = rho * b
        eps = (config.noise_fomc * rng.normal(size=T)
               + config.noise_nyt * rng.normal(size=T))
        targets[t] = alpha[t] + X_fomc @ b + eps
        gaps[t] = X_fomc @ b - X_nyt @ beta_n[t]

    nu = config.noise_nu * rng.normal(size=T)
    if config.theta_channels is None:
        theta = {TargetName.FFR: config.theta}
        signal = config.theta * gaps[TargetName.FFR]
    else:
        t1, t2 = config.theta_channels
        theta = {TargetName.RGDP: t1, TargetName.CPI: t2}
        signal = t1 * gaps[TargetName.RGDP] + t2 * gaps[TargetName.CPI]
    news = config.zeta + signal
    shock = news + nu

    keys = tuple(meeting_calendar(T))
    sample = AnalysisSample(
        keys=keys, X_fomc=X_fomc, X_nyt=X_nyt, targets=targets,
        shock=shock, shock_name=config.shock_name, drop_report=DropReport())

    outcome_cols: dict[str, dict[datetime.date, float]] = {}
    outcome_truth: dict[str, tuple[float, float]] = {}
    for name, (gamma, mu, noise, missing_frac) in DEFAULT_OUTCOMES.items():
        vals = gamma * nu + mu * news + noise * rng.normal(size=T)
        start = int(round(missing_frac * T))
        outcome_cols[name] = {k: float(v) for k, v in zip(keys[start:], vals[start:])}
        outcome_truth[name] = (gamma, mu)

    return SyntheticDataset(
        sample=sample, config=config, beta_fomc=beta_f, beta_nyt=beta_n,
        alpha=alpha, theta=theta, zeta=config.zeta, true_gap=gaps,
        true_news=news, true_monetary=nu,
        outcomes=OutcomePanel(columns=outcome_cols), outcome_truth=outcome_truth)


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def write_dataset(ds: SyntheticDataset, outdir) -> dict[str, str]:
    """Write the dataset in the pipeline's input CSV formats.

    Requires d=768 (the embeddings file format is fixed-width). Returns the
    mapping of logical name -> path.
    """
    d = ds.config.d
    if d != 768:
        raise ValueError(f"embedding CSV format requires d=768, got {d}")
    os.makedirs(outdir, exist_ok=True)
    paths = {name: os.path.join(outdir, f"{name}.csv")
             for name in ("embeddings", "targets", "shocks", "outcomes", "monthly")}

    sample = ds.sample
    with open(paths["embeddings"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "source"] + [f"e{i}" for i in range(d)])
        for source, X in ((Source.FOMC, sample.X_fomc), (Source.NYT, sample.X_nyt)):
            for key, row in zip(sample.keys, X):
                w.writerow([key.isoformat(), source.value] + [_fmt(v) for v in row])

    with open(paths["targets"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "ffr", "rgdp", "cpi"])
        for i, key in enumerate(sample.keys):
            w.writerow([key.isoformat()] + [_fmt(sample.targets[t][i])
                                            for t in TargetName])

    with open(paths["shocks"], "w", newline="") as fh:
        fh.write("# units: percent\n")
        w = csv.writer(fh)
        w.writerow(["date", "pns", "ffr_surprise", "ff4"])
        col = {s: i for i, s in enumerate(ShockName)}[sample.shock_name]
        for i, key in enumerate(sample.keys):
            cells = ["", "", ""]
            cells[col] = _fmt(sample.shock[i])
            w.writerow([key.isoformat()] + cells)

    names = ds.outcomes.names()
    with open(paths["outcomes"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date"] + names)
        for key in sample.keys:
            w.writerow([key.isoformat()]
                       + [_fmt(ds.outcomes.columns[n][key])
                          if key in ds.outcomes.columns[n] else ""
                          for n in names])

    _write_monthly(ds, paths["monthly"])
    return paths


def _month_range(first: datetime.date, last: datetime.date) -> list[tuple[int, int]]:
    months = []
    y, m = first.year, first.month
    while (y, m) <= (last.year, last.month):
        months.append((y, m))
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return months


def _write_monthly(ds: SyntheticDataset, path) -> None:
    """Synthetic monthly macro panel whose variables respond to the monthly
    sum of the true monetary component (gives the VAR a known signal)."""
    sample = ds.sample
    months = _month_range(sample.keys[0], sample.keys[-1])
    monthly_shock = {ym: 0.0 for ym in months}
    for key, v in zip(sample.keys, ds.true_monetary):
        monthly_shock[(key.year, key.month)] += float(v)

    rng = np.random.default_rng(np.random.SeedSequence((ds.config.seed, 77)))
    loadings = {"ip_growth": -0.4, "cpi_inflation": -0.2, "ebp": 0.3}
    ar = {"ip_growth": 0.3, "cpi_inflation": 0.5, "ebp": 0.7}
    series = {name: [] for name in loadings}
    state = {name: 0.0 for name in loadings}
    for ym in months:
        for name in loadings:
            state[name] = (ar[name] * state[name]
                           + loadings[name] * monthly_shock[ym]
                           + 0.2 * rng.normal())
            series[name].append(state[name])

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["month", "ip_growth", "cpi_inflation", "ebp"])
        for i, (y, m) in enumerate(months):
            w.writerow([f"{y:04d}-{m:02d}"] + [_fmt(series[n][i]) for n in loadings])


def write_ground_truth(ds: SyntheticDataset, path) -> None:
    truth = {
        "theta": {t.value: v for t, v in ds.theta.items()},
        "zeta": ds.zeta,
        "seed": ds.config.seed,
        "T": ds.config.T,
        "d": ds.config.d,
        "rho": ds.config.rho,
        "outcome_truth": ds.outcome_truth,
    }
    with open(path, "w") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")


def brute_force_elastic_net(X, y, penalty: PenaltySpec, fit_intercept: bool = False,
                            penalize_intercept: bool = False,
                            step: float = 1e-3) -> np.ndarray:
    """Oracle minimizer of the raw penalized objective by dense grid search.

    Searches nested dense grids over the coefficient box bracketing the
    least-squares solution, refining until the lattice spacing reaches
    ``step`` (default 1e-3); the returned vector is the best point of the
    final exact-``step`` lattice. The intercept, when requested, is profiled
    out in closed form at every grid point, so only ``d`` dimensions are
    searched. Refuses d > 3 or T > 10 (cost guard).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64).ravel()
    T, d = X.shape
    if d > 3:
        raise ValueError(f"brute force limited to d <= 3, got {d}")
    if T > 10:
        raise ValueError(f"brute force limited to T <= 10, got {T}")

    lam, eta = penalty.lam, penalty.eta
    b_ols = np.linalg.lstsq(X, y, rcond=None)[0]
    lo = np.minimum(0.0, b_ols) - (1.0 + np.abs(b_ols))
    hi = np.maximum(0.0, b_ols) + (1.0 + np.abs(b_ols))

    def evaluate(grid_1d: list[np.ndarray]) -> tuple[np.ndarray, float]:
        mesh = np.meshgrid(*grid_1d, indexing="ij")
        B = np.stack([m.ravel() for m in mesh], axis=1)
        resid = y[None, :] - B @ X.T
        if fit_intercept:
            if penalize_intercept:
                s = resid.sum(axis=1)
                z = np.maximum(np.abs(s) - lam * eta / 2.0, 0.0)
                a = np.sign(s) * z / (T + lam * (1.0 - eta))
            else:
                a = resid.mean(axis=1)
            resid = resid - a[:, None]
        obj = (resid**2).sum(axis=1)
        obj += lam * eta * np.abs(B).sum(axis=1)
        obj += lam * (1.0 - eta) * (B**2).sum(axis=1)
        if fit_intercept and penalize_intercept:
            obj += lam * eta * np.abs(a) + lam * (1.0 - eta) * a**2
        i = int(np.argmin(obj))
        return B[i], float(obj[i])

    n_pts = 33
    for _ in range(200):
        width = float(np.max(hi - lo))
        cur_step = width / (n_pts - 1)
        grids = [np.linspace(lo[j], hi[j], n_pts) for j in range(d)]
        best, _ = evaluate(grids)
        on_edge = (np.isclose(best, lo) | np.isclose(best, hi))
        if on_edge.any():
            span = hi - lo
            lo = np.where(on_edge, lo - span, lo)
            hi = np.where(on_edge, hi + span, hi)
            continue
        if cur_step <= step:
            break
        half = 2.0 * cur_step
        lo = best - half
        hi = best + half

    # final pass: exact-`step` lattice bracketing the refined point
    final = [best[j] + step * np.arange(-3, 4) for j in range(d)]
    best, _ = evaluate(final)
    return best


def brute_force_objective(X, y, coefficients, penalty: PenaltySpec,
                          fit_intercept: bool = False,
                          penalize_intercept: bool = False) -> float:
    """Objective value with the intercept profiled out (oracle companion)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64).ravel()
    resid = y - X @ np.asarray(coefficients, dtype=np.float64)
    alpha = 0.0
    if fit_intercept:
        if penalize_intercept:
            lam, eta = penalty.lam, penalty.eta
            s = resid.sum()
            alpha = np.sign(s) * max(abs(s) - lam * eta / 2.0, 0.0) / (len(y) + lam * (1.0 - eta))
        else:
            alpha = resid.mean()
    return objective_value(X, y, alpha, np.asarray(coefficients), penalty,
                           penalize_intercept=penalize_intercept)
