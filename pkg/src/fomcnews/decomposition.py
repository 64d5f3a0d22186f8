"""Stages 2 and 3: expectation models, the expectation gap, and the split of
high-frequency surprises into news and monetary components.

Stage 2 fits one penalized regression of the target (the policy rate, or a
macro aggregate for the channel analysis) on each corpus' embeddings. The
gap between the two fitted expectation series is the candidate driver of
announcement-window surprises; stage 3 projects the surprise onto the gap,

    surprise_t = zeta + theta * gap_t + nu_t,

and hyperparameters for both corpora are chosen to maximize the stage-3 R^2
over a Cartesian grid. Fitted values are the news series, residuals the
monetary series, so news + monetary = surprise exactly by construction.

Tuning both corpora at once costs |grid|^2 cells but only 2*|grid| penalized
fits: stage-2 fits are cached per (source, eta, lambda) and each cell's R^2
is the squared correlation between the surprise and a difference of cached
fitted-value rows, evaluated with vectorized covariance algebra.
"""

from __future__ import annotations

import datetime
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import elastic_net
from .dataset import AnalysisSample, ShockName, Source, TargetName
from .elastic_net import ElasticNetFit, PenaltySpec
from .errors import DegenerateRegressorError, NoValidCellError
from .regression import OlsFit, ols_hc

DEGENERATE_VAR = 1e-12

DEFAULT_ETAS = tuple(round(0.05 * i, 2) for i in range(1, 21))


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter grid: eta values are shared across sources; each
    source's lambda ladder is geometric from ``lambda_min_ratio * lambda_max``
    up to its own lasso ``lambda_max`` (computed at eta=1), unless an explicit
    ladder is given."""

    etas: tuple[float, ...] = DEFAULT_ETAS
    n_lambdas: int = 25
    lambda_min_ratio: float = 1e-3
    lambdas: tuple[float, ...] | None = None
    fit_intercept: bool = True
    standardize: bool = True

    def __post_init__(self):
        if not self.etas:
            raise ValueError("grid needs at least one eta")
        if self.lambdas is not None and not self.lambdas:
            raise ValueError("explicit lambda ladder must be nonempty")
        if self.lambdas is None and self.n_lambdas < 1:
            raise ValueError("n_lambdas must be >= 1")

    def lambda_ladder(self, X, y) -> np.ndarray:
        """Descending lambda grid for one source (largest first)."""
        if self.lambdas is not None:
            return np.sort(np.asarray(self.lambdas, dtype=float))[::-1]
        lmax = elastic_net.lambda_max(X, y, eta=1.0, fit_intercept=self.fit_intercept,
                                      standardize=self.standardize)
        if lmax <= 0.0:
            return np.zeros(1)
        if self.n_lambdas == 1:
            return np.array([lmax])
        return np.geomspace(lmax, lmax * self.lambda_min_ratio, self.n_lambdas)


@dataclass
class ExpectationModel:
    source: Source
    target: TargetName
    fit: ElasticNetFit
    stage2_r2: float


@dataclass
class GapSeries:
    """Fitted FOMC expectation minus fitted public expectation, per meeting."""

    keys: tuple[datetime.date, ...]
    values: np.ndarray
    target: TargetName

    def as_dict(self) -> dict[datetime.date, float]:
        return {k: float(v) for k, v in zip(self.keys, self.values)}


@dataclass
class Stage3Fit:
    ols: OlsFit

    @property
    def zeta(self) -> float:
        return float(self.ols.coefficients[0])

    @property
    def theta(self) -> float:
        return float(self.ols.coefficients[1])

    @property
    def r2(self) -> float:
        return self.ols.r2


@dataclass
class GridSurface:
    """Stage-3 R^2 over the product grid; NaN marks degenerate-gap cells."""

    nyt_cells: tuple[PenaltySpec, ...]
    fomc_cells: tuple[PenaltySpec, ...]
    r2: np.ndarray

    def __getitem__(self, key) -> float:
        eta_n, lam_n, eta_f, lam_f = key
        i = self.nyt_cells.index(PenaltySpec(lam_n, eta_n))
        j = self.fomc_cells.index(PenaltySpec(lam_f, eta_f))
        return float(self.r2[i, j])

    def argmax(self) -> tuple[int, int]:
        if not np.any(np.isfinite(self.r2)):
            raise NoValidCellError("every grid cell produced a degenerate gap")
        flat = np.nanargmax(self.r2)
        return np.unravel_index(flat, self.r2.shape)

    @property
    def n_valid(self) -> int:
        return int(np.isfinite(self.r2).sum())


@dataclass
class DecompositionResult:
    selected: dict[Source, PenaltySpec]
    models: dict[Source, ExpectationModel]
    stage3: Stage3Fit
    news: np.ndarray
    monetary: np.ndarray
    keys: tuple[datetime.date, ...]
    grid_surface: GridSurface
    shock_name: ShockName
    search: str = "joint"


@dataclass
class ChannelResult:
    """Multi-gap stage 3 (one expectation gap per macro target)."""

    targets: tuple[TargetName, ...]
    selected: dict[TargetName, dict[Source, PenaltySpec]]
    models: dict[TargetName, dict[Source, ExpectationModel]]
    gaps: dict[TargetName, np.ndarray]
    ols: OlsFit
    keys: tuple[datetime.date, ...]
    shock_name: ShockName

    @property
    def r2(self) -> float:
        return self.ols.r2

    def theta(self, target: TargetName) -> float:
        return float(self.ols.coefficients[1 + self.targets.index(target)])

    def p_value(self, target: TargetName) -> float:
        return float(self.ols.p_values[1 + self.targets.index(target)])


def _source_matrix(sample: AnalysisSample, source: Source) -> np.ndarray:
    return sample.X_fomc if source is Source.FOMC else sample.X_nyt


def fit_expectation(sample: AnalysisSample, source: Source, target: TargetName,
                    penalty: PenaltySpec, fit_intercept: bool = True,
                    standardize: bool = True,
                    warm_start: np.ndarray | None = None) -> ExpectationModel:
    """Penalized regression of the target on one corpus' embeddings."""
    if target not in sample.targets:
        raise ValueError(f"sample has no target {target.value!r}")
    fit = elastic_net.fit(_source_matrix(sample, source), sample.targets[target],
                          penalty, fit_intercept=fit_intercept,
                          standardize=standardize, warm_start=warm_start)
    return ExpectationModel(source=source, target=target, fit=fit,
                            stage2_r2=fit.in_sample_r2)


def expectation_gap(model_fomc: ExpectationModel, model_nyt: ExpectationModel,
                    sample: AnalysisSample) -> GapSeries:
    """fitted(FOMC) - fitted(NYT): the difference in proxy expectations
    attributable to differences in information."""
    if model_fomc.target is not model_nyt.target:
        raise ValueError("expectation models have different targets")
    fitted_f = elastic_net.predict(model_fomc.fit, sample.X_fomc)
    fitted_n = elastic_net.predict(model_nyt.fit, sample.X_nyt)
    return GapSeries(keys=sample.keys, values=fitted_f - fitted_n,
                     target=model_fomc.target)


def stage3_project(gap: GapSeries | np.ndarray, shock: np.ndarray,
                   hc: str = "HC1") -> Stage3Fit:
    """OLS of the surprise on [1, gap] with robust errors.

    A (numerically) zero-variance gap signals an under- or over-fit stage 2
    and raises rather than producing a spurious fit.
    """
    g = gap.values if isinstance(gap, GapSeries) else np.asarray(gap, dtype=float)
    shock = np.asarray(shock, dtype=float).ravel()
    if np.var(g) < DEGENERATE_VAR:
        raise DegenerateRegressorError(
            "expectation gap has (numerically) zero variance")
    X = np.column_stack([np.ones_like(g), g])
    return Stage3Fit(ols=ols_hc(X, shock, hc=hc))


def decompose(stage3: Stage3Fit, gap: GapSeries | np.ndarray, shock: np.ndarray,
              demean_news: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Split the surprise into fitted news and residual monetary series.

    ``demean_news=True`` drops the intercept from the news series (a
    zero-mean variant); additivity news + monetary = shock then holds only
    up to the constant zeta.
    """
    g = gap.values if isinstance(gap, GapSeries) else np.asarray(gap, dtype=float)
    shock = np.asarray(shock, dtype=float).ravel()
    if g.shape[0] != shock.shape[0]:
        raise ValueError("gap and shock lengths differ")
    news = stage3.theta * g
    if not demean_news:
        news = news + stage3.zeta
    return news, shock - news


def _fit_path(X, y, etas, ladder, fit_intercept, standardize):
    """Fit every (eta, lambda) cell for one source, warm-starting down each
    eta's lambda ladder. Returns {(eta, lam): ElasticNetFit}."""
    fits = {}
    for eta in etas:
        warm = None
        for lam in ladder:
            fit = elastic_net.fit(X, y, PenaltySpec(float(lam), float(eta)),
                                  fit_intercept=fit_intercept,
                                  standardize=standardize, warm_start=warm)
            warm = fit.coefficients
            fits[(float(eta), float(lam))] = fit
    return fits


def _stage2_fits(sample: AnalysisSample, target: TargetName, grid: GridSpec,
                 warm_start: bool = True, jobs: int = 1
                 ) -> dict[Source, dict[tuple[float, float], ElasticNetFit]]:
    """Pre-pass populating the stage-2 cache for both sources."""
    y = sample.targets[target]
    tasks = []
    for source in (Source.NYT, Source.FOMC):
        X = _source_matrix(sample, source)
        ladder = grid.lambda_ladder(X, y)
        if warm_start:
            tasks.append((source, X, tuple(grid.etas), ladder))
        else:
            tasks.extend((source, X, (eta,), ladder) for eta in grid.etas)

    results: dict[Source, dict] = {Source.NYT: {}, Source.FOMC: {}}

    def run(task):
        source, X, etas, ladder = task
        return source, _fit_path(X, y, etas, ladder, grid.fit_intercept,
                                 grid.standardize)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for source, fits in pool.map(run, tasks):
                results[source].update(fits)
    else:
        for task in tasks:
            source, fits = run(task)
            results[source].update(fits)
    return results


def _cells_and_fitted(sample, source, fits, grid):
    """Deterministic cell order (eta-major, lambda descending) and the matrix
    of fitted-value rows."""
    X = _source_matrix(sample, source)
    cells = []
    rows = []
    for (eta, lam), fit in sorted(fits.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
        cells.append(PenaltySpec(lam, eta))
        rows.append(elastic_net.predict(fit, X))
    return tuple(cells), np.vstack(rows)


def _surface(fitted_nyt, fitted_fomc, shock) -> np.ndarray:
    """R^2 of shock on [1, fomc_row - nyt_row] for every pair of rows."""
    T = shock.shape[0]
    s = shock - shock.mean()
    var_s = s @ s / T
    N = fitted_nyt - fitted_nyt.mean(axis=1, keepdims=True)
    F = fitted_fomc - fitted_fomc.mean(axis=1, keepdims=True)
    cov_sn = N @ s / T
    cov_sf = F @ s / T
    var_n = np.einsum("ij,ij->i", N, N) / T
    var_f = np.einsum("ij,ij->i", F, F) / T
    cross = (N @ F.T) / T
    var_gap = var_n[:, None] + var_f[None, :] - 2.0 * cross
    cov_gap = cov_sf[None, :] - cov_sn[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = cov_gap**2 / (var_gap * var_s)
    r2[var_gap < DEGENERATE_VAR] = np.nan
    return r2


def grid_search(sample: AnalysisSample, grid: GridSpec = GridSpec(),
                target: TargetName = TargetName.FFR,
                shock_name: ShockName | None = None, search: str = "joint",
                hc: str = "HC1", use_cache: bool = True, warm_start: bool = True,
                jobs: int = 1) -> DecompositionResult:
    """Select (eta, lambda) per corpus by maximizing stage-3 R^2, then project
    and decompose the surprise at the selected cell.

    ``search='joint'`` takes the argmax over the full product grid (ties
    break to the first cell in eta-major, lambda-descending order).
    ``search='independent'`` tunes each corpus separately by the R^2 of the
    surprise on that corpus' fitted values alone, then forms the gap from the
    two winners. With ``use_cache=False`` each cell refits its stage-2 pair
    instead of reusing the shared cache (slow; for verification).
    """
    if shock_name is not None and shock_name is not sample.shock_name:
        raise ValueError(f"sample carries shock {sample.shock_name.value!r}, "
                         f"not {shock_name.value!r}")
    if search not in ("joint", "independent"):
        raise ValueError(f"search must be 'joint' or 'independent', got {search!r}")
    shock = sample.shock
    if np.var(shock) < DEGENERATE_VAR:
        raise DegenerateRegressorError("shock series has zero variance")

    fits = _stage2_fits(sample, target, grid, warm_start=warm_start, jobs=jobs)
    nyt_cells, fitted_n = _cells_and_fitted(sample, Source.NYT, fits[Source.NYT], grid)
    fomc_cells, fitted_f = _cells_and_fitted(sample, Source.FOMC, fits[Source.FOMC], grid)

    if use_cache:
        r2 = _surface(fitted_n, fitted_f, shock)
    else:
        r2 = np.empty((len(nyt_cells), len(fomc_cells)))
        for i, pn in enumerate(nyt_cells):
            for j, pf in enumerate(fomc_cells):
                mn = fit_expectation(sample, Source.NYT, target, pn,
                                     grid.fit_intercept, grid.standardize)
                mf = fit_expectation(sample, Source.FOMC, target, pf,
                                     grid.fit_intercept, grid.standardize)
                gap = expectation_gap(mf, mn, sample).values
                if np.var(gap) < DEGENERATE_VAR:
                    r2[i, j] = np.nan
                    continue
                gc = gap - gap.mean()
                sc = shock - shock.mean()
                r2[i, j] = (gc @ sc) ** 2 / ((gc @ gc) * (sc @ sc))

    surface = GridSurface(nyt_cells=nyt_cells, fomc_cells=fomc_cells, r2=r2)

    if search == "joint":
        i, j = surface.argmax()
    else:
        i = _independent_pick(fitted_n, shock)
        j = _independent_pick(fitted_f, shock)

    selected = {Source.NYT: nyt_cells[i], Source.FOMC: fomc_cells[j]}
    models = {
        Source.NYT: ExpectationModel(
            Source.NYT, target, fits[Source.NYT][(nyt_cells[i].eta, nyt_cells[i].lam)],
            fits[Source.NYT][(nyt_cells[i].eta, nyt_cells[i].lam)].in_sample_r2),
        Source.FOMC: ExpectationModel(
            Source.FOMC, target, fits[Source.FOMC][(fomc_cells[j].eta, fomc_cells[j].lam)],
            fits[Source.FOMC][(fomc_cells[j].eta, fomc_cells[j].lam)].in_sample_r2),
    }
    gap = expectation_gap(models[Source.FOMC], models[Source.NYT], sample)
    stage3 = stage3_project(gap, shock, hc=hc)
    news, monetary = decompose(stage3, gap, shock)
    return DecompositionResult(selected=selected, models=models, stage3=stage3,
                               news=news, monetary=monetary, keys=sample.keys,
                               grid_surface=surface, shock_name=sample.shock_name,
                               search=search)


def _independent_pick(fitted_rows: np.ndarray, shock: np.ndarray) -> int:
    """Index of the row whose fitted values best explain the surprise alone."""
    s = shock - shock.mean()
    R = fitted_rows - fitted_rows.mean(axis=1, keepdims=True)
    var_r = np.einsum("ij,ij->i", R, R)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = (R @ s) ** 2 / (var_r * (s @ s))
    r2[var_r / shock.shape[0] < DEGENERATE_VAR] = np.nan
    if not np.any(np.isfinite(r2)):
        raise NoValidCellError("every cell produced degenerate fitted values")
    return int(np.nanargmax(r2))


def short_regression_diagnostic(sample: AnalysisSample, penalty_fomc: PenaltySpec,
                                target: TargetName = TargetName.FFR,
                                shock: np.ndarray | None = None,
                                fit_intercept: bool = True, standardize: bool = True,
                                hc: str = "HC1") -> OlsFit:
    """Regress the surprise on the fitted FOMC expectation alone.

    Omitting the public expectation leaves the comovement of the two
    information sets in the error term, so this slope is biased relative to
    the gap regression; reporting both side by side exhibits the bias.
    """
    model = fit_expectation(sample, Source.FOMC, target, penalty_fomc,
                            fit_intercept=fit_intercept, standardize=standardize)
    fitted = elastic_net.predict(model.fit, sample.X_fomc)
    if np.var(fitted) < DEGENERATE_VAR:
        raise DegenerateRegressorError("fitted FOMC expectation is constant")
    s = sample.shock if shock is None else np.asarray(shock, dtype=float).ravel()
    X = np.column_stack([np.ones_like(fitted), fitted])
    return ols_hc(X, s, hc=hc)


def channel_regression(sample: AnalysisSample,
                       targets: tuple[TargetName, ...] = (TargetName.RGDP,
                                                          TargetName.CPI),
                       grid: GridSpec = GridSpec(), hc: str = "HC1",
                       warm_start: bool = True, jobs: int = 1) -> ChannelResult:
    """Multi-gap projection: one expectation gap per macro target.

    Each target's (eta, lambda) pair per corpus is tuned by the univariate
    stage-3 R^2 of the surprise on that target's gap (the product search
    across targets would cost |grid|^4 fits); the reported coefficients come
    from the joint regression of the surprise on all selected gaps.
    """
    shock = sample.shock
    selected: dict[TargetName, dict[Source, PenaltySpec]] = {}
    models: dict[TargetName, dict[Source, ExpectationModel]] = {}
    gaps: dict[TargetName, np.ndarray] = {}
    for target in targets:
        if target not in sample.targets:
            raise ValueError(f"sample has no target {target.value!r}")
        fits = _stage2_fits(sample, target, grid, warm_start=warm_start, jobs=jobs)
        nyt_cells, fitted_n = _cells_and_fitted(sample, Source.NYT,
                                                fits[Source.NYT], grid)
        fomc_cells, fitted_f = _cells_and_fitted(sample, Source.FOMC,
                                                 fits[Source.FOMC], grid)
        surface = GridSurface(nyt_cells, fomc_cells,
                              _surface(fitted_n, fitted_f, shock))
        i, j = surface.argmax()
        selected[target] = {Source.NYT: nyt_cells[i], Source.FOMC: fomc_cells[j]}
        models[target] = {
            Source.NYT: ExpectationModel(
                Source.NYT, target,
                fits[Source.NYT][(nyt_cells[i].eta, nyt_cells[i].lam)],
                fits[Source.NYT][(nyt_cells[i].eta, nyt_cells[i].lam)].in_sample_r2),
            Source.FOMC: ExpectationModel(
                Source.FOMC, target,
                fits[Source.FOMC][(fomc_cells[j].eta, fomc_cells[j].lam)],
                fits[Source.FOMC][(fomc_cells[j].eta, fomc_cells[j].lam)].in_sample_r2),
        }
        gaps[target] = expectation_gap(models[target][Source.FOMC],
                                       models[target][Source.NYT], sample).values

    if all(np.var(g) < DEGENERATE_VAR for g in gaps.values()):
        raise DegenerateRegressorError("every channel gap is (numerically) constant")
    X = np.column_stack([np.ones(sample.n_meetings)] + [gaps[t] for t in targets])
    return ChannelResult(targets=tuple(targets), selected=selected, models=models,
                         gaps=gaps, ols=ols_hc(X, shock, hc=hc), keys=sample.keys,
                         shock_name=sample.shock_name)
