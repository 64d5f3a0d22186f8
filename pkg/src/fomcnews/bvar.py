"""Monthly VAR with exogenous shock regressors under a Minnesota prior.

The model is

    y_t = A_1 y_{t-1} + ... + A_p y_{t-p} + C x_t + c + eps_t

estimated equation by equation with a conjugate normal-inverse-gamma
posterior built from Minnesota dummy information: coefficients shrink toward
univariate dynamics (own first lag at ``own_mean``, zero elsewhere), with
prior standard deviations

    own lag l      : l1 / l^l3 * (s_i / s_i)
    cross lag l    : l1 * l2 / l^l3 * (s_i / s_j)
    exogenous      : l1 * l4 * s_i / s_x
    intercept      : l1 * l4 * s_i

where s_i are innovation scales from univariate AR residuals. The overall
tightness ``l1`` multiplies everything, so l1 -> 0 collapses the posterior
onto the prior mean while l1 -> inf reproduces equation-by-equation OLS.
Going equation by equation keeps the cross-variable tightness ``l2`` exact
(a single joint matric-variate posterior cannot carry an own/cross
distinction); innovation covariance draws are therefore diagonal, which the
exogenous-impulse responses never use off-diagonals of anyway.

Impulse responses propagate a one-standard-deviation exogenous impulse at
horizon 0 through C and the autoregressive polynomial, with pointwise
posterior quantile bands.
"""

from __future__ import annotations

import datetime
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .errors import InsufficientSampleError, ParseError, ValidationError

EXPLOSIVE_TOL = 1e-6


@dataclass(frozen=True)
class VarxSpec:
    endogenous: tuple[str, ...] = ("ip_growth", "cpi_inflation", "ebp")
    lags: int = 12
    exogenous: tuple[str, ...] = ("monetary",)
    intercept: bool = True

    def __post_init__(self):
        if self.lags < 1:
            raise ValueError("lags must be >= 1")
        if not self.endogenous:
            raise ValueError("need at least one endogenous series")

    @property
    def n(self) -> int:
        return len(self.endogenous)

    @property
    def m(self) -> int:
        return len(self.exogenous)

    @property
    def k(self) -> int:
        return self.n * self.lags + self.m + int(self.intercept)


@dataclass(frozen=True)
class MinnesotaPrior:
    own_mean: float = 0.0
    lambda1: float = 0.2
    lambda2: float = 0.5
    lambda3: float = 1.0
    lambda4: float = 1e5

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class BvarPosterior:
    draws: list[tuple[np.ndarray, np.ndarray]]
    spec: VarxSpec
    prior: MinnesotaPrior
    n_draws: int
    mean_coefficients: np.ndarray = None
    sigma_scales: np.ndarray = None
    exog_sd: np.ndarray = None
    redraw_count: int = 0


@dataclass
class IrfResult:
    variables: tuple[str, ...]
    horizons: np.ndarray
    median: np.ndarray
    lo66: np.ndarray
    hi66: np.ndarray
    lo90: np.ndarray
    hi90: np.ndarray
    impulse: float
    n_explosive: int = 0


@dataclass
class MonthlySeries:
    months: tuple[tuple[int, int], ...]
    values: np.ndarray


@dataclass
class MonthlyPanel:
    months: tuple[tuple[int, int], ...]
    columns: dict[str, np.ndarray]


def _next_month(ym: tuple[int, int]) -> tuple[int, int]:
    y, m = ym
    return (y + 1, 1) if m == 12 else (y, m + 1)


def month_span(first: tuple[int, int], last: tuple[int, int]) -> list[tuple[int, int]]:
    out = []
    ym = first
    while ym <= last:
        out.append(ym)
        ym = _next_month(ym)
    return out


def aggregate_to_monthly(values: dict[datetime.date, float],
                         months: list[tuple[int, int]] | None = None) -> MonthlySeries:
    """Calendar-month sums of a meeting-dated series; months without a
    meeting get 0, so the cumulative shock mass is preserved."""
    if not values:
        raise ValueError("cannot aggregate an empty series")
    if months is None:
        dates = sorted(values)
        months = month_span((dates[0].year, dates[0].month),
                            (dates[-1].year, dates[-1].month))
    sums = {ym: 0.0 for ym in months}
    for d, v in values.items():
        ym = (d.year, d.month)
        if ym in sums:
            sums[ym] += float(v)
    return MonthlySeries(months=tuple(months),
                         values=np.array([sums[ym] for ym in months]))


def load_monthly(path) -> MonthlyPanel:
    """Read the monthly macro CSV ``month,ip_growth,cpi_inflation,ebp``
    (months must be consecutive)."""
    import csv

    with open(path, newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1)
                if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError(f"{path}: empty file (missing header)")
    header_line, header = rows[0]
    names = [h.strip() for h in header]
    if not names or names[0].lower() != "month":
        raise ParseError(f"{path}, line {header_line}: first column must be 'month'")
    columns = {n: [] for n in names[1:]}
    months = []
    for lineno, row in rows[1:]:
        if len(row) != len(names):
            raise ParseError(f"{path}, line {lineno}: expected {len(names)} fields")
        try:
            y, m = row[0].strip().split("-")
            ym = (int(y), int(m))
            if not 1 <= ym[1] <= 12:
                raise ValueError
        except ValueError:
            raise ParseError(f"{path}, line {lineno}: bad month {row[0]!r}") from None
        months.append(ym)
        for name, cell in zip(names[1:], row[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}, line {lineno}: non-numeric value "
                                 f"{cell!r} in column {name!r}") from None
            if not np.isfinite(v):
                raise ValidationError(f"{path}, line {lineno}: non-finite value "
                                      f"in column {name!r}")
            columns[name].append(v)
    for a, b in zip(months, months[1:]):
        if _next_month(a) != b:
            raise ValidationError(f"{path}: months not consecutive at "
                                  f"{a[0]:04d}-{a[1]:02d} -> {b[0]:04d}-{b[1]:02d}")
    return MonthlyPanel(months=tuple(months),
                        columns={n: np.array(v) for n, v in columns.items()})


def align_exog(series: MonthlySeries, months: tuple[tuple[int, int], ...]) -> np.ndarray:
    """Reindex an exogenous monthly series onto the panel months (0 outside
    the series' span: no meeting means no shock)."""
    lookup = dict(zip(series.months, series.values))
    return np.array([lookup.get(ym, 0.0) for ym in months])


def _ar_sigma(y: np.ndarray, p: int) -> float:
    """Innovation scale from a univariate AR(p) with intercept."""
    T = y.shape[0]
    Z = np.column_stack([y[p - l:T - l] for l in range(1, p + 1)]
                        + [np.ones(T - p)])
    resid = y[p:] - Z @ np.linalg.lstsq(Z, y[p:], rcond=None)[0]
    dof = max(T - p - Z.shape[1], 1)
    return max(float(np.sqrt(resid @ resid / dof)), 1e-12)


def fit_bvarx(panel: MonthlyPanel, exog: MonthlySeries | list[MonthlySeries],
              spec: VarxSpec = VarxSpec(), prior: MinnesotaPrior = MinnesotaPrior(),
              n_draws: int = 2000, seed: int = 0) -> BvarPosterior:
    """Sample the conjugate posterior; draws are reproducible given the seed
    (one RNG sub-stream per draw index, so execution order cannot matter)."""
    exog_list = [exog] if isinstance(exog, MonthlySeries) else list(exog)
    if len(exog_list) != spec.m:
        raise ValueError(f"got {len(exog_list)} exogenous series for "
                         f"{spec.m} declared names")
    missing = [n for n in spec.endogenous if n not in panel.columns]
    if missing:
        raise ValueError(f"panel lacks endogenous columns {missing}")

    n, p, m = spec.n, spec.lags, spec.m
    Y_full = np.column_stack([panel.columns[name] for name in spec.endogenous])
    X_full = np.column_stack([align_exog(s, panel.months) for s in exog_list])
    T_full = Y_full.shape[0]
    T = T_full - p
    if T <= spec.k + 1:
        raise InsufficientSampleError(
            f"{T} usable months for {spec.k} coefficients per equation")

    Y = Y_full[p:]
    blocks = [Y_full[p - l:T_full - l] for l in range(1, p + 1)] + [X_full[p:]]
    if spec.intercept:
        blocks.append(np.ones((T, 1)))
    Z = np.column_stack(blocks)

    sigma = np.array([_ar_sigma(Y_full[:, i], p) for i in range(n)])
    exog_sd = X_full[p:].std(axis=0)
    exog_scale = np.where(exog_sd > 0, exog_sd, 1.0)

    # per-equation conjugate posteriors
    posts = []
    nu0 = 2.0
    for i in range(n):
        omega = np.empty(spec.k)
        for l in range(1, p + 1):
            for j in range(n):
                cross = 1.0 if i == j else prior.lambda2
                omega[(l - 1) * n + j] = (prior.lambda1 * cross / l**prior.lambda3
                                          * sigma[i] / sigma[j])
        for q in range(m):
            omega[n * p + q] = prior.lambda1 * prior.lambda4 * sigma[i] / exog_scale[q]
        if spec.intercept:
            omega[-1] = prior.lambda1 * prior.lambda4 * sigma[i]

        b_bar = np.zeros(spec.k)
        b_bar[i] = prior.own_mean  # own first lag
        P = np.diag(sigma[i] ** 2 / omega**2)
        K = Z.T @ Z + P
        y_i = Y[:, i]
        b_star = np.linalg.solve(K, Z.T @ y_i + P @ b_bar)
        s_star = (sigma[i] ** 2 + y_i @ y_i + b_bar @ P @ b_bar
                  - b_star @ K @ b_star)
        s_star = max(float(s_star), 1e-300)
        L = cholesky(K, lower=True)
        posts.append((b_star, L, nu0 + T, s_star))

    children = np.random.SeedSequence(seed).spawn(n_draws)
    draws = []
    redraws = 0
    for dd in range(n_draws):
        rng = np.random.default_rng(children[dd])
        B = np.empty((spec.k, n))
        sig2 = np.empty(n)
        for i, (b_star, L, nu_star, s_star) in enumerate(posts):
            for _ in range(100):
                g = rng.standard_gamma(nu_star / 2.0)
                v = (s_star / 2.0) / g if g > 0 else np.inf
                if np.isfinite(v) and v > 0:
                    break
                redraws += 1
            else:
                raise RuntimeError("could not draw a positive innovation variance")
            z = rng.standard_normal(spec.k)
            B[:, i] = b_star + np.sqrt(v) * solve_triangular(L.T, z, lower=False)
            sig2[i] = v
        draws.append((B, np.diag(sig2)))
    if redraws:
        warnings.warn(f"{redraws} invalid variance draws were redrawn",
                      RuntimeWarning, stacklevel=2)

    return BvarPosterior(draws=draws, spec=spec, prior=prior, n_draws=n_draws,
                         mean_coefficients=np.column_stack([p_[0] for p_ in posts]),
                         sigma_scales=sigma, exog_sd=exog_sd, redraw_count=redraws)


def coefficient_blocks(B: np.ndarray, spec: VarxSpec
                       ) -> tuple[list[np.ndarray], np.ndarray]:
    """Split a stacked (k, n) coefficient matrix into lag matrices A_l (each
    n x n, equations in rows) and the exogenous loading matrix C (n x m)."""
    n, p, m = spec.n, spec.lags, spec.m
    A = [B[(l - 1) * n: l * n, :].T for l in range(1, p + 1)]
    C = B[n * p: n * p + m, :].T
    return A, C


def companion_radius(A: list[np.ndarray]) -> float:
    n, p = A[0].shape[0], len(A)
    comp = np.zeros((n * p, n * p))
    comp[:n, :] = np.hstack(A)
    if p > 1:
        comp[n:, :-n] = np.eye(n * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def irf_exogenous(posterior: BvarPosterior, horizon: int,
                  bands: tuple[float, float] = (0.66, 0.90), exog_index: int = 0,
                  impulse: float | None = None,
                  truncate_explosive: bool = False) -> IrfResult:
    """Pointwise posterior quantiles of the response to a one-standard-
    deviation exogenous impulse at horizon 0 (x = 0 afterwards).

    Draws with companion spectral radius above 1 + 1e-6 are counted and, if
    ``truncate_explosive``, excluded from the quantiles.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    spec = posterior.spec
    if impulse is None:
        impulse = float(posterior.exog_sd[exog_index])

    paths = []
    n_explosive = 0
    for B, _ in posterior.draws:
        A, C = coefficient_blocks(B, spec)
        explosive = companion_radius(A) > 1.0 + EXPLOSIVE_TOL
        if explosive:
            n_explosive += 1
            if truncate_explosive:
                continue
        path = np.zeros((horizon + 1, spec.n))
        path[0] = C[:, exog_index] * impulse
        for h in range(1, horizon + 1):
            acc = np.zeros(spec.n)
            for l in range(1, min(h, spec.lags) + 1):
                acc += A[l - 1] @ path[h - l]
            path[h] = acc
        paths.append(path)
    if not paths:
        raise ValueError("no non-explosive draws left to summarize")

    arr = np.stack(paths)  # (draws, H+1, n)
    lo_q = [(1.0 - b) / 2.0 for b in bands]
    qs = np.quantile(arr, [0.5, lo_q[0], 1 - lo_q[0], lo_q[1], 1 - lo_q[1]], axis=0)
    return IrfResult(variables=spec.endogenous,
                     horizons=np.arange(horizon + 1),
                     median=qs[0].T, lo66=qs[1].T, hi66=qs[2].T,
                     lo90=qs[3].T, hi90=qs[4].T,
                     impulse=float(impulse), n_explosive=n_explosive)
