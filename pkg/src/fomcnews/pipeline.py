"""Configuration-driven orchestration of the full pipeline.

``run`` executes ingest -> decompose -> channels -> event study -> VAR and
writes six CSV artifacts plus a manifest. Every stage reads its inputs from
files and writes its outputs to files, and the standalone subcommands call
the very same stage functions, so composing subcommands is byte-identical to
a single ``run``. All randomness flows from the single config seed.
"""

from __future__ import annotations

import dataclasses
import datetime
import hashlib
import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__, bvar, decomposition, tables
from .dataset import (SampleFilter, ShockName, Source, TargetName, Window,
                      build_sample, load_embeddings, load_outcomes, load_shocks,
                      load_targets, DEFAULT_ZLB_CUTOFF)
from .decomposition import GridSpec
from .errors import ConfigError, MissingArtifactError
from .event_study import run_event_study

ARTIFACTS = ("stage3_summary.csv", "stage2_summary.csv",
             "decomposition_series.csv", "channels.csv", "event_study.csv",
             "irf.csv")


@dataclass(frozen=True)
class BvarSettings:
    lags: int = 12
    lambda1: float = 0.2
    lambda2: float = 0.5
    lambda3: float = 1.0
    lambda4: float = 1e5
    own_mean: float = 0.0
    n_draws: int = 2000
    horizon: int = 48
    intercept: bool = True
    endogenous: tuple[str, ...] = ("ip_growth", "cpi_inflation", "ebp")


@dataclass(frozen=True)
class PipelineConfig:
    embeddings_fomc: str
    embeddings_nyt: str
    targets: str
    shocks: str
    outcomes: str | None = None
    monthly: str | None = None
    shock: ShockName = ShockName.PNS
    subsample: Window = Window.FULL_SAMPLE
    crisis_exclusion: bool = False
    zlb_cutoff: datetime.date = DEFAULT_ZLB_CUTOFF
    grid: GridSpec = GridSpec()
    hc: str = "HC1"
    search: str = "joint"
    bvar: BvarSettings = BvarSettings()
    out_dir: str = "out"
    seed: int = 0
    jobs: int = 1

    def sample_filter(self) -> SampleFilter:
        return SampleFilter(window=self.subsample,
                            crisis_exclusion=self.crisis_exclusion,
                            zlb_cutoff=self.zlb_cutoff)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["shock"] = self.shock.value
        d["subsample"] = self.subsample.value
        d["zlb_cutoff"] = self.zlb_cutoff.isoformat()
        d["grid"]["etas"] = list(self.grid.etas)
        d["grid"]["lambdas"] = (list(self.grid.lambdas)
                                if self.grid.lambdas is not None else None)
        d["bvar"]["endogenous"] = list(self.bvar.endogenous)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        try:
            if "shock" in d:
                d["shock"] = ShockName(d["shock"])
            if "subsample" in d:
                d["subsample"] = Window(d["subsample"])
            if "zlb_cutoff" in d:
                d["zlb_cutoff"] = datetime.date.fromisoformat(d["zlb_cutoff"])
            if "grid" in d:
                g = dict(d["grid"])
                g["etas"] = tuple(g.get("etas", GridSpec().etas))
                if g.get("lambdas") is not None:
                    g["lambdas"] = tuple(g["lambdas"])
                d["grid"] = GridSpec(**g)
            if "bvar" in d:
                b = dict(d["bvar"])
                if "endogenous" in b:
                    b["endogenous"] = tuple(b["endogenous"])
                d["bvar"] = BvarSettings(**b)
            return cls(**d)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid config: {exc}") from None

    @classmethod
    def from_json_file(cls, path) -> "PipelineConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return cls.from_dict(data)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def validate_files(config: PipelineConfig, require: tuple[str, ...]) -> None:
    """Check that every referenced input exists before any computation."""
    for name in require:
        path = getattr(config, name)
        if path is None:
            raise ConfigError(f"config is missing the {name!r} path")
        if not os.path.exists(path):
            raise ConfigError(f"{name} file does not exist: {path}")
    if config.shock is None:
        raise ConfigError("no shock selected")
    if config.hc not in ("HC0", "HC1"):
        raise ConfigError(f"hc must be HC0 or HC1, got {config.hc!r}")
    if config.search not in ("joint", "independent"):
        raise ConfigError(f"search must be joint or independent, got {config.search!r}")
    if config.jobs < 1:
        raise ConfigError("jobs must be >= 1")


def load_analysis_sample(config: PipelineConfig):
    emb_f = load_embeddings(config.embeddings_fomc, Source.FOMC)
    emb_n = load_embeddings(config.embeddings_nyt, Source.NYT)
    targets = load_targets(config.targets)
    shocks = load_shocks(config.shocks)
    return build_sample(emb_f, emb_n, targets, shocks[config.shock],
                        config.sample_filter())


class _Writer:
    """Tracks files written during one run so a failure can clean up."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.written: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write(self, name: str, writer_fn) -> str:
        tmp = self.path(name + ".tmp")
        writer_fn(tmp)
        final = self.path(name)
        os.replace(tmp, final)
        self.written.append(final)
        return final

    def cleanup(self):
        for p in self.written:
            try:
                os.remove(p)
            except OSError:
                pass
        for name in os.listdir(self.out_dir):
            if name.endswith(".tmp"):
                try:
                    os.remove(os.path.join(self.out_dir, name))
                except OSError:
                    pass


def stage_decompose(config: PipelineConfig, writer: _Writer | None = None) -> dict:
    """Grid search + projection; writes the two summary tables and the
    per-meeting series file. Returns manifest metadata."""
    validate_files(config, ("embeddings_fomc", "embeddings_nyt", "targets", "shocks"))
    writer = writer or _Writer(config.out_dir)
    sample = load_analysis_sample(config)
    result = decomposition.grid_search(sample, grid=config.grid,
                                       search=config.search, hc=config.hc,
                                       jobs=config.jobs)
    label = config.subsample.value
    writer.write("stage3_summary.csv",
                 lambda p: tables.write_stage3_csv(p, label, result))
    writer.write("stage2_summary.csv",
                 lambda p: tables.write_stage2_csv(p, label, result))
    writer.write("decomposition_series.csv",
                 lambda p: tables.write_series_csv(p, result.keys, sample.shock,
                                                   result.news, result.monetary))
    return {
        "n_meetings": sample.n_meetings,
        "dropped": sample.drop_report.reasons(),
        "selected": {s.value: {"eta": pen.eta, "lambda": pen.lam}
                     for s, pen in result.selected.items()},
        "stage2_r2": {s.value: m.stage2_r2 for s, m in result.models.items()},
        "stage3_r2": result.stage3.r2,
        "theta": result.stage3.theta,
    }


def stage_channels(config: PipelineConfig, writer: _Writer | None = None) -> dict:
    validate_files(config, ("embeddings_fomc", "embeddings_nyt", "targets", "shocks"))
    writer = writer or _Writer(config.out_dir)
    sample = load_analysis_sample(config)
    result = decomposition.channel_regression(sample, grid=config.grid,
                                              hc=config.hc, jobs=config.jobs)
    writer.write("channels.csv",
                 lambda p: tables.write_channels_csv(p, config.subsample.value,
                                                     result))
    return {"channels_r2": result.r2,
            "channels_theta": {t.value: result.theta(t) for t in result.targets}}


def stage_event_study(config: PipelineConfig, writer: _Writer | None = None) -> dict:
    validate_files(config, ("outcomes",))
    writer = writer or _Writer(config.out_dir)
    series_path = writer.path("decomposition_series.csv")
    if not os.path.exists(series_path):
        raise MissingArtifactError(
            f"event study needs {series_path}; run decompose first")
    keys, shock, news, monetary = tables.read_series_csv(series_path)
    outcomes = load_outcomes(config.outcomes)
    rows = run_event_study(outcomes, keys, shock, news, monetary, hc=config.hc)
    writer.write("event_study.csv",
                 lambda p: tables.write_event_study_csv(p, rows))
    return {"event_study_outcomes": [r.outcome for r in rows]}


def stage_bvar(config: PipelineConfig, writer: _Writer | None = None) -> dict:
    validate_files(config, ("monthly",))
    writer = writer or _Writer(config.out_dir)
    series_path = writer.path("decomposition_series.csv")
    if not os.path.exists(series_path):
        raise MissingArtifactError(
            f"impulse responses need {series_path}; run decompose first")
    keys, _, _, monetary = tables.read_series_csv(series_path)
    panel = bvar.load_monthly(config.monthly)
    monthly_shock = bvar.aggregate_to_monthly(dict(zip(keys, monetary)))
    s = config.bvar
    spec = bvar.VarxSpec(endogenous=s.endogenous, lags=s.lags,
                         exogenous=("monetary",), intercept=s.intercept)
    prior = bvar.MinnesotaPrior(own_mean=s.own_mean, lambda1=s.lambda1,
                                lambda2=s.lambda2, lambda3=s.lambda3,
                                lambda4=s.lambda4)
    posterior = bvar.fit_bvarx(panel, monthly_shock, spec=spec, prior=prior,
                               n_draws=s.n_draws, seed=config.seed)
    irf = bvar.irf_exogenous(posterior, horizon=s.horizon)
    writer.write("irf.csv", lambda p: tables.write_irf_csv(p, irf))
    return {"irf_impulse": irf.impulse, "irf_explosive_draws": irf.n_explosive}


def run(config: PipelineConfig) -> dict:
    """Full pipeline; returns (and writes) the run manifest. On any stage
    failure the artifacts written by this run are removed."""
    validate_files(config, ("embeddings_fomc", "embeddings_nyt", "targets",
                            "shocks", "outcomes", "monthly"))
    writer = _Writer(config.out_dir)
    meta: dict = {}
    captured: list[str] = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            meta.update(stage_decompose(config, writer))
            meta.update(stage_channels(config, writer))
            meta.update(stage_event_study(config, writer))
            meta.update(stage_bvar(config, writer))
            captured = sorted({str(w.message) for w in caught})
        manifest = {
            "config": config.to_dict(),
            "config_hash": config.config_hash(),
            "versions": {"fomcnews": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__},
            "artifacts": sorted(os.path.basename(p) for p in writer.written),
            "warnings": captured,
            **meta,
        }
        writer.write("manifest.json",
                     lambda p: _write_json(p, manifest))
        return manifest
    except Exception:
        writer.cleanup()
        raise


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report(out_dir) -> str:
    """Assemble a human-readable report from previously written artifacts."""
    import csv as _csv

    missing = [a for a in ARTIFACTS if not os.path.exists(os.path.join(out_dir, a))]
    if missing:
        raise MissingArtifactError(f"missing artifacts in {out_dir}: "
                                   f"{', '.join(missing)}")

    def read(name):
        with open(os.path.join(out_dir, name), newline="") as fh:
            return list(_csv.reader(fh))

    sections = []
    s3 = read("stage3_summary.csv")
    s2 = read("stage2_summary.csv")
    sections.append(tables.render_stage_summary_text(
        dict(zip(s3[0], s3[1])), dict(zip(s2[0], s2[1]))))

    ch = read("channels.csv")
    sections.append("Channel projection\n  "
                    + ", ".join(f"{k}={v}" for k, v in zip(ch[0], ch[1])) + "\n")

    es = read("event_study.csv")
    from .event_study import EventStudyRow

    rows = [EventStudyRow(outcome=r[0], n_obs=int(r[10]),
                          beta=float(r[1]), beta_se=float(r[2]), beta_stars=r[3],
                          gamma=float(r[4]), gamma_se=float(r[5]), gamma_stars=r[6],
                          mu=float(r[7]), mu_se=float(r[8]), mu_stars=r[9],
                          beta_p=float("nan"), gamma_p=float("nan"),
                          mu_p=float("nan"))
            for r in es[1:]]
    shock_label = s3[1][1] if len(s3) > 1 else "shock"
    sections.append("Event study\n" + tables.render_event_study_text(rows, shock_label))

    irf_rows = read("irf.csv")
    variables = sorted({r[0] for r in irf_rows[1:]})
    sections.append("Impulse responses: " + ", ".join(variables)
                    + f" ({(len(irf_rows) - 1) // max(len(variables), 1)} horizons)\n")

    report = "\n".join(sections)
    with open(os.path.join(out_dir, "report.txt"), "w") as fh:
        fh.write(report)
    return report
