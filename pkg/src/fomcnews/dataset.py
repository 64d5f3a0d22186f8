"""Meeting-level panels: loading, validation, and alignment.

Scheduled FOMC meeting dates are the unit of observation and the join key
everywhere; joins are exact calendar-date equality. All loaders return
immutable-by-convention containers that are safe to share across threads.

File formats (all CSV, ISO-8601 dates, blank cell = missing):

* embeddings: ``date,source,e0,...,e767`` - one row per (date, source)
* targets:    ``date,ffr,rgdp,cpi``
* shocks:     ``date,pns,ffr_surprise,ff4`` preceded by ``# units: <u>``
* outcomes:   ``date,<outcome name>,...``
"""

from __future__ import annotations

import csv
import datetime
import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (AlignmentError, DimensionError, ParseError,
                     ValidationError)

EMBED_DIM = 768

DEFAULT_ZLB_CUTOFF = datetime.date(2008, 12, 16)
CRISIS_START = datetime.date(2008, 7, 1)
CRISIS_END = datetime.date(2009, 7, 31)

KNOWN_OUTCOMES = (
    "Nominal 3 month", "Nominal 1 year", "Nominal 2 years", "Nominal 5 years",
    "Nominal 10 years", "Nominal 20 years", "TIPS Real 2 years",
    "TIPS Real 5 years", "TIPS Real 10 years", "TIPS Real 20 years",
)


class Source(enum.Enum):
    FOMC = "fomc"
    NYT = "nyt"


class TargetName(enum.Enum):
    FFR = "ffr"
    RGDP = "rgdp"
    CPI = "cpi"


class ShockName(enum.Enum):
    PNS = "pns"
    FFR_SURPRISE = "ffr_surprise"
    FF4 = "ff4"


class Window(enum.Enum):
    FULL_SAMPLE = "full"
    PRE_ZLB = "prezlb"


@dataclass(frozen=True)
class SampleFilter:
    """Subsample rules: the pre-ZLB window keeps meetings strictly before
    ``zlb_cutoff``; the crisis exclusion drops Jul 2008 - Jul 2009 inclusive."""

    window: Window = Window.FULL_SAMPLE
    crisis_exclusion: bool = False
    zlb_cutoff: datetime.date = DEFAULT_ZLB_CUTOFF

    def keeps(self, d: datetime.date) -> bool:
        if self.window is Window.PRE_ZLB and d >= self.zlb_cutoff:
            return False
        if self.crisis_exclusion and CRISIS_START <= d <= CRISIS_END:
            return False
        return True

    def drop_reason(self, d: datetime.date) -> str | None:
        if self.window is Window.PRE_ZLB and d >= self.zlb_cutoff:
            return "post_zlb"
        if self.crisis_exclusion and CRISIS_START <= d <= CRISIS_END:
            return "crisis_exclusion"
        return None


@dataclass
class EmbeddingPanel:
    source: Source
    rows: dict[datetime.date, np.ndarray]

    def dates(self) -> list[datetime.date]:
        return sorted(self.rows)

    def matrix(self, keys) -> np.ndarray:
        return np.vstack([self.rows[k] for k in keys]) if keys else np.empty((0, EMBED_DIM))

    def __len__(self):
        return len(self.rows)


@dataclass
class TargetSeries:
    name: TargetName
    values: dict[datetime.date, float]


@dataclass
class ShockSeries:
    name: ShockName
    values: dict[datetime.date, float]
    units: str = "percent"


@dataclass
class OutcomePanel:
    """Daily-change outcome series; inner dicts omit missing meetings."""

    columns: dict[str, dict[datetime.date, float]]

    def names(self) -> list[str]:
        return list(self.columns)


@dataclass
class DropReport:
    dropped: list[tuple[datetime.date, str]] = field(default_factory=list)

    def reasons(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for _, reason in self.dropped:
            out[reason] = out.get(reason, 0) + 1
        return out


@dataclass
class AnalysisSample:
    """Aligned, date-sorted matrices over a common set of meetings."""

    keys: tuple[datetime.date, ...]
    X_fomc: np.ndarray
    X_nyt: np.ndarray
    targets: dict[TargetName, np.ndarray]
    shock: np.ndarray
    shock_name: ShockName
    drop_report: DropReport = field(default_factory=DropReport)

    def __post_init__(self):
        T = len(self.keys)
        bad = [name for name, arr in [("X_fomc", self.X_fomc), ("X_nyt", self.X_nyt),
                                      ("shock", self.shock)]
               if arr.shape[0] != T]
        bad += [t.value for t, arr in self.targets.items() if arr.shape[0] != T]
        if bad:
            raise ValueError(f"row-count mismatch with keys: {bad}")

    @property
    def n_meetings(self) -> int:
        return len(self.keys)


def _parse_date(text: str, lineno: int, path) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text.strip())
    except ValueError as exc:
        raise ParseError(f"{path}, line {lineno}: bad date {text!r} ({exc})") from None


def _parse_float(text: str, lineno: int, path, col: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{path}, line {lineno}: non-numeric value {text!r} "
                         f"in column {col!r}") from None


def _read_rows(path):
    """Yield (lineno, row) skipping '#' metadata lines; also return them."""
    meta = []
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.lstrip().startswith("#"):
                meta.append(line.strip())
                continue
            if not line.strip():
                continue
            rows.append((lineno, next(csv.reader([line]))))
    return meta, rows


def load_embeddings(path, source: Source) -> EmbeddingPanel:
    """Load the rows of ``source`` from an embeddings CSV.

    Rejects duplicate (source, date) rows, rows of the wrong width, and
    non-finite entries. The file may interleave both sources.
    """
    _, rows = _read_rows(path)
    if not rows:
        raise ParseError(f"{path}: empty file (missing header)")
    header_line, header = rows[0]
    expected = ["date", "source"] + [f"e{i}" for i in range(EMBED_DIM)]
    if [h.strip() for h in header] != expected:
        if len(header) != len(expected):
            raise DimensionError(
                f"{path}, line {header_line}: header has {len(header)} columns, "
                f"expected {len(expected)} (date,source,e0,...,e{EMBED_DIM - 1})")
        raise ParseError(f"{path}, line {header_line}: unexpected header")

    panel: dict[datetime.date, np.ndarray] = {}
    for lineno, row in rows[1:]:
        if len(row) != len(expected):
            raise DimensionError(
                f"{path}, line {lineno}: row has {len(row) - 2} embedding entries, "
                f"expected {EMBED_DIM}")
        row_source = row[1].strip().lower()
        if row_source not in (Source.FOMC.value, Source.NYT.value):
            raise ParseError(f"{path}, line {lineno}: unknown source {row[1]!r}")
        if row_source != source.value:
            continue
        d = _parse_date(row[0], lineno, path)
        if d in panel:
            raise ValidationError(
                f"{path}, line {lineno}: duplicate row for ({row_source}, {d})")
        vec = np.array([_parse_float(v, lineno, path, f"e{i}")
                        for i, v in enumerate(row[2:])])
        if not np.all(np.isfinite(vec)):
            raise ValidationError(f"{path}, line {lineno}: non-finite embedding entry")
        panel[d] = vec
    return EmbeddingPanel(source=source, rows=panel)


def load_targets(path) -> dict[TargetName, TargetSeries]:
    """Load FFR / RGDP / CPI target series; blank cells are missing."""
    _, rows = _read_rows(path)
    if not rows:
        raise ParseError(f"{path}: empty file (missing header)")
    header_line, header = rows[0]
    expected = ["date", "ffr", "rgdp", "cpi"]
    if [h.strip().lower() for h in header] != expected:
        raise ParseError(f"{path}, line {header_line}: expected header "
                         f"'date,ffr,rgdp,cpi'")
    series = {t: {} for t in TargetName}
    for lineno, row in rows[1:]:
        if len(row) != 4:
            raise ParseError(f"{path}, line {lineno}: expected 4 fields, got {len(row)}")
        d = _parse_date(row[0], lineno, path)
        for target, cell in zip(TargetName, row[1:]):
            if cell.strip() == "":
                continue
            v = _parse_float(cell, lineno, path, target.value)
            if not np.isfinite(v):
                raise ValidationError(
                    f"{path}, line {lineno}: non-finite {target.value} value")
            if target is TargetName.FFR and v < 0:
                raise ValidationError(f"{path}, line {lineno}: negative FFR {v}")
            series[target][d] = v
    return {t: TargetSeries(name=t, values=vals) for t, vals in series.items()}


_UNIT_SCALE = {"percent": 1.0, "percentage_points": 1.0,
               "basis_points": 0.01, "bp": 0.01}


def load_shocks(path) -> dict[ShockName, ShockSeries]:
    """Load the high-frequency surprise series, converting declared units to
    percentage points."""
    meta, rows = _read_rows(path)
    units = "percent"
    for line in meta:
        body = line.lstrip("#").strip()
        if body.lower().startswith("units:"):
            units = body.split(":", 1)[1].strip().lower()
    if units not in _UNIT_SCALE:
        raise ParseError(f"{path}: unknown units {units!r} in metadata")
    scale = _UNIT_SCALE[units]

    if not rows:
        raise ParseError(f"{path}: empty file (missing header)")
    header_line, header = rows[0]
    expected = ["date", "pns", "ffr_surprise", "ff4"]
    if [h.strip().lower() for h in header] != expected:
        raise ParseError(f"{path}, line {header_line}: expected header "
                         f"'date,pns,ffr_surprise,ff4'")
    series = {s: {} for s in ShockName}
    for lineno, row in rows[1:]:
        if len(row) != 4:
            raise ParseError(f"{path}, line {lineno}: expected 4 fields, got {len(row)}")
        d = _parse_date(row[0], lineno, path)
        for shock, cell in zip(ShockName, row[1:]):
            if cell.strip() == "":
                continue
            v = _parse_float(cell, lineno, path, shock.value)
            if not np.isfinite(v):
                raise ValidationError(
                    f"{path}, line {lineno}: non-finite {shock.value} value")
            series[shock][d] = v * scale
    return {s: ShockSeries(name=s, values=vals) for s, vals in series.items()}


def load_outcomes(path) -> OutcomePanel:
    """Load daily outcome-rate changes; missing cells stay missing (TIPS
    series start later in the sample). Unknown column names are kept with a
    warning."""
    _, rows = _read_rows(path)
    if not rows:
        raise ParseError(f"{path}: empty file (missing header)")
    header_line, header = rows[0]
    names = [h.strip() for h in header]
    if not names or names[0].lower() != "date":
        raise ParseError(f"{path}, line {header_line}: first column must be 'date'")
    outcome_names = names[1:]
    for name in outcome_names:
        if name not in KNOWN_OUTCOMES:
            warnings.warn(f"unknown outcome column {name!r} kept as-is",
                          stacklevel=2)
    columns: dict[str, dict[datetime.date, float]] = {n: {} for n in outcome_names}
    for lineno, row in rows[1:]:
        if len(row) != len(names):
            raise ParseError(f"{path}, line {lineno}: expected {len(names)} fields, "
                             f"got {len(row)}")
        d = _parse_date(row[0], lineno, path)
        for name, cell in zip(outcome_names, row[1:]):
            if cell.strip() == "":
                continue
            v = _parse_float(cell, lineno, path, name)
            if not np.isfinite(v):
                raise ValidationError(f"{path}, line {lineno}: non-finite value "
                                      f"in column {name!r}")
            columns[name][d] = v
    return OutcomePanel(columns=columns)


def build_sample(embeddings_fomc: EmbeddingPanel, embeddings_nyt: EmbeddingPanel,
                 targets: dict[TargetName, TargetSeries], shock: ShockSeries,
                 sample_filter: SampleFilter = SampleFilter()) -> AnalysisSample:
    """Intersect all inputs on meeting date, apply the subsample filter, and
    return date-sorted aligned matrices plus a report of dropped keys."""
    if embeddings_fomc.source is not Source.FOMC or embeddings_nyt.source is not Source.NYT:
        raise ValueError("panels passed in the wrong order (expected FOMC, NYT)")

    universe = set(embeddings_fomc.rows) | set(embeddings_nyt.rows) | set(shock.values)
    for t in targets.values():
        universe |= set(t.values)

    report = DropReport()
    kept = []
    for d in sorted(universe):
        reasons = []
        if d not in embeddings_fomc.rows:
            reasons.append("missing_fomc_embedding")
        if d not in embeddings_nyt.rows:
            reasons.append("missing_nyt_embedding")
        if d not in shock.values:
            reasons.append("missing_shock")
        for t in targets.values():
            if d not in t.values:
                reasons.append(f"missing_target_{t.name.value}")
        filter_reason = sample_filter.drop_reason(d)
        if filter_reason is not None:
            reasons.append(filter_reason)
        if reasons:
            for r in reasons:
                report.dropped.append((d, r))
        else:
            kept.append(d)

    if not kept:
        raise AlignmentError("no meetings survive intersection and filtering")

    return AnalysisSample(
        keys=tuple(kept),
        X_fomc=embeddings_fomc.matrix(kept),
        X_nyt=embeddings_nyt.matrix(kept),
        targets={t.name: np.array([t.values[d] for d in kept])
                 for t in targets.values()},
        shock=np.array([shock.values[d] for d in kept]),
        shock_name=shock.name,
        drop_report=report)
