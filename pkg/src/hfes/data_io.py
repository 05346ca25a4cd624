"""Observed-sample ingestion, validation and the run configuration.

The canonical on-disk format is a flat CSV with columns
``date,y,d,label,weeks_before`` (ISO dates, dot decimals, ``weeks_before``
blank for policy rows).
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import os
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateDate,
    EmptySample,
    InvalidConfig,
    MissingColumn,
    NonFiniteValue,
    TooFewObservations,
    ValidationError,
)

CANONICAL_COLUMNS = ("date", "y", "d", "label", "weeks_before")
SEED_ENV_VAR = "HFES_SEED"
DEFAULT_SEED = 20240101


class Label(str, Enum):
    POLICY = "Policy"
    CONTROL = "Control"

    @classmethod
    def parse(cls, raw: str) -> "Label":
        key = raw.strip().lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValidationError(f"unknown label {raw!r}; expected Policy or Control")


@dataclass(frozen=True)
class Observation:
    date: dt.date
    y: float
    d: float
    label: Label
    weeks_before: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.y) and math.isfinite(self.d)):
            raise ValidationError(f"non-finite y/d on {self.date}")
        if self.weeks_before is not None:
            if self.label is not Label.CONTROL:
                raise ValidationError(
                    f"weeks_before given for a {self.label.value} row on {self.date}"
                )
            if self.weeks_before < 0:
                raise ValidationError(f"negative weeks_before on {self.date}")


@dataclass(frozen=True)
class SeriesPair:
    """Outcome/policy columns of one label class, in date order."""

    dates: tuple[dt.date, ...]
    y: np.ndarray
    d: np.ndarray
    weeks_before: tuple[int | None, ...]

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class Dataset:
    observations: tuple[Observation, ...]

    def __post_init__(self):
        obs = tuple(sorted(self.observations, key=_sort_key))
        object.__setattr__(self, "observations", obs)
        for label in Label:
            seen = set()
            for o in obs:
                if o.label is label:
                    if o.date in seen:
                        raise DuplicateDate(label.value, o.date)
                    seen.add(o.date)

    @property
    def t_p(self) -> int:
        return sum(o.label is Label.POLICY for o in self.observations)

    @property
    def t_c(self) -> int:
        return sum(o.label is Label.CONTROL for o in self.observations)

    def __len__(self) -> int:
        return len(self.observations)

    def policy(self) -> SeriesPair:
        return _pair(o for o in self.observations if o.label is Label.POLICY)

    def control(self) -> SeriesPair:
        return _pair(o for o in self.observations if o.label is Label.CONTROL)

    @classmethod
    def from_arrays(
        cls,
        dates: Sequence[dt.date],
        y: Sequence[float],
        d: Sequence[float],
        labels: Sequence[Label | str],
        weeks_before: Sequence[int | None] | None = None,
    ) -> "Dataset":
        if weeks_before is None:
            weeks_before = [None] * len(dates)
        obs = []
        for date, yi, di, lab, wb in zip(dates, y, d, labels, weeks_before, strict=True):
            lab = lab if isinstance(lab, Label) else Label.parse(lab)
            obs.append(Observation(date, float(yi), float(di), lab, wb))
        return cls(tuple(obs))


def _sort_key(o: Observation):
    return (o.date, o.label.value)


def _pair(rows: Iterable[Observation]) -> SeriesPair:
    rows = list(rows)
    return SeriesPair(
        dates=tuple(o.date for o in rows),
        y=np.array([o.y for o in rows], dtype=float),
        d=np.array([o.d for o in rows], dtype=float),
        weeks_before=tuple(o.weeks_before for o in rows),
    )


def _parse_float(raw: str, row: int, column: str) -> float:
    text = raw.strip()
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"cannot parse {raw!r} as a number in column {column!r} at row {row}")
    if not math.isfinite(value):
        raise NonFiniteValue(row, column, raw)
    return value


def load_dataset(path: str | os.PathLike, schema: Mapping[str, str] | None = None) -> Dataset:
    """Read and validate an event-study CSV.

    ``schema`` maps canonical names (``date``, ``y``, ``d``, ``label``,
    ``weeks_before``) to the column headers actually used in the file.
    Lines starting with ``#`` (provenance headers) are skipped.
    """
    schema = {name: name for name in CANONICAL_COLUMNS} | dict(schema or {})
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        header = reader.fieldnames or []
        for name in ("date", "y", "d", "label"):
            if schema[name] not in header:
                raise MissingColumn(schema[name])
        has_wb = schema["weeks_before"] in header
        obs = []
        for i, rec in enumerate(reader, start=1):
            try:
                date = dt.date.fromisoformat(rec[schema["date"]].strip())
            except ValueError:
                raise ValidationError(f"bad ISO date {rec[schema['date']]!r} at row {i}")
            y = _parse_float(rec[schema["y"]], i, "y")
            d = _parse_float(rec[schema["d"]], i, "d")
            label = Label.parse(rec[schema["label"]])
            wb = None
            if has_wb and (raw := (rec[schema["weeks_before"]] or "").strip()):
                try:
                    wb = int(raw)
                except ValueError:
                    raise ValidationError(f"weeks_before {raw!r} is not an integer at row {i}")
            obs.append(Observation(date, y, d, label, wb))
    if not obs:
        raise EmptySample("Policy and Control")
    # a file holding one label class only loads fine; estimation rejects it
    return Dataset(tuple(obs))


def write_dataset(ds: Dataset, path: str | os.PathLike, header_lines: Sequence[str] = ()) -> None:
    """Write ``ds`` in canonical form (sorted, shortest round-trip floats)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANONICAL_COLUMNS)
        for o in ds.observations:
            writer.writerow(
                [
                    o.date.isoformat(),
                    repr(o.y),
                    repr(o.d),
                    o.label.value,
                    "" if o.weeks_before is None else str(o.weeks_before),
                ]
            )


def split(ds: Dataset) -> tuple[SeriesPair, SeriesPair]:
    """Partition into (policy, control) series pairs."""
    return ds.policy(), ds.control()


def require_policy(ds: Dataset, minimum: int = 3) -> SeriesPair:
    pol = ds.policy()
    if len(pol) == 0:
        raise EmptySample(Label.POLICY.value)
    if len(pol) < minimum:
        raise TooFewObservations(minimum, len(pol), "policy sample")
    return pol


# --------------------------------------------------------------------------
# run configuration


class Criterion(str, Enum):
    MSE = "MSE"
    MAE = "MAE"


class EndogeneityForm(str, Enum):
    LINEAR = "Linear"
    QUADRATIC = "Quadratic"


def _coerce(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    for member in enum_cls:
        if member.value.lower() == str(value).strip().lower():
            return member
    raise InvalidConfig(f"{value!r} is not one of {[m.value for m in enum_cls]}")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise InvalidConfig(f"{SEED_ENV_VAR}={raw!r} is not an integer")


@dataclass(frozen=True)
class RunConfig:
    seed: int = field(default_factory=default_seed)
    replications: int = 5000
    rho_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    delta_grid: tuple[float, ...] = (0.0, 1.0, 8.0, 16.0, 32.0, 40.0, 48.0)
    criterion: Criterion = Criterion.MSE
    beta0: float = 0.99
    endogeneity_form: EndogeneityForm = EndogeneityForm.LINEAR
    delta_max: float = 1024.0
    rho_star: bool = True

    def __post_init__(self):
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        object.__setattr__(self, "delta_grid", tuple(float(d) for d in self.delta_grid))
        object.__setattr__(self, "criterion", _coerce(Criterion, self.criterion))
        object.__setattr__(
            self, "endogeneity_form", _coerce(EndogeneityForm, self.endogeneity_form)
        )
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be a 64-bit unsigned integer")
        if self.replications < 100:
            raise InvalidConfig("replications must be at least 100")
        for name, grid in (("rho_grid", self.rho_grid), ("delta_grid", self.delta_grid)):
            if not grid:
                raise InvalidConfig(f"{name} is empty")
            if list(grid) != sorted(grid):
                raise InvalidConfig(f"{name} must be sorted ascending")
        if any(abs(r) > 1 for r in self.rho_grid):
            raise InvalidConfig("rho_grid values must lie in [-1, 1]")
        if self.endogeneity_form is EndogeneityForm.QUADRATIC and any(
            abs(r) >= 1 for r in self.rho_grid
        ):
            raise InvalidConfig("quadratic endogeneity requires |rho| < 1")
        if any(d < 0 for d in self.delta_grid):
            raise InvalidConfig("delta_grid values must be non-negative")

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def _parse_grid(raw: str) -> tuple[float, ...]:
    parts = [p for p in raw.replace(" ", "").split(",") if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise InvalidConfig(f"cannot parse grid {raw!r}")


_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def parse_config_values(values: Mapping[str, str]) -> dict:
    """Convert raw string settings into ``RunConfig`` keyword arguments."""
    known = {f.name for f in fields(RunConfig)}
    out: dict = {}
    for key, raw in values.items():
        key = key.strip().replace("-", "_")
        if key not in known:
            raise InvalidConfig(f"unknown config key {key!r}")
        raw = str(raw).strip()
        try:
            if key in ("seed", "replications"):
                out[key] = int(raw)
            elif key in ("rho_grid", "delta_grid"):
                out[key] = _parse_grid(raw)
            elif key in ("beta0", "delta_max"):
                out[key] = float(raw)
            elif key == "rho_star":
                out[key] = _BOOL[raw.lower()]
            else:
                out[key] = raw
        except (ValueError, KeyError):
            raise InvalidConfig(f"bad value {raw!r} for {key}")
    return out


def load_run_config(path: str | os.PathLike, **overrides) -> RunConfig:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    kwargs = parse_config_values(values)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**kwargs)
    except ValueError as exc:
        if isinstance(exc, InvalidConfig):
            raise
        raise InvalidConfig(str(exc))
