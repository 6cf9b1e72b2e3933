"""Dataset schema, CSV serialization, synthetic generation, and splitting.

CSV schema: UTF-8, comma-separated, one header row, every column name
carrying one of the case-sensitive prefixes "x_" (drivers), "s_" (sensitive
variables), or "y_" (targets). Blocks are assembled in file order within
each prefix. Values are written with 17 significant digits so a save/load
round trip is lossless for doubles.

All randomness flows through numpy's PCG64 generator seeded explicitly, so
generation and splitting are bit-reproducible across runs and platforms.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

# Synthetic target composition. The quadratic ridge components give the
# target a smooth second-order part that a linear model cannot express; its
# amplitude scales with noise_std so noise_std = 0 yields an exactly linear
# target. Sensitive-basis weights are boosted so predictions carry enough
# dependence on S for the independence penalty to bite.
NONLIN_COMPONENTS = 3
NONLIN_GAIN = 3.0
SENSITIVE_WEIGHT_BOOST = 2.5
MIXED_NOISE_STD = 0.1


class CsvSchemaError(ValueError):
    """Raised when a CSV file does not conform to the column-prefix schema."""


class SensitiveMode(Enum):
    SUBSET_COLUMNS = "subset"
    MIXED_NOISE = "mixed"


@dataclass(frozen=True)
class Dataset:
    """Row-aligned driver, sensitive, and target blocks with column names."""

    x: np.ndarray
    s: np.ndarray
    y: np.ndarray
    x_names: tuple[str, ...]
    s_names: tuple[str, ...]
    y_names: tuple[str, ...]

    def __post_init__(self) -> None:
        for name in ("x", "s", "y"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim == 1:
                a = a[:, None]
            object.__setattr__(self, name, a)
        n = self.x.shape[0]
        if self.s.shape[0] != n or self.y.shape[0] != n:
            raise ValueError("x, s, y must be row-aligned")
        if n < 1:
            raise ValueError("dataset must have at least one row")
        if self.y.shape[1] < 1:
            raise ValueError("dataset must have at least one target column")
        for block, names in (
            (self.x, self.x_names),
            (self.s, self.s_names),
            (self.y, self.y_names),
        ):
            if block.shape[1] != len(names):
                raise ValueError("column names must match block widths")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.s.shape[1]

    @property
    def c(self) -> int:
        return self.y.shape[1]

    def take(self, rows: np.ndarray) -> "Dataset":
        """Dataset restricted to the given row indices."""
        return Dataset(
            x=self.x[rows],
            s=self.s[rows],
            y=self.y[rows],
            x_names=self.x_names,
            s_names=self.s_names,
            y_names=self.y_names,
        )


@dataclass
class SynthConfig:
    """Configuration for the synthetic benchmark generator.

    overlap counts how many of the q sensitive-basis columns (the trailing q
    driver columns) carry target weight; overlap = None means all of them.
    """

    n: int
    d: int
    q: int
    noise_std: float = 0.1
    sensitive_mode: SensitiveMode = SensitiveMode.SUBSET_COLUMNS
    overlap: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1 or self.q < 1:
            raise ValueError("n, d, q must be positive")
        if self.q > self.d:
            raise ValueError(f"q = {self.q} exceeds d = {self.d}")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if self.overlap is None:
            self.overlap = self.q
        if not 0 <= self.overlap <= self.q:
            raise ValueError(f"overlap = {self.overlap} must lie in [0, q = {self.q}]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def gen_synthetic(cfg: SynthConfig) -> Dataset:
    """Generate a deterministic synthetic dataset with a tunable trade-off.

    Drivers are i.i.d. standard normal. The target is X w plus
    noise_std * (NONLIN_GAIN * g(X) + eps) with eps standard normal and g a
    standardized sum of quadratic ridge functions along random directions.
    The weight vector w is supported on the leading d - q columns plus the
    first `overlap` sensitive-basis columns (the trailing q columns), with
    the sensitive entries boosted by SENSITIVE_WEIGHT_BOOST. S either copies
    the sensitive-basis columns (SubsetColumns) or mixes them with a seeded
    q x q matrix plus noise (MixedNoise).

    The draw order from the PCG64 stream is fixed: X, weight magnitudes,
    weight signs, ridge directions, target noise, then (MixedNoise only) the
    mixing matrix and sensitive noise.
    """
    rng = np.random.default_rng(cfg.seed)
    n, d, q = cfg.n, cfg.d, cfg.q
    x = rng.standard_normal((n, d))

    sensitive_basis = np.arange(d - q, d)
    support = np.concatenate([np.arange(d - q), sensitive_basis[: cfg.overlap]])
    w = np.zeros(d)
    magnitudes = rng.uniform(0.5, 1.5, size=support.size)
    signs = rng.integers(0, 2, size=support.size) * 2 - 1
    w[support] = magnitudes * signs
    w[sensitive_basis[: cfg.overlap]] *= SENSITIVE_WEIGHT_BOOST

    directions = rng.standard_normal((NONLIN_COMPONENTS, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    z = x @ directions.T
    # (z^2 - 1)/sqrt(2) standardizes each chi-square(1) ridge component
    ridge_part = ((z**2 - 1.0) / math.sqrt(2.0)).sum(axis=1) / math.sqrt(
        NONLIN_COMPONENTS
    )
    eps = rng.standard_normal(n)
    y = x @ w + cfg.noise_std * (NONLIN_GAIN * ridge_part + eps)

    if cfg.sensitive_mode is SensitiveMode.SUBSET_COLUMNS:
        s = x[:, sensitive_basis].copy()
    else:
        mixing = rng.standard_normal((q, q))
        s_noise = rng.standard_normal((n, q))
        s = x[:, sensitive_basis] @ mixing + MIXED_NOISE_STD * s_noise

    return Dataset(
        x=x,
        s=s,
        y=y[:, None],
        x_names=tuple(f"x_{j + 1}" for j in range(d)),
        s_names=tuple(f"s_{j + 1}" for j in range(q)),
        y_names=("y_1",),
    )


def _classify_header(header: list[str]) -> tuple[list[int], list[int], list[int]]:
    x_cols, s_cols, y_cols = [], [], []
    for j, name in enumerate(header):
        if name.startswith("x_"):
            x_cols.append(j)
        elif name.startswith("s_"):
            s_cols.append(j)
        elif name.startswith("y_"):
            y_cols.append(j)
        else:
            try:
                float(name)
            except ValueError:
                raise CsvSchemaError(
                    f"header column {j + 1} ('{name}') does not match the "
                    f"x_/s_/y_ prefix schema"
                ) from None
            raise CsvSchemaError(
                "missing header row: first line contains numeric values"
            )
    return x_cols, s_cols, y_cols


def load_csv(path: str | Path) -> Dataset:
    """Load a prefix-schema CSV into a Dataset."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise CsvSchemaError(f"{path}: empty file, missing header")
    header = [cell.strip() for cell in rows[0]]
    x_cols, s_cols, y_cols = _classify_header(header)
    if not y_cols:
        raise CsvSchemaError(f"{path}: no y_ target columns in header")
    width = len(header)
    data = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise CsvSchemaError(
                f"{path}: line {i} has {len(row)} fields, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise CsvSchemaError(
                    f"{path}: line {i}, column '{header[j]}': "
                    f"non-numeric value '{cell.strip()}'"
                ) from None
            if not math.isfinite(v):
                raise CsvSchemaError(
                    f"{path}: line {i}, column '{header[j]}': "
                    f"non-finite value '{cell.strip()}'"
                )
            data[i - 2, j] = v
    if data.shape[0] < 1:
        raise CsvSchemaError(f"{path}: no data rows")
    return Dataset(
        x=data[:, x_cols],
        s=data[:, s_cols],
        y=data[:, y_cols],
        x_names=tuple(header[j] for j in x_cols),
        s_names=tuple(header[j] for j in s_cols),
        y_names=tuple(header[j] for j in y_cols),
    )


def format_value(v: float) -> str:
    """Serialize a float with 17 significant digits (lossless round trip)."""
    return f"{v:.17g}"


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write a Dataset as a prefix-schema CSV with full-precision values."""
    path = Path(path)
    names = list(ds.x_names) + list(ds.s_names) + list(ds.y_names)
    blocks = np.hstack([ds.x, ds.s, ds.y])
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in blocks:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def train_test_split(
    ds: Dataset, test_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Deterministic disjoint row split; test size round(n * fraction), min 1 per side."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if ds.n < 2:
        raise ValueError("need at least 2 rows to split")
    n_test = int(round(ds.n * test_fraction))
    n_test = min(max(n_test, 1), ds.n - 1)
    perm = np.random.default_rng(seed).permutation(ds.n)
    test_rows = np.sort(perm[:n_test])
    train_rows = np.sort(perm[n_test:])
    return ds.take(train_rows), ds.take(test_rows)
