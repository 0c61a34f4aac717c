"""Point catalogs: CSV ingest, simulated classifier probabilities, uniform randoms.

The catalog CSV schema is ``id,x,y,label,prob`` with an optional leading
comment line ``# bounds=x_min,x_max,y_min,y_max`` overriding the tight
bounding box.  ``label`` may be empty (deployment mode, no ground truth).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Classifier probabilities are clamped away from {0, 1} so that every
# candidate edge keeps a strictly positive score; a zero-score edge would
# fall outside the proposal's support and bias the estimator.
PROB_EPS = 1e-4

UNLABELED = -1


class CatalogFormatError(ValueError):
    """Malformed catalog file (bad row, missing column, out-of-range value)."""


@dataclass(frozen=True)
class FieldBounds:
    """Axis-aligned rectangular survey field."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise ValueError(f"degenerate bounds: {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def contains(self, x, y) -> bool:
        return bool(
            np.all((x >= self.x_min) & (x <= self.x_max))
            and np.all((y >= self.y_min) & (y <= self.y_max))
        )


@dataclass(frozen=True)
class SourcePoint:
    """One detected source with optional ground-truth label and classifier prob."""

    id: int
    x: float
    y: float
    label: int | None
    prob: float


@dataclass(frozen=True)
class ClassifierSimConfig:
    """Beta-distribution shapes for simulated classifier probabilities."""

    alpha_pos: float = 3.0
    beta_pos: float = 1.0
    alpha_neg: float = 1.0
    beta_neg: float = 3.0
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha_pos", "beta_pos", "alpha_neg", "beta_neg"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


class Catalog:
    """Ordered point set with dense ids 0..n-1, labels, and classifier probs.

    Coordinates, labels, and probs are held as numpy arrays; ``label[i]`` is
    -1 for unlabeled points.  Instances are treated as immutable.
    """

    def __init__(self, x, y, label, prob, field_bounds: FieldBounds | None = None):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.label = np.asarray(label, dtype=np.int64)
        self.prob = np.asarray(prob, dtype=np.float64)
        n = len(self.x)
        if not (len(self.y) == len(self.label) == len(self.prob) == n):
            raise ValueError("coordinate/label/prob arrays differ in length")
        if field_bounds is None:
            field_bounds = FieldBounds(
                float(self.x.min()), float(self.x.max()),
                float(self.y.min()), float(self.y.max()),
            )
        if not field_bounds.contains(self.x, self.y):
            raise ValueError("points fall outside field bounds")
        bad = (self.label != UNLABELED) & (self.label != 0) & (self.label != 1)
        if bad.any():
            raise ValueError(f"labels must be 0/1, got {self.label[bad][:5]}")
        if ((self.prob < 0) | (self.prob > 1)).any():
            raise ValueError("probs must lie in [0, 1]")
        self.field_bounds = field_bounds

    def __len__(self) -> int:
        return len(self.x)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def has_labels(self) -> bool:
        return bool((self.label != UNLABELED).all())

    @property
    def target_count(self) -> int:
        return int((self.label == 1).sum())

    def point(self, i: int) -> SourcePoint:
        lab = int(self.label[i])
        return SourcePoint(
            id=i, x=float(self.x[i]), y=float(self.y[i]),
            label=None if lab == UNLABELED else lab, prob=float(self.prob[i]),
        )

    @property
    def points(self) -> list[SourcePoint]:
        return [self.point(i) for i in range(len(self))]

    def with_probs(self, prob) -> "Catalog":
        return Catalog(self.x, self.y, self.label, prob, self.field_bounds)


def clamp_probs(prob):
    return np.clip(prob, PROB_EPS, 1.0 - PROB_EPS)


def _parse_bounds_comment(line: str) -> FieldBounds | None:
    body = line.lstrip("#").strip()
    if not body.startswith("bounds="):
        return None
    parts = body[len("bounds="):].split(",")
    if len(parts) != 4:
        raise CatalogFormatError(f"bad bounds comment: {line!r}")
    x0, x1, y0, y1 = (float(p) for p in parts)
    return FieldBounds(x0, x1, y0, y1)


def load_catalog(path, require_labels: bool = False) -> Catalog:
    """Read a catalog CSV, validating ids, labels, and probabilities.

    Probs are clamped to [PROB_EPS, 1 - PROB_EPS] on the way in.  Raises
    CatalogFormatError naming the offending line for malformed rows.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    bounds = None
    start = 0
    while start < len(lines) and lines[start].startswith("#"):
        found = _parse_bounds_comment(lines[start])
        if found is not None:
            bounds = found
        start += 1
    reader = csv.reader(io.StringIO("\n".join(lines[start:])))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["id", "x", "y", "label", "prob"]:
        raise CatalogFormatError(f"{path}: expected header id,x,y,label,prob, got {header}")

    ids, xs, ys, labels, probs = [], [], [], [], []
    for row_num, row in enumerate(reader, start=start + 2):
        if not row:
            continue
        if len(row) != 5:
            raise CatalogFormatError(f"{path}: line {row_num}: expected 5 fields, got {len(row)}")
        try:
            ids.append(int(row[0]))
            xs.append(float(row[1]))
            ys.append(float(row[2]))
        except ValueError as exc:
            raise CatalogFormatError(f"{path}: line {row_num}: {exc}") from exc
        lab_text = row[3].strip()
        if lab_text == "":
            if require_labels:
                raise CatalogFormatError(f"{path}: line {row_num}: missing required label")
            labels.append(UNLABELED)
        else:
            try:
                lab = int(lab_text)
            except ValueError as exc:
                raise CatalogFormatError(f"{path}: line {row_num}: bad label {lab_text!r}") from exc
            if lab not in (0, 1):
                raise CatalogFormatError(f"{path}: line {row_num}: label must be 0 or 1")
            labels.append(lab)
        try:
            p = float(row[4])
        except ValueError as exc:
            raise CatalogFormatError(f"{path}: line {row_num}: bad prob {row[4]!r}") from exc
        if not (0.0 <= p <= 1.0):
            raise CatalogFormatError(f"{path}: line {row_num}: prob {p} outside [0, 1]")
        probs.append(p)

    if not ids:
        raise CatalogFormatError(f"{path}: no data rows")
    if ids != list(range(len(ids))):
        raise CatalogFormatError(f"{path}: ids must be dense 0..{len(ids) - 1} in order")
    return Catalog(xs, ys, labels, clamp_probs(np.array(probs)), bounds)


def save_catalog(catalog: Catalog, path) -> None:
    """Write a catalog CSV (round-trips bit-exactly through load_catalog)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        b = catalog.field_bounds
        fh.write(f"# bounds={b.x_min!r},{b.x_max!r},{b.y_min!r},{b.y_max!r}\n")
        fh.write("id,x,y,label,prob\n")
        for i in range(len(catalog)):
            lab = catalog.label[i]
            lab_text = "" if lab == UNLABELED else str(int(lab))
            fh.write(f"{i},{float(catalog.x[i])!r},{float(catalog.y[i])!r},"
                     f"{lab_text},{float(catalog.prob[i])!r}\n")


def simulate_classifier(catalog: Catalog, cfg: ClassifierSimConfig) -> Catalog:
    """Replace probs with beta-distributed draws conditioned on the true label.

    Targets draw Beta(alpha_pos, beta_pos), backgrounds Beta(alpha_neg,
    beta_neg).  Deterministic given cfg.seed.
    """
    if not catalog.has_labels:
        raise ValueError("simulate_classifier requires a fully labeled catalog")
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    prob = np.empty(len(catalog))
    pos = catalog.label == 1
    prob[pos] = rng.beta(cfg.alpha_pos, cfg.beta_pos, size=int(pos.sum()))
    prob[~pos] = rng.beta(cfg.alpha_neg, cfg.beta_neg, size=int((~pos).sum()))
    return catalog.with_probs(clamp_probs(prob))


def generate_random_catalog(bounds: FieldBounds, n_r: int, seed: int) -> Catalog:
    """Uniform random catalog on the field rectangle (the RR reference sample)."""
    if n_r < 2:
        raise ValueError("random catalog needs at least 2 points to form pairs")
    if bounds.width <= 0 or bounds.height <= 0:
        raise ValueError("bounds must be non-degenerate")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = rng.uniform(bounds.x_min, bounds.x_max, size=n_r)
    y = rng.uniform(bounds.y_min, bounds.y_max, size=n_r)
    return Catalog(x, y, np.ones(n_r, dtype=np.int64), clamp_probs(np.ones(n_r)), bounds)
