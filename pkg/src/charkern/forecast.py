"""Forecast records, file loaders and score reports used by the CLI."""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import SpaceMismatchError, ValidationError
from .kernel import KernelSpec, kernel_scores, mmd_sq
from .measure import DiscreteSpace, SignedMeasure


@dataclass(frozen=True)
class ForecastRecord:
    forecast: SignedMeasure
    observation: str
    id: str | None = None
    timestamp: str | None = None

    def __post_init__(self):
        self.forecast.space.index(self.observation)


def _as_measure(space: DiscreteSpace, entry) -> SignedMeasure:
    if isinstance(entry, dict):
        if "mass" in entry:
            vals = entry["mass"]
            mu = SignedMeasure(space, _checked(space, vals))
        elif "density" in entry:
            vals = np.asarray(_checked(space, entry["density"])) * space.nu
            mu = SignedMeasure(space, vals)
        else:
            raise ValidationError("forecast needs a 'mass' or 'density' entry")
    else:
        mu = SignedMeasure(space, _checked(space, entry))
    return mu.require_probability("forecast")


def _checked(space, vals):
    vals = list(vals)
    if len(vals) != len(space):
        raise SpaceMismatchError(
            f"forecast has {len(vals)} entries but the space has {len(space)} points"
        )
    return vals


def load_records(path: str | Path, space: DiscreteSpace) -> list[ForecastRecord]:
    """Read forecast records from JSON or CSV.

    JSON: ``{"records": [{"id", "forecast": {"mass": [...]}, "observation"}]}``
    (a bare list is accepted too). CSV: columns ``id, observation`` followed by
    one probability column per point label, in the space's order.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            labels = [c for c in (reader.fieldnames or []) if c not in ("id", "observation", "timestamp")]
            if labels != list(space.points):
                raise SpaceMismatchError("CSV probability columns do not match the space's labels")
            return [
                ForecastRecord(
                    _as_measure(space, [float(row[c]) for c in labels]),
                    row["observation"], row.get("id"), row.get("timestamp"),
                )
                for row in reader
            ]
    data = json.loads(path.read_text())
    rows = data["records"] if isinstance(data, dict) else data
    return [
        ForecastRecord(_as_measure(space, r["forecast"]), str(r["observation"]),
                       r.get("id"), r.get("timestamp"))
        for r in rows
    ]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CHARKERN_THREADS", "1")))
    except ValueError:
        return 1


def score_records(k: KernelSpec, records: list[ForecastRecord]) -> np.ndarray:
    """Scores in record order; chunks run in parallel up to ``CHARKERN_THREADS``."""
    if not records:
        return np.zeros(0)
    for r in records:
        if not r.forecast.space.same_as(k.space):
            raise SpaceMismatchError("forecast and kernel live on different spaces")
    F = np.stack([r.forecast.mass for r in records])
    obs = [r.observation for r in records]
    nthreads = min(_threads(), len(records))
    if nthreads == 1:
        return kernel_scores(k, F, obs)
    chunks = np.array_split(np.arange(len(records)), nthreads)
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        parts = pool.map(lambda ix: kernel_scores(k, F[ix], [obs[i] for i in ix]), chunks)
    return np.concatenate(list(parts))


def score_report(k: KernelSpec, records, compare=None) -> dict:
    """Per-record scores and means; with ``compare`` also the paired differences.

    The ``half_mmd_sq`` column is ``mmd_sq(k, P - Q) / 2``, the expected score
    advantage of forecaster A over B when outcomes follow A's forecast.
    """
    sa = score_records(k, records)
    rows = [{"id": r.id if r.id is not None else str(i), "observation": r.observation,
             "score": float(s)} for i, (r, s) in enumerate(zip(records, sa))]
    report = {"n": len(records), "mean_score": float(sa.mean()) if len(sa) else float("nan"),
              "records": rows}
    if compare is not None:
        if len(compare) != len(records):
            raise SpaceMismatchError("forecast files have different record counts")
        for r, q in zip(records, compare):
            if r.observation != q.observation:
                raise ValidationError("paired records must share their observations")
        sb = score_records(k, compare)
        for row, r, q, b in zip(rows, records, compare, sb):
            row["score_b"] = float(b)
            row["difference"] = float(b - row["score"])
            row["half_mmd_sq"] = 0.5 * mmd_sq(k, r.forecast - q.forecast)
        report["mean_score_b"] = float(sb.mean())
        report["mean_difference"] = float((sb - sa).mean())
    return report


def monte_carlo_gap(k: KernelSpec, P: SignedMeasure, Q: SignedMeasure, n: int,
                    rng: np.random.Generator) -> dict:
    """Sample ``n`` outcomes from ``P``; compare mean scores of forecasts ``Q`` and ``P``.

    Returns the sample mean of ``S(Q, x) - S(P, x)``, its standard error and
    the exact expectation ``mmd_sq(k, P - Q) / 2``.
    """
    P.require_probability("P")
    p = np.clip(P.mass, 0.0, None)
    p = p / p.sum()
    idx = rng.choice(len(P.space), size=n, p=p)
    labels = [P.space.points[i] for i in idx]
    diff = kernel_scores(k, np.repeat(Q.mass[None], n, 0), labels) - \
        kernel_scores(k, np.repeat(P.mass[None], n, 0), labels)
    se = float(diff.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return {"mean_difference": float(diff.mean()), "stderr": se,
            "half_mmd_sq": 0.5 * mmd_sq(k, P - Q)}


def brier_score(p, i: int) -> float:
    """Multiclass Brier score ``sum_j p_j^2 + 1 - 2 p_i``."""
    p = np.asarray(p, dtype=float)
    return float(p @ p + 1.0 - 2.0 * p[i])


__all__ = ["ForecastRecord", "load_records", "score_records", "score_report",
           "monte_carlo_gap", "brier_score"]
