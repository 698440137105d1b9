"""Small shared helpers: deterministic seeding, stable JSON, fits, atomic writes."""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Generator derived deterministically from a base seed and an index path.

    Derived streams are independent of worker count and call order, which keeps
    every Monte-Carlo reduction reproducible bit for bit.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map; results are identical for any thread count."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def exact_sum(values: Iterable[float]) -> float:
    """Compensated (exactly rounded) summation, order independent."""
    return math.fsum(values)


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    m = exact_sum(values) / n
    if n < 2:
        return m, 0.0
    var = exact_sum((v - m) ** 2 for v in values) / (n - 1)
    return m, math.sqrt(var / n)


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ys against xs; NaN when underdetermined."""
    if len(xs) < 2:
        return float("nan")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    xm = x - x.mean()
    denom = float(xm @ xm)
    if denom == 0.0:
        return float("nan")
    return float((xm @ (y - y.mean())) / denom)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Slope of log2(y) versus log2(x), ignoring nonpositive estimates.

    Returns +inf when every estimate is zero (decay faster than any rate) and
    NaN when fewer than two positive points remain.
    """
    pts = [(x, y) for x, y in zip(xs, ys) if y > 0.0]
    if not pts:
        return float("inf")
    if len(pts) < 2:
        return float("nan")
    return fit_slope([math.log2(x) for x, _ in pts], [math.log2(y) for _, y in pts])


def stable_json(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """Write-temp-then-rename so partial files never appear at `path`."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
