"""Exact Gaussian sampling of ``u(t, i/N)``, ``i = 0..N``.

Random numbers come from numpy's counter-based Philox bit generator keyed
through :class:`numpy.random.SeedSequence`; standard normals use numpy's
ziggurat (``Generator.standard_normal``). Replicate ``m`` of a batch seeded
with ``seed`` uses ``mix(seed, m)``, so a batch never depends on how its
replicates are scheduled.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .covariance import WaveModel, cholesky_factor
from .errors import ValidationError

SEED_MASK = (1 << 64) - 1


def mix(seed: int, m: int) -> int:
    """64-bit seed for replicate ``m`` of a batch seeded with ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & SEED_MASK, spawn_key=(int(m),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def normal_stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & SEED_MASK)))


@dataclass(frozen=True)
class FieldSlice:
    model: WaveModel
    N: int
    values: np.ndarray = field(repr=False)
    seed: int

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value"])
        for xi, vi in zip(self.x, self.values):
            w.writerow([repr(float(xi)), repr(float(vi))])
        return buf.getvalue()

    @classmethod
    def from_values(cls, model: WaveModel, values, seed: int = -1) -> "FieldSlice":
        v = np.asarray(values, dtype=float).ravel()
        if v.size < 3:
            raise ValidationError("a slice needs at least 3 grid values")
        return cls(model, v.size - 1, v, seed)


def read_slice_csv(text: str) -> np.ndarray:
    """Read the ``x,value`` CSV written by :meth:`FieldSlice.to_csv`."""
    rows = list(csv.reader(io.StringIO(text)))
    if rows and rows[0] and rows[0][0].strip().lower() == "x":
        rows = rows[1:]
    try:
        return np.array([float(r[-1]) for r in rows if r], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"malformed slice CSV: {exc}") from exc


def _check(model: WaveModel, N: int):
    model.require_t_above_one()
    if N < 2:
        raise ValidationError(f"N must be >= 2, got {N}")


def _draw(L: np.ndarray, seed: int) -> np.ndarray:
    z = normal_stream(seed).standard_normal(L.shape[0])
    v = L @ z
    v.setflags(write=False)
    return v


def sample_slice(model: WaveModel, N: int, seed: int) -> FieldSlice:
    _check(model, N)
    L = cholesky_factor(model, N)
    return FieldSlice(model, N, _draw(L, seed), int(seed))


def sample_batch(model: WaveModel, N: int, M: int, seed: int, workers: int = 1) -> list[FieldSlice]:
    """``M`` independent slices; replicate ``m`` is ``sample_slice(model, N, mix(seed, m))``."""
    _check(model, N)
    if M < 1:
        raise ValidationError("M must be >= 1")
    L = cholesky_factor(model, N)
    seeds = [mix(seed, m) for m in range(M)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(lambda s: _draw(L, s), seeds))
    else:
        values = [_draw(L, s) for s in seeds]
    return [FieldSlice(model, N, v, s) for v, s in zip(values, seeds)]
