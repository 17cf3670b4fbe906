"""Deterministic reductions, the pinned RNG and fixed-format serialization.

Every scalar reduction that ends up in an output file goes through
``block_sum`` so that repeated runs (and runs of ports in other languages)
produce bit-identical numbers: values are summed in ascending index order,
in pairwise blocks of width 256.
"""

from __future__ import annotations

import json
import os

import numpy as np

BLOCK = 256

# Pinned 64-bit linear congruential generator (Knuth's MMIX constants),
# chosen for cross-language bit-reproducibility of seeded experiments.
LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407
LCG_MASK = (1 << 64) - 1


def block_sum(values, block: int = BLOCK) -> float:
    """Sum in ascending index order with pairwise block sums of width 256."""
    a = np.ascontiguousarray(values, dtype=np.float64).ravel()
    if a.size == 0:
        return 0.0
    if a.size <= block:
        return float(np.add.reduce(a))
    n = a.size
    pad = (-n) % block
    if pad:
        a = np.concatenate([a, np.zeros(pad)])
    partials = np.add.reduce(a.reshape(-1, block), axis=1)
    return float(np.add.reduce(partials))


class Lcg:
    """Seeded deterministic generator used for all random test vectors."""

    def __init__(self, seed: int):
        self.state = seed & LCG_MASK

    def next_u64(self) -> int:
        self.state = (LCG_MULT * self.state + LCG_INC) & LCG_MASK
        return self.state

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def symmetric(self) -> float:
        """Uniform in [-1, 1)."""
        return 2.0 * self.uniform() - 1.0

    def vector(self, n: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
        return np.array([low + (high - low) * self.uniform() for _ in range(n)])


def fmt_float(x: float) -> str:
    """17 significant digits; round-trips any double."""
    if x != x:
        return "NaN"
    if x == float("inf"):
        return "Infinity"
    if x == float("-inf"):
        return "-Infinity"
    return format(float(x), ".17g")


def json_dumps(obj, indent: int = 2) -> str:
    """json.dumps with sorted keys and floats at 17 significant digits.

    Output is byte-deterministic for a given object tree.
    """
    return _render(obj, indent, 0) + "\n"


def _render(obj, indent, level):
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k in sorted(obj):
            items.append(pad + json.dumps(str(k)) + ": " + _render(obj[k], indent, level + 1))
        return "{\n" + ",\n".join(items) + "\n" + close_pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            return "[]"
        items = [pad + _render(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + close_pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    return json.dumps(str(obj))


def write_csv(path: str, columns, rows) -> None:
    """Fixed column order; floats at 17 significant digits; '\\n' line ends."""
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            if isinstance(v, (float, np.floating)):
                cells.append(fmt_float(float(v)))
            elif isinstance(v, bool):
                cells.append("true" if v else "false")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def max_workers() -> int:
    """Parallelism cap for experiment cells, from FRACEIG_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("FRACEIG_THREADS", "1")))
    except ValueError:
        return 1


def map_cells(fn, items):
    """Map over independent experiment cells, deterministically ordered."""
    w = max_workers()
    if w == 1:
        return [fn(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))
