"""Pedigree trees: addresses, tree-indexed Gaussians, lineage maps and a Monte Carlo ratio.

Vertices of the perfect binary tree of height n are words over {1, 2}; the
root is the empty word and ``i1``, ``i2`` are the two parents of ``i``.
A tree vector stores one value per non-root vertex, level by level, each
level in lexicographic order. Word ``w`` at level L therefore sits at
position ``2**L - 2 + int(w - 1, base 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DegenerateCovariance,
    HeightMismatch,
    LeafHasNoParents,
    NotALeaf,
    RootHasNoChild,
    TreeTooLarge,
    ZeroDensityAtLeaf,
)
from .gaussian_oracle import coefficients

# samples are generated in blocks with one seed stream per block, so a given
# (seed, index) always yields the same tree whatever the batching
BLOCK = 4096
DEFAULT_BUDGET = 10**9


# ----------------------------------------------------------------- addresses


@dataclass(frozen=True, order=True)
class TreeAddress:
    word: tuple[int, ...] = ()

    def __post_init__(self):
        if any(c not in (1, 2) for c in self.word):
            raise ValueError(f"address letters must be 1 or 2, got {self.word}")

    @classmethod
    def parse(cls, s: str) -> "TreeAddress":
        return cls(tuple(int(c) for c in s))

    def __str__(self):
        return "".join(map(str, self.word)) or "∅"

    def __len__(self):
        return len(self.word)

    @property
    def position(self) -> int:
        """Offset inside a tree vector (root excluded)."""
        if not self.word:
            raise ValueError("the root has no slot in a tree vector")
        L = len(self.word)
        return 2**L - 2 + int("".join(str(c - 1) for c in self.word), 2)


def child(i: TreeAddress) -> TreeAddress:
    if not i.word:
        raise RootHasNoChild()
    return TreeAddress(i.word[:-1])


def parents(i: TreeAddress, height: int) -> tuple[TreeAddress, TreeAddress]:
    if len(i) >= height:
        raise LeafHasNoParents(f"{i} is a leaf of the tree of height {height}")
    return TreeAddress(i.word + (1,)), TreeAddress(i.word + (2,))


def mate(i: TreeAddress) -> TreeAddress:
    if not i.word:
        raise RootHasNoChild("the root has no mate")
    return TreeAddress(i.word[:-1] + (3 - i.word[-1],))


def meet(i: TreeAddress, j: TreeAddress) -> TreeAddress:
    """Most recent common descendant: the longest common prefix."""
    p = 0
    for a, b in zip(i.word, j.word):
        if a != b:
            break
        p += 1
    return TreeAddress(i.word[:p])


def level(i: TreeAddress) -> int:
    return len(i)


@dataclass(frozen=True)
class PerfectTree:
    height: int

    def __post_init__(self):
        if self.height < 1:
            raise ValueError("height must be at least 1")

    def level(self, m: int) -> list[TreeAddress]:
        words = np.indices((2,) * m).reshape(m, -1).T + 1 if m else np.zeros((1, 0), int)
        return [TreeAddress(tuple(int(c) for c in w)) for w in words]

    def leaves(self) -> list[TreeAddress]:
        return self.level(self.height)

    def vertices(self) -> list[TreeAddress]:
        return [a for m in range(self.height + 1) for a in self.level(m)]

    def non_root(self) -> list[TreeAddress]:
        return [a for m in range(1, self.height + 1) for a in self.level(m)]

    @property
    def size(self) -> int:
        """Number of non-root vertices."""
        return tree_size(self.height)


def tree_size(n: int) -> int:
    return 2 * (2**n - 1)


def level_slice(L: int) -> slice:
    return slice(2**L - 2, 2 ** (L + 1) - 2)


@dataclass(frozen=True)
class TreeVector:
    height: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != tree_size(self.height):
            raise HeightMismatch(
                f"height {self.height} needs {tree_size(self.height)} entries, got {v.shape[0]}"
            )
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, address: TreeAddress) -> np.ndarray:
        return self.values[address.position]


# --------------------------------------------------------- Gaussian structure


def pair_covariance(k: float) -> tuple[float, float]:
    """(a, b): variance and minus the covariance of a parent pair."""
    if not 0 < k < 1:
        raise DegenerateCovariance(f"coefficient {k} outside (0, 1)")
    a = (2 - k) * k / (1 - k)
    b = k * k / (1 - k)
    if a <= 0 or a * a <= b * b:
        raise DegenerateCovariance(f"pair covariance not positive definite for k={k}")
    return a, b


def quadratic_form_Q(y: TreeVector, alpha: float, n: int | None = None) -> float:
    if n is not None and n != y.height:
        raise HeightMismatch(f"expected height {n}, got {y.height}")
    n = y.height
    k, _ = coefficients(alpha, n)
    total = 0.0
    for m in range(n):
        lvl = y.values[level_slice(m + 1)]
        y1, y2 = lvl[0::2], lvl[1::2]
        kk = k[n - m - 1]
        total += float(np.sum(y1**2 + y2**2) / (4 * kk) - np.sum((y1 - y2) ** 2) / 8)
    return total


def lineage_map(x, j: TreeAddress, y: TreeVector, alpha: float) -> np.ndarray:
    n = y.height
    if len(j) != n:
        raise NotALeaf(f"{j} is not a leaf of the tree of height {n}")
    _, kappa = coefficients(alpha, n)
    out = kappa[n] * np.asarray(x, dtype=np.float64)
    w = j
    for m in range(n):
        out = out + kappa[m] * y[w]
        w = TreeAddress(w.word[:-1])
    return out


def lineage_values(x: float, y: np.ndarray, n: int, alpha: float) -> np.ndarray:
    """Φ^j(x; y) for all leaves j, batched.

    ``y`` has shape (samples, tree_size(n), ...); the result has shape
    (samples, 2**n, ...) with leaves in lexicographic order.
    """
    _, kappa = coefficients(alpha, n)
    acc = kappa[n - 1] * y[:, level_slice(1)]
    for L in range(2, n + 1):
        acc = np.repeat(acc, 2, axis=1) + kappa[n - L] * y[:, level_slice(L)]
    return acc + kappa[n] * x


def leaf_covariance(i: TreeAddress, j: TreeAddress, n: int, alpha: float) -> float:
    if len(i) != n or len(j) != n:
        raise NotALeaf(f"{i} and {j} must both have length {n}")
    k, kappa = coefficients(alpha, n)

    def a(q):  # variance of an entry whose pair uses k_q
        return pair_covariance(k[q - 1])[0]

    p = len(meet(i, j))
    shared = sum(kappa[q] ** 2 * a(q + 1) for q in range(n - p, n))
    if p == n:
        return float(shared)
    b = pair_covariance(k[n - p - 1])[1]
    return float(shared - kappa[n - p - 1] ** 2 * b)


def _block_normals(seed: int, block: int, rows: int, width: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.default_rng(ss).standard_normal((rows, width))


def standard_normals(seed: int, start: int, count: int, width: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the deterministic normal stream."""
    out = np.empty((count, width))
    filled = 0
    while filled < count:
        idx = start + filled
        b, r = divmod(idx, BLOCK)
        take = min(BLOCK - r, count - filled)
        z = _block_normals(seed, b, r + take, width)
        out[filled : filled + take] = z[r:]
        filled += take
    return out


def sample_tree_batch(
    n: int, alpha: float, seed: int, start: int, count: int, dim: int = 1
) -> np.ndarray:
    """Tree Gaussians for sample indices start..start+count-1, shape (count, V, dim)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    V = tree_size(n)
    z = standard_normals(seed, start, count, V * dim).reshape(count, V, dim)
    k, _ = coefficients(alpha, n)
    y = np.empty_like(z)
    for m in range(n):
        a, b = pair_covariance(k[n - m - 1])
        # Cholesky factor of [[a, -b], [-b, a]]
        l11 = math.sqrt(a)
        l21 = -b / l11
        l22 = math.sqrt(a - l21 * l21)
        sl = level_slice(m + 1)
        z1, z2 = z[:, sl][:, 0::2], z[:, sl][:, 1::2]
        lvl = np.empty_like(z[:, sl])
        lvl[:, 0::2] = l11 * z1
        lvl[:, 1::2] = l21 * z1 + l22 * z2
        y[:, sl] = lvl
    return y


def sample_tree_gaussian(n: int, alpha: float, dim: int, seed: int, index: int) -> TreeVector:
    return TreeVector(n, sample_tree_batch(n, alpha, seed, index, 1, dim)[0])


# ------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class RatioEstimate:
    x: np.ndarray
    ratio: np.ndarray
    std_error: np.ndarray
    n_samples: int


def mc_profile_ratio(
    x,
    log_f0_bar: Callable[[np.ndarray], np.ndarray],
    n: int,
    alpha: float,
    n_samples: int,
    seed: int,
    batch: int = BLOCK,
    budget: int = DEFAULT_BUDGET,
) -> RatioEstimate:
    """Estimate F_n(x)/F_n(0) from the tree representation.

    ``log_f0_bar`` is the log of the rescaled datum e^{αx²/2}F0/G_{0,2};
    it may return -inf where the datum vanishes. All x share the same trees.
    The standard error assumes square-integrable weights; a Gaussian F0 with
    variance above 2/(2α+1) makes the rescaled datum unbounded and the
    reported error too optimistic.
    """
    if tree_size(n) * n_samples > budget:
        raise TreeTooLarge(
            f"{tree_size(n)} vertices x {n_samples} samples exceeds the budget {budget}"
        )
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    pts = np.concatenate(([0.0], xs))
    logs = np.empty((n_samples, len(pts)))
    k, kappa = coefficients(alpha, n)
    for start in range(0, n_samples, batch):
        count = min(batch, n_samples - start)
        y = sample_tree_batch(n, alpha, seed, start, count)[..., 0]
        base = lineage_values(0.0, y, n, alpha)
        for c, p in enumerate(pts):
            logs[start : start + count, c] = np.sum(log_f0_bar(base + kappa[n] * p), axis=1)
    shift = np.max(logs, axis=0)
    if not np.isfinite(shift[0]):
        raise ZeroDensityAtLeaf("every sampled tree has a leaf outside the support")
    shift = np.where(np.isfinite(shift), shift, 0.0)
    w = np.exp(logs - shift)
    mean_w = w.mean(axis=0)
    u, v = w[:, 1:], w[:, :1]
    r = mean_w[1:] / mean_w[0]
    # delta method for a ratio of means computed on the same samples
    var = np.var(u - r * v, axis=0, ddof=1) / n_samples / mean_w[0] ** 2
    scale = np.exp(-0.5 * (1 + alpha - k[n - 1]) * xs**2 + shift[1:] - shift[0])
    return RatioEstimate(xs, scale * r, scale * np.sqrt(var), n_samples)
