"""Energy functions over {-1,+1}^N with O(M)/O(n) single-flip deltas."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spins import SpinVector, as_spins


class DimensionError(ValueError):
    pass


def rectified_margin(x, odd_mode: bool = True):
    """Number of coordinate flips needed to correct a pattern with margin -x.

    odd N:  R(x) = ((x+1)/2) * Theta(x)   (x = 0 cannot occur)
    even N: R(x) = (x/2) * Theta(x)
    """
    x = np.asarray(x, dtype=np.float64)
    if odd_mode:
        r = (x + 1.0) / 2.0
    else:
        r = x / 2.0
    return np.where(x > 0, r, 0.0)


@dataclass
class PatternSet:
    """Binary patterns xi^1..xi^M with +-1 labels."""

    patterns: np.ndarray  # (M, N) of +-1
    labels: np.ndarray    # (M,) of +-1

    def __post_init__(self):
        self.patterns = np.asarray(self.patterns, dtype=np.int8)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.patterns.ndim != 2 or self.patterns.shape[0] < 1:
            raise DimensionError("patterns must be a non-empty (M, N) array")
        if self.labels.shape != (self.patterns.shape[0],):
            raise DimensionError("labels must have one entry per pattern")
        if not np.all(np.abs(self.patterns) == 1) or not np.all(np.abs(self.labels) == 1):
            raise DimensionError("patterns and labels must be +-1 valued")

    @property
    def m(self) -> int:
        return self.patterns.shape[0]

    @property
    def n(self) -> int:
        return self.patterns.shape[1]

    @property
    def alpha(self) -> float:
        return self.m / self.n


def generate_synthetic(count: int = 30, dim: int = 100, seed: int = 0) -> PatternSet:
    """Uniform random patterns with uniform +-1 labels, deterministic per seed."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    patterns = rng.integers(0, 2, size=(count, dim)).astype(np.int8) * 2 - 1
    labels = rng.integers(0, 2, size=count).astype(np.int8) * 2 - 1
    return PatternSet(patterns, labels)


class PerceptronEnergy:
    """E(W) = sum_mu R(-theta^mu <W, xi^mu>): flips needed to fix each pattern."""

    def __init__(self, data: PatternSet):
        self.data = data
        self.n_spins = data.n
        self.odd_mode = data.n % 2 == 1
        # signed patterns theta^mu * xi^mu, so margins are just a matvec
        self._signed = (data.patterns * data.labels[:, None]).astype(np.int64)

    def margins(self, w) -> np.ndarray:
        w = as_spins(w)
        if w.size != self.n_spins:
            raise DimensionError(f"weight length {w.size} != N={self.n_spins}")
        return self._signed @ w.astype(np.int64)

    def energy(self, w) -> float:
        return float(np.sum(rectified_margin(-self.margins(w), self.odd_mode)))

    def accuracy(self, w) -> float:
        """Fraction of patterns with zero rectified loss (no flips needed).

        For odd N this coincides with a strictly positive margin; for even N a
        zero margin also counts as learned, matching the energy's notion of a
        satisfied pattern.
        """
        return float(np.mean(rectified_margin(-self.margins(w), self.odd_mode) == 0.0))

    def make_state(self, w) -> "PerceptronState":
        return PerceptronState(self, w)


class PerceptronState:
    """Per-replica cache of margins theta^mu <W, xi^mu> for the current W."""

    def __init__(self, model: PerceptronEnergy, w):
        self.model = model
        self.w = as_spins(w).copy()
        self._margins = model.margins(self.w)
        self.energy = float(np.sum(rectified_margin(-self._margins, model.odd_mode)))

    def flip_delta(self, i: int) -> float:
        new_m = self._margins - 2 * self.w[i] * self.model._signed[:, i]
        odd = self.model.odd_mode
        return float(
            np.sum(rectified_margin(-new_m, odd)) - np.sum(rectified_margin(-self._margins, odd))
        )

    def apply_flip(self, i: int) -> float:
        delta = self.flip_delta(i)
        self._margins -= 2 * self.w[i] * self.model._signed[:, i]
        self.w[i] = -self.w[i]
        self.energy += delta
        return delta


@dataclass
class ClassifierDataset:
    """Real feature vectors in [0,1]^d with class targets in [0, K)."""

    inputs: np.ndarray   # (n, d) floats in [0, 1]
    targets: np.ndarray  # (n,) ints in [0, K)
    num_classes: int

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.int64)
        if self.inputs.ndim != 2:
            raise DimensionError("inputs must be (n, d)")
        if self.targets.shape != (self.inputs.shape[0],):
            raise DimensionError("one target per input row required")
        if self.inputs.size and (self.inputs.min() < 0.0 or self.inputs.max() > 1.0):
            raise DimensionError("features must lie in [0, 1]")
        if self.targets.size and (self.targets.min() < 0 or self.targets.max() >= self.num_classes):
            raise DimensionError("targets out of range")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def d(self) -> int:
        return self.inputs.shape[1]


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    m = a.max(axis=1)
    return m + np.log(np.exp(a - m[:, None]).sum(axis=1))


class CrossEntropyEnergy:
    """Softmax cross-entropy of a K x d sign matrix, flattened row-major into W.

    Weight index w = k*d + j is row (class) k, feature j. No bias terms.
    """

    # full cache refresh cadence; bounds float drift of the incremental updates
    REFRESH_EVERY = 10_000

    def __init__(self, dataset: ClassifierDataset):
        self.dataset = dataset
        self.n_spins = dataset.num_classes * dataset.d

    def _weight_matrix(self, w) -> np.ndarray:
        w = as_spins(w)
        if w.size != self.n_spins:
            raise DimensionError(f"weight length {w.size} != K*d={self.n_spins}")
        return w.astype(np.float64).reshape(self.dataset.num_classes, self.dataset.d)

    def logits(self, w) -> np.ndarray:
        return self.dataset.inputs @ self._weight_matrix(w).T

    def energy(self, w) -> float:
        logits = self.logits(w)
        lse = _logsumexp_rows(logits)
        true_logit = logits[np.arange(self.dataset.n), self.dataset.targets]
        return float(np.sum(lse - true_logit))

    def accuracy(self, w, dataset: ClassifierDataset | None = None) -> float:
        ds = dataset if dataset is not None else self.dataset
        logits = ds.inputs @ self._weight_matrix(w).T
        # ties broken toward the smallest class index (argmax convention)
        return float(np.mean(np.argmax(logits, axis=1) == ds.targets))

    def make_state(self, w) -> "CrossEntropyState":
        return CrossEntropyState(self, w)


class CrossEntropyState:
    """Logit cache: flipping weight (k, j) shifts logit column k by -2 W_kj x_:,j."""

    def __init__(self, model: CrossEntropyEnergy, w):
        self.model = model
        self.w = as_spins(w).copy()
        self._n_applied = 0
        self._refresh()

    def _refresh(self):
        ds = self.model.dataset
        self._logits = self.model.logits(self.w)
        self._lse = _logsumexp_rows(self._logits)
        self._rows = np.arange(ds.n)
        self.energy = float(np.sum(self._lse - self._logits[self._rows, ds.targets]))

    def _delta_parts(self, i: int):
        ds = self.model.dataset
        k, j = divmod(i, ds.d)
        dcol = -2.0 * float(self.w[i]) * ds.inputs[:, j]
        col = self._logits[:, k]
        # lse' = lse + log1p(exp(col + d - lse) - exp(col - lse)); argument > -1
        shift = np.log1p(np.exp(col + dcol - self._lse) - np.exp(col - self._lse))
        delta = float(np.sum(shift) - np.sum(dcol[ds.targets == k]))
        return k, dcol, shift, delta

    def flip_delta(self, i: int) -> float:
        parts = self._delta_parts(i)
        self._memo = (i, parts)
        return parts[3]

    def apply_flip(self, i: int) -> float:
        memo = getattr(self, "_memo", None)
        if memo is not None and memo[0] == i:
            k, dcol, shift, delta = memo[1]
        else:
            k, dcol, shift, delta = self._delta_parts(i)
        self._memo = None
        self._logits[:, k] += dcol
        self._lse += shift
        self.w[i] = -self.w[i]
        self.energy += delta
        self._n_applied += 1
        if self._n_applied % CrossEntropyEnergy.REFRESH_EVERY == 0:
            self._refresh()
        return delta


class TabulatedEnergy:
    """Energy given by an explicit table over all 2^N configurations.

    State s is indexed canonically: bit i of s is 1 iff sigma_i = +1.
    """

    def __init__(self, table, n: int):
        self.table = np.asarray(table, dtype=np.float64)
        if self.table.shape != (2**n,):
            raise DimensionError(f"table must have 2^{n} entries")
        self.n_spins = n

    @staticmethod
    def index_of(w) -> int:
        w = as_spins(w)
        bits = (w > 0).astype(np.int64)
        return int(bits @ (1 << np.arange(w.size, dtype=np.int64)))

    @staticmethod
    def config_of(idx: int, n: int) -> SpinVector:
        bits = (idx >> np.arange(n)) & 1
        return SpinVector(bits.astype(np.int8) * 2 - 1)

    def energy(self, w) -> float:
        return float(self.table[self.index_of(w)])

    def make_state(self, w) -> "TabulatedState":
        return TabulatedState(self, w)


class TabulatedState:
    def __init__(self, model: TabulatedEnergy, w):
        self.model = model
        self.w = as_spins(w).copy()
        self._idx = model.index_of(self.w)
        self.energy = float(model.table[self._idx])

    def flip_delta(self, i: int) -> float:
        return float(self.model.table[self._idx ^ (1 << i)]) - self.energy

    def apply_flip(self, i: int) -> float:
        delta = self.flip_delta(i)
        self._idx ^= 1 << i
        self.w[i] = -self.w[i]
        self.energy += delta
        return delta
