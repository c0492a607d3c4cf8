"""Multiround random-forest feature screening.

The screen walks the (randomly permuted) feature space in chunks of
``step_size`` columns.  Each round trains a forest on the current chunk
plus the ``reduced_size`` survivors carried over from the previous round,
ranks the pool by selection frequency, and carries the top ``reduced_size``
features forward.  The carry left after the last chunk is the screened set.

Optionally, pure-noise canary columns are appended to the feature space
before permutation; any canary surviving to the output is a red flag that
the screen is promoting noise.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, FeatureSubset
from .forest import ForestParams, selection_frequency, train_forest
from .rng import derive_seed, stream

_CANARY_STREAM = 0xCA
_PERMUTATION_STREAM = 0x9E
_ROUND_STREAM = 0x12D


@dataclass(frozen=True)
class ScreeningConfig:
    """Knobs of one screening run.

    ``step_size`` is the chunk width (fresh features per round) and
    ``reduced_size`` the carry width (features kept between rounds and
    finally returned); ``1 <= reduced_size <= step_size`` always, and
    ``step_size`` may not exceed the (canary-augmented) feature count of
    the dataset being screened.
    """

    step_size: int
    reduced_size: int
    forest: ForestParams
    n_canaries: int = 0
    seed: int = 20230125

    def __post_init__(self):
        if self.reduced_size < 1:
            raise ValueError("reduced_size must be positive")
        if self.reduced_size > self.step_size:
            raise ValueError("reduced_size may not exceed step_size")
        if self.n_canaries < 0:
            raise ValueError("n_canaries must be nonnegative")


@dataclass(frozen=True)
class RoundRecord:
    """Provenance of one round; all ids live in the augmented feature space."""

    round_index: int
    chunk_ids: tuple[int, ...]
    carried_ids: tuple[int, ...]
    pool_ids: tuple[int, ...]
    importance: tuple[int, ...]
    selected_ids: tuple[int, ...]

    @property
    def pool_size(self) -> int:
        return len(self.pool_ids)


@dataclass(frozen=True)
class ScreeningResult:
    config: ScreeningConfig
    selected: FeatureSubset
    rounds: tuple[RoundRecord, ...]
    permutation: tuple[int, ...]
    canary_ids: tuple[int, ...]
    leaked_ids: tuple[int, ...]
    feature_names: tuple[str, ...]
    n_features_input: int
    n_samples: int
    n_classes: int
    wall_time_s: float
    cpu_time_s: float

    @property
    def n_features_augmented(self) -> int:
        return self.n_features_input + len(self.canary_ids)

    @property
    def leak_count(self) -> int:
        return len(self.leaked_ids)

    def selected_names(self) -> tuple[str, ...]:
        return tuple(self.feature_names[i] for i in self.selected.indices)


@dataclass(frozen=True)
class CanaryAudit:
    canary_ids: tuple[int, ...]
    leaked_ids: tuple[int, ...]

    @property
    def leak_count(self) -> int:
        return len(self.leaked_ids)

    @property
    def clean(self) -> bool:
        return self.leak_count == 0


def permute_features(n: int, seed: int) -> np.ndarray:
    """Deterministic random permutation of the 0-based feature positions."""
    if n < 1:
        raise ValueError("n must be positive")
    return stream(seed, _PERMUTATION_STREAM).permutation(n)


def partition_features(permutation, step_size: int) -> list[np.ndarray]:
    """Consecutive slices of the permutation, ceil(n / step_size) of them.

    All chunks have ``step_size`` entries except the last, which takes the
    remainder.
    """
    perm = np.asarray(permutation, dtype=np.int64)
    n = perm.shape[0]
    if not 1 <= step_size <= n:
        raise ValueError(f"step_size must be in 1..{n}")
    m = math.ceil(n / step_size)
    return [perm[i * step_size:min((i + 1) * step_size, n)] for i in range(m)]


def augment_with_canaries(dataset: Dataset, n_canaries: int, seed: int):
    """Append seeded standard-normal noise columns; returns (dataset, ids)."""
    if n_canaries == 0:
        return dataset, ()
    names = tuple(f"canary_{i + 1:04d}" for i in range(n_canaries))
    clash = set(names) & set(dataset.feature_names)
    if clash:
        raise ValueError(f"dataset already contains canary-reserved names: {sorted(clash)}")
    noise = stream(seed, _CANARY_STREAM).standard_normal((dataset.n_samples, n_canaries))
    augmented = Dataset(
        features=np.hstack([dataset.features, noise]),
        labels=dataset.labels,
        feature_names=dataset.feature_names + names,
    )
    ids = tuple(range(dataset.n_features, dataset.n_features + n_canaries))
    return augmented, ids


def screen(dataset: Dataset, config: ScreeningConfig, n_threads: int = 1) -> ScreeningResult:
    """Run the full multiround screen and return the ordered survivors.

    Within a round, importance ties are broken toward the smallest feature
    id so the whole run is reproducible.  Rounds are strictly sequential;
    forest training inside a round may use ``n_threads`` workers without
    changing the result.
    """
    t_wall = time.perf_counter()
    t_cpu = time.process_time()

    if dataset.n_classes < 2:
        raise ValueError("screening needs at least 2 classes; got a single-class dataset")
    config.forest.validate()
    augmented, canary_ids = augment_with_canaries(dataset, config.n_canaries, config.seed)
    n = augmented.n_features
    if config.step_size > n:
        raise ValueError(
            f"step_size={config.step_size} exceeds the augmented feature count {n}"
        )

    permutation = permute_features(n, config.seed)
    chunks = partition_features(permutation, config.step_size)

    carry = np.empty(0, dtype=np.int64)
    rounds: list[RoundRecord] = []
    for i, chunk in enumerate(chunks, start=1):
        pool = np.concatenate([chunk, carry])
        round_params = replace(
            config.forest,
            n_subfeatures=min(config.forest.n_subfeatures, pool.shape[0]),
            seed=derive_seed(config.seed, _ROUND_STREAM, i),
        )
        model = train_forest(augmented.select_features(pool), round_params, n_threads)
        importance = selection_frequency(model)
        order = np.lexsort((pool, -importance))
        selected = pool[order[:config.reduced_size]]
        rounds.append(RoundRecord(
            round_index=i,
            chunk_ids=tuple(int(f) for f in chunk),
            carried_ids=tuple(int(f) for f in carry),
            pool_ids=tuple(int(f) for f in pool),
            importance=tuple(int(c) for c in importance),
            selected_ids=tuple(int(f) for f in selected),
        ))
        carry = selected

    leaked = tuple(int(f) for f in carry if int(f) in set(canary_ids))
    return ScreeningResult(
        config=config,
        selected=FeatureSubset(tuple(int(f) for f in carry)),
        rounds=tuple(rounds),
        permutation=tuple(int(f) for f in permutation),
        canary_ids=canary_ids,
        leaked_ids=leaked,
        feature_names=augmented.feature_names,
        n_features_input=dataset.n_features,
        n_samples=dataset.n_samples,
        n_classes=dataset.n_classes,
        wall_time_s=time.perf_counter() - t_wall,
        cpu_time_s=time.process_time() - t_cpu,
    )


def canary_audit(result: ScreeningResult) -> CanaryAudit:
    """Leak accounting for a screening run that included canaries."""
    if not result.canary_ids:
        raise ValueError("screening ran without canaries; nothing to audit")
    canaries = set(result.canary_ids)
    leaked = tuple(i for i in result.selected.indices if i in canaries)
    return CanaryAudit(canary_ids=result.canary_ids, leaked_ids=leaked)
