from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import pytest

from upliftkit.data import Dataset, FeatureSchema

DatasetBuilder = Callable[..., Dataset]


@pytest.fixture
def build_dataset() -> DatasetBuilder:
    """Factory for small datasets with auto-named feature columns."""

    def build(
        x: Sequence,
        w: Sequence[int],
        y: Sequence[int],
        names: tuple[str, ...] | None = None,
    ) -> Dataset:
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if names is None:
            names = tuple(f"f{i + 1}" for i in range(arr.shape[1]))
        return Dataset(
            FeatureSchema(names), arr, np.asarray(w), np.asarray(y)
        )

    return build


@pytest.fixture
def four_cell_dataset(build_dataset: DatasetBuilder) -> Dataset:
    """One row per (w, y) cell, ordered (1,1), (0,0), (1,0), (0,1)."""
    return build_dataset(
        [[0.1], [0.2], [0.3], [0.4]], w=[1, 0, 1, 0], y=[1, 0, 0, 1]
    )
