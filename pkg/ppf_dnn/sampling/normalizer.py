from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Normalizer:
    """
    Per-feature z-score. Features are rows, samples are columns.

    std uses the population (1/N) convention. A feature with std = 0 is only
    centred: it maps to v - mean and back, i.e. its effective scale is 1.
    """
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, matrix: np.ndarray) -> "Normalizer":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if matrix.size == 0:
            raise ValueError("cannot fit a normalizer on an empty matrix")
        mean = matrix.mean(axis=1)
        std = matrix.std(axis=1)
        # constant rows exactly, not mean-rounding noise
        const = np.all(matrix == matrix[:, :1], axis=1)
        mean[const] = matrix[const, 0]
        std[const] = 0.0
        return cls(mean=mean, std=std)

    @classmethod
    def identity(cls, n_features: int) -> "Normalizer":
        return cls(mean=np.zeros(n_features), std=np.ones(n_features))

    @property
    def n_features(self) -> int:
        return len(self.mean)

    @property
    def degenerate(self) -> np.ndarray:
        return self.std == 0

    @property
    def scale(self) -> np.ndarray:
        """divisor actually applied per feature"""
        return np.where(self.degenerate, 1.0, self.std)

    def _shape(self, a: np.ndarray, values: np.ndarray) -> np.ndarray:
        return a if values.ndim == 1 else a[:, None]

    def apply(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return (values - self._shape(self.mean, values)) / self._shape(self.scale, values)

    def invert(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return values * self._shape(self.scale, values) + self._shape(self.mean, values)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Normalizer":
        return cls(mean=np.asarray(data["mean"], dtype=float), std=np.asarray(data["std"], dtype=float))
