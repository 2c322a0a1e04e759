# sampling subpackage
from .dataset import (
    Dataset,
    DatasetSplit,
    build_dataset,
    export_dataset_csv,
    load_dataset,
    save_dataset,
    solve_samples,
)
from .distributions import draw_samples
from .normalizer import Normalizer

__all__ = [
    "Dataset",
    "DatasetSplit",
    "Normalizer",
    "build_dataset",
    "draw_samples",
    "export_dataset_csv",
    "load_dataset",
    "save_dataset",
    "solve_samples",
]
