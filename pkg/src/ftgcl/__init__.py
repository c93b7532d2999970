"""Self-supervised node embeddings from feature- and topology-proximity views
with a channel-level contrastive objective."""
from .errors import (
    DegenerateLossError,
    FtgclError,
    InvalidArgument,
    NotFound,
    NumericalError,
    SchemaError,
)
from .graph import Dataset, Graph, Subgraph, barbell, erdos_renyi, load_dataset, planted_partition, save_dataset
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Dataset",
    "DegenerateLossError",
    "FtgclError",
    "Graph",
    "InvalidArgument",
    "NotFound",
    "NumericalError",
    "SchemaError",
    "Subgraph",
    "barbell",
    "erdos_renyi",
    "load_dataset",
    "planted_partition",
    "save_dataset",
]
