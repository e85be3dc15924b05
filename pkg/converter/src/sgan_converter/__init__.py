"""Offline conversion toolchain for the crowd-navigation stack.

Three independent jobs, each talking to the navigation package only through
its on-disk interfaces:

- normalize raw pedestrian recordings into the ``frame ped x y`` text format,
- export a torch reference checkpoint into the portable weight format
  (``manifest.json`` + ``weights.bin``),
- emit golden inference vectors from an independent torch forward pass,
  to be validated with ``crowdnav golden-check``.
"""

from .datasets import DatasetConversionError, convert_dataset
from .golden import default_histories, emit_golden, golden_cases
from .model import ReferenceGenerator, load_checkpoint, make_reference_checkpoint
from .weights import (DEFAULT_NAME_MAP, MapEntry, TensorNameMap,
                      UnmappedTensorError, WeightExportError, export_weights,
                      read_portable)

__all__ = [
    "DatasetConversionError", "convert_dataset",
    "ReferenceGenerator", "load_checkpoint", "make_reference_checkpoint",
    "DEFAULT_NAME_MAP", "MapEntry", "TensorNameMap",
    "UnmappedTensorError", "WeightExportError", "export_weights", "read_portable",
    "default_histories", "emit_golden", "golden_cases",
]
