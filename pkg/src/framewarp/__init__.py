"""Template-based recognition and segmentation of vector time series."""

__version__ = "0.1.0"

from .core import (
    AlignmentPath, DimensionError, FormatError, InvariantError, Segment, Segmentation, TimeSeries,
    read_time_series, write_time_series,
)
from .dtw import dtw_align
from .features import Dictionary, KeypointStream, build_dictionary, compute_idf, featurize
from .evaluation import EvalReport, benchmark_scaling, frame_accuracy
from .isolated import classify_isolated, dfw_align
from .metaframe import DistanceConfig, metaframe_distance
from .onepass import alias_segmentation, op_dfw_segment
from .synth import SynthConfig, generate_corpus, training_examples
from .templates import SuperTemplate, load_model, save_model, train
from .twopass import tp_dfw_segment

__all__ = [
    "AlignmentPath", "DimensionError", "DistanceConfig", "EvalReport", "FormatError", "InvariantError",
    "Segment", "Segmentation", "SuperTemplate", "TimeSeries", "benchmark_scaling", "classify_isolated",
    "dfw_align", "dtw_align", "frame_accuracy", "load_model", "metaframe_distance", "op_dfw_segment",
    "read_time_series", "save_model", "tp_dfw_segment", "train", "write_time_series",
    "Dictionary", "KeypointStream", "build_dictionary", "compute_idf", "featurize",
    "alias_segmentation", "SynthConfig", "generate_corpus", "training_examples",
]
