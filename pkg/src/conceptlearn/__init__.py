"""Incremental concept learning from demonstrated movement patterns.

A single recurrent network with parametric biases abstracts every shown
movement; teacher feedback groups the abstractions into concepts, memory
rehearsal protects old patterns while new ones are learned, and compact
groups of patterns collapse into prototype entries.
"""

from .config import (ArmConfig, EngineParams, NetConfig, PreprocessConfig,
                     RunConfig, WorkspaceRect, load_config)
from .dataset import (NormalizationStats, ProcessedDemo, Trajectory,
                      load_corpus, load_label_map, make_folds,
                      network_sequence, preprocess_corpus)
from .engine import infer, process_episode, run_training
from .errors import (ConceptLearnError, ConfigError, CorpusError,
                     DataError, DivergenceError, IKError, RehearsalError,
                     SnapshotError)
from .memory import Mem, MemEntry, empty_memory, load_memory, rehearse, save_memory
from .rnnpb import NetWeights, generate, gradient_check, init_weights, recognize, train
from .teacher import TeacherOracle, smoothed_signal

__version__ = "0.1.0"

__all__ = [
    "ArmConfig", "ConceptLearnError", "ConfigError", "CorpusError",
    "DataError", "DivergenceError", "EngineParams", "IKError", "Mem",
    "MemEntry", "NetConfig", "NetWeights", "NormalizationStats",
    "PreprocessConfig", "ProcessedDemo", "RehearsalError", "RunConfig",
    "SnapshotError", "TeacherOracle", "Trajectory", "WorkspaceRect",
    "empty_memory", "generate", "gradient_check", "infer", "init_weights",
    "load_config", "load_corpus", "load_label_map", "load_memory",
    "make_folds", "network_sequence", "preprocess_corpus",
    "process_episode", "recognize", "rehearse", "run_training",
    "save_memory", "smoothed_signal", "train",
]
