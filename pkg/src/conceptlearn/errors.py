"""Exception hierarchy shared by all modules.

Exit-code mapping lives in the CLI: ConfigError -> 2, DataError -> 3,
DivergenceError -> 4, anything else -> 1.
"""


class ConceptLearnError(Exception):
    """Base class for all package errors."""


class ConfigError(ConceptLearnError):
    """Invalid or inconsistent configuration."""


class DataError(ConceptLearnError):
    """Problems with corpus files, caches or snapshots."""


class CorpusError(DataError):
    """Corpus directory is incomplete or unreadable."""


class CorpusParseError(CorpusError):
    """Malformed corpus row; carries file and line for diagnostics."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class DegenerateInputError(DataError):
    """Trajectory has no spatial extent (all points identical)."""


class IKError(ConceptLearnError):
    """Inverse kinematics failed to converge."""


class DivergenceError(ConceptLearnError):
    """Training or recognition produced a non-finite loss."""

    def __init__(self, message, epoch=None, learn_rate_w=None, learn_rate_pb=None):
        detail = message
        if epoch is not None:
            detail += f" (epoch={epoch}, learn_rate_w={learn_rate_w}, learn_rate_pb={learn_rate_pb})"
        super().__init__(detail)
        self.epoch = epoch
        self.learn_rate_w = learn_rate_w
        self.learn_rate_pb = learn_rate_pb


class RehearsalError(DivergenceError):
    """Memory rehearsal aborted; the memory object is left untouched."""


class SnapshotError(DataError):
    """Snapshot file is missing a valid header, has a bad checksum or a wrong version."""
