"""Exception types raised by the annotation pipeline."""

from __future__ import annotations


class PeekError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(PeekError, ValueError):
    """A configuration value is outside its allowed range."""


class DatasetError(PeekError):
    """A dataset directory is malformed.

    Carries the trajectory id and offending file so batch reports can point at
    the exact input that failed.
    """

    def __init__(self, message: str, traj_id: str | None = None, path: str | None = None):
        self.traj_id = traj_id
        self.path = path
        parts = [message]
        if traj_id is not None:
            parts.append(f"trajectory={traj_id}")
        if path is not None:
            parts.append(f"file={path}")
        super().__init__(" ".join(parts))


class AlignmentError(PeekError):
    """Per-frame inputs disagree about the trajectory length."""


class TrajectorySkipped(PeekError):
    """The trajectory cannot be annotated and should be skipped with a reason."""


class UnrecoverableTrajectoryError(TrajectorySkipped):
    """No gripper detection anywhere in the trajectory."""


class EmptyRelevanceError(TrajectorySkipped):
    """No tracked point moved enough to count as task-relevant."""


class ParseError(PeekError, ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


class ScriptError(PeekError, ValueError):
    """An invalid synthetic scene script."""


class EvaluationError(PeekError):
    """Prediction and ground-truth corpora share no samples."""
