"""Hold one annotation for H frames, re-querying the provider at each window start."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator

from .render import RenderSpec, compose
from .types import AnnotationBundle, Frame

log = logging.getLogger(__name__)

Provider = Callable[[Frame], AnnotationBundle]


@dataclass(frozen=True)
class ScheduleState:
    period: int
    stream_start: int | None = None
    last_query_frame: int | None = None
    active_bundle: AnnotationBundle | None = None
    stale: bool = False
    calls: int = 0
    last_frame: int | None = None

    def __post_init__(self) -> None:
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")


def step(state: ScheduleState, frame: Frame, provider: Provider,
         spec: RenderSpec = RenderSpec()) -> tuple[Frame, ScheduleState]:
    """Annotate one frame, calling ``provider`` when a new window starts.

    Provider errors on later windows keep the previous bundle and mark the
    state stale; an error on the very first query propagates.
    """
    start = frame.index if state.stream_start is None else state.stream_start
    if state.last_frame is not None and frame.index <= state.last_frame:
        raise ValueError(f"frame {frame.index} does not follow frame {state.last_frame}")
    offset = frame.index - start
    window = offset // state.period
    due = state.active_bundle is None or window > (state.last_query_frame - start) // state.period
    if due:
        try:
            bundle = provider(frame)
        except Exception:
            if state.active_bundle is None:
                raise
            log.warning("provider failed at frame %d; reusing bundle from frame %d",
                        frame.index, state.active_bundle.query_frame, exc_info=True)
            state = replace(state, stream_start=start, last_query_frame=frame.index, stale=True,
                            calls=state.calls + 1)
        else:
            state = replace(state, stream_start=start, last_query_frame=frame.index,
                            active_bundle=bundle, stale=False, calls=state.calls + 1)
    state = replace(state, last_frame=frame.index)
    return compose(frame, state.active_bundle, spec), state


def run_stream(frames: Iterable[Frame], provider: Provider, period: int,
               spec: RenderSpec = RenderSpec()) -> Iterator[tuple[Frame, ScheduleState]]:
    state = ScheduleState(period)
    for frame in frames:
        out, state = step(state, frame, provider, spec)
        yield out, state
