"""Line detection, tracking and landmark mapping for event-camera streams."""

from ._evline import (
    CameraIntrinsics,
    __version__,
    evaluate,
    load_calibration,
    load_events,
    load_poses,
    run,
    simulate,
    write_events,
)

__all__ = [
    "CameraIntrinsics",
    "__version__",
    "evaluate",
    "load_calibration",
    "load_events",
    "load_poses",
    "run",
    "simulate",
    "write_events",
]
