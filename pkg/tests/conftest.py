from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pytest
from django.apps import apps

BoxTuple = Tuple[float, float, float, float]

FEATURE_DIM = 8
FAR_BOX = (500.0, 500.0, 10.0, 10.0)
NEAR_BOX = (0.0, 0.0, 10.0, 10.0)


class SafeImportFromContextManager:
    def __init__(
            self,
            import_path: str,
            import_names: Iterable[str],
            import_of: str = "",
    ):
        self._import_path: str = import_path
        self._import_names: Iterable[str] = import_names
        self._import_of = f"{import_of} " if import_of else ""

    def __enter__(self):
        pass

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_type is ImportError:
            disp_imp_names = "`, ".join(self._import_names)
            raise AssertionError(
                f"Make sure `{self._import_path}` has no errors. Importing "
                f"{self._import_of}`{disp_imp_names}` from it failed:\n"
                f"{exc_type.__name__}: {exc_value}"
            )


registered_apps = {app.name for app in apps.get_app_configs()}
if "tracking" not in registered_apps:
    raise AssertionError(
        "Make sure the `tracking` app is listed in INSTALLED_APPS."
    )

with SafeImportFromContextManager(
        "tracking/mot_data.py",
        ["BoundingBox", "Detection", "FrameSet", "Trajectory"],
        import_of="data types",
):
    from tracking.mot_data import (BoundingBox, Detection, FrameSet,
                                   Trajectory, TrajectoryEntry)

pytest_plugins = [
    "fixtures.detections",
    "fixtures.sequences",
    "fixtures.trajectories",
]


def unit_vector(index: int, dim: int = FEATURE_DIM) -> np.ndarray:
    vector = np.zeros(dim)
    vector[index] = 1.0
    return vector


def make_detection(
        frame: int,
        box: BoxTuple,
        feature: Optional[np.ndarray] = None,
        score: float = 1.0,
) -> Detection:
    return Detection(frame, BoundingBox(*box), score, feature)


def make_frameset(
        detections: Sequence[Detection],
        image_size: Optional[Tuple[float, float]] = None,
        length: Optional[int] = None,
        sequence: str = "TEST-01",
) -> FrameSet:
    frames: Dict[int, list] = {}
    for det in detections:
        frames.setdefault(det.frame, []).append(det)
    return FrameSet(
        sequence=sequence,
        image_size=image_size,
        frames={frame: tuple(dets) for frame, dets in sorted(frames.items())},
        length=length,
    )


def make_trajectory(
        track_id: int,
        boxes: Union[Dict[int, BoxTuple], Iterable[int]],
        box: BoxTuple = NEAR_BOX,
) -> Trajectory:
    """Trajectory from ``{frame: box}`` or from frames sharing one box."""
    if not isinstance(boxes, dict):
        boxes = {frame: box for frame in boxes}
    return Trajectory(track_id, [
        TrajectoryEntry(frame, BoundingBox(*boxes[frame]))
        for frame in sorted(boxes)
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
