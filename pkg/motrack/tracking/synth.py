"""Seeded synthetic sequences for end-to-end checks of the trackers."""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (DETECTIONS_FILE, FEATURE_DIM, FEATURES_FILE,
                        GROUND_TRUTH_FILE, SEQINFO_FILE)
from .exceptions import SynthSpecError
from .mot_data import (BoundingBox, Detection, FrameSet, ImageSize,
                       SequenceInfo, Trajectory, TrajectoryEntry,
                       write_detections, write_features, write_seqinfo,
                       write_trajectories)

logger = logging.getLogger(__name__)

CLUTTER_WIDTH = (20.0, 80.0)
CLUTTER_ASPECT = (1.5, 3.0)
TRUE_SCORE = (0.5, 1.0)
CLUTTER_SCORE = (0.0, 0.5)


@dataclass(frozen=True)
class SynthObject:
    box: BoundingBox
    velocity: Tuple[float, float] = (0.0, 0.0)
    archetype: Optional[Tuple[float, ...]] = None
    dropouts: Tuple[Tuple[int, int], ...] = ()
    start: int = 1
    end: Optional[int] = None

    def is_dropped(self, frame: int) -> bool:
        return any(first <= frame <= last for first, last in self.dropouts)


@dataclass(frozen=True)
class SynthSpec:
    objects: Tuple[SynthObject, ...] = ()
    image_size: ImageSize = (1920.0, 1080.0)
    num_frames: int = 100
    position_jitter: float = 0.0
    feature_jitter: float = 0.0
    clutter_rate: float = 0.0
    feature_dim: int = FEATURE_DIM
    perturbation: float = 0.0
    perturbation_period: float = 25.0
    seed: int = 0
    sequence: str = 'SYNTH-01'
    separate: bool = True

    def __post_init__(self):
        errors = []
        if self.num_frames < 1:
            errors.append('num_frames must be >= 1')
        for name in ('position_jitter', 'feature_jitter', 'clutter_rate',
                     'perturbation'):
            if getattr(self, name) < 0:
                errors.append(f'{name} must be >= 0')
        if self.perturbation_period <= 0:
            errors.append('perturbation_period must be > 0')
        if len(self.objects) > self.feature_dim:
            errors.append(
                f'{len(self.objects)} objects need more than '
                f'{self.feature_dim} feature dimensions'
            )
        for index, obj in enumerate(self.objects, start=1):
            errors.extend(self._object_errors(index, obj))
        if errors:
            raise SynthSpecError(errors)

    def last_frame(self, obj: SynthObject) -> int:
        return min(obj.end or self.num_frames, self.num_frames)

    def box_at(self, obj: SynthObject, frame: int) -> BoundingBox:
        elapsed = frame - obj.start
        offset = self.perturbation * math.sin(
            2 * math.pi * elapsed / self.perturbation_period
        )
        return BoundingBox(
            obj.box.x + obj.velocity[0] * elapsed,
            obj.box.y + obj.velocity[1] * elapsed + offset,
            obj.box.w,
            obj.box.h,
        )

    def _object_errors(self, index: int, obj: SynthObject) -> List[str]:
        errors = []
        if not obj.box.is_valid():
            errors.append(f'object {index}: box must have positive size')
            return errors
        if obj.archetype is not None:
            if len(obj.archetype) != self.feature_dim:
                errors.append(f'object {index}: archetype length differs '
                              f'from feature_dim {self.feature_dim}')
            elif not np.linalg.norm(obj.archetype) > 0:
                errors.append(f'object {index}: archetype is a zero vector')
        width, height = self.image_size
        for frame in range(obj.start, self.last_frame(obj) + 1):
            box = self.box_at(obj, frame)
            if box.x < 0 or box.y < 0 or box.right > width or (
                box.bottom > height
            ):
                errors.append(
                    f'object {index} leaves the image at frame {frame}'
                )
                break
        return errors


def _archetypes(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    count = len(spec.objects)
    if count == 0:
        return np.zeros((0, spec.feature_dim))
    basis, _ = np.linalg.qr(rng.standard_normal((spec.feature_dim, count)))
    archetypes = basis.T.copy()
    for i, obj in enumerate(spec.objects):
        if obj.archetype is not None:
            vector = np.asarray(obj.archetype, dtype=np.float64)
            archetypes[i] = vector / np.linalg.norm(vector)
    if spec.separate:
        cosine = np.abs(archetypes @ archetypes.T - np.eye(count))
        if count > 1 and cosine.max() >= 1 - 1e-9:
            raise SynthSpecError('object archetypes are collinear')
    return archetypes


def _feature(rng, archetype: np.ndarray, jitter: float) -> np.ndarray:
    vector = archetype + jitter * rng.standard_normal(archetype.shape[0])
    norm = np.linalg.norm(vector)
    return vector / norm if norm > 0 else archetype


def _jittered(rng, box: BoundingBox, sigma: float) -> BoundingBox:
    dx, dy, dw, dh = rng.normal(0.0, sigma, 4)
    return BoundingBox(box.x + dx, box.y + dy,
                       max(box.w + dw, 1.0), max(box.h + dh, 1.0))


def _clutter(rng, spec: SynthSpec, frame: int) -> Detection:
    width, height = spec.image_size
    w = min(rng.uniform(*CLUTTER_WIDTH), width / 2)
    h = min(w * rng.uniform(*CLUTTER_ASPECT), height / 2)
    box = BoundingBox(rng.uniform(0, width - w), rng.uniform(0, height - h),
                      w, h)
    feature = rng.standard_normal(spec.feature_dim)
    return Detection(frame, box, float(rng.uniform(*CLUTTER_SCORE)),
                     feature / np.linalg.norm(feature))


def generate(spec: SynthSpec) -> Tuple[List[Trajectory], FrameSet]:
    """Ground truth plus jittered, dropped and cluttered detections."""
    rng = np.random.default_rng(spec.seed)
    archetypes = _archetypes(spec, rng)
    entries: Dict[int, List[TrajectoryEntry]] = {
        i: [] for i in range(len(spec.objects))
    }
    frames: Dict[int, Tuple[Detection, ...]] = {}

    for frame in range(1, spec.num_frames + 1):
        group = []
        for i, obj in enumerate(spec.objects):
            if not obj.start <= frame <= spec.last_frame(obj):
                continue
            box = spec.box_at(obj, frame)
            entries[i].append(TrajectoryEntry(frame, box))
            if obj.is_dropped(frame):
                continue
            group.append(Detection(
                frame,
                _jittered(rng, box, spec.position_jitter),
                float(rng.uniform(*TRUE_SCORE)),
                _feature(rng, archetypes[i], spec.feature_jitter),
            ))
        for _ in range(rng.poisson(spec.clutter_rate)):
            group.append(_clutter(rng, spec, frame))
        frames[frame] = tuple(group)

    gt = [
        Trajectory(i + 1, entries[i])
        for i in range(len(spec.objects)) if entries[i]
    ]
    fs = FrameSet(
        sequence=spec.sequence,
        image_size=spec.image_size,
        frames=frames,
        length=spec.num_frames,
    )
    logger.debug('generated %d objects, %d detections for %r',
                 len(gt), fs.num_detections, spec.sequence)
    return gt, fs


def lane_layout(
    num_objects: int,
    num_frames: int = 100,
    image_size: ImageSize = (1920.0, 1080.0),
    dropout_length: int = 0,
    **options,
) -> SynthSpec:
    """Objects on horizontal lanes, alternating direction.

    Each object gets one dropout window of ``dropout_length`` frames in the
    middle of the sequence.
    """
    width, height = image_size
    lane = height / (num_objects + 1)
    box_h = 0.4 * lane
    box_w = box_h / 2.5
    speed = 0.6 * (width - box_w) / max(num_frames, 1)
    dropouts: Tuple[Tuple[int, int], ...] = ()
    if dropout_length > 0:
        first = max(2, (num_frames - dropout_length) // 2)
        dropouts = ((first, first + dropout_length - 1),)

    objects = []
    for i in range(num_objects):
        y = lane * (i + 1) - box_h / 2
        if i % 2:
            x, velocity = 0.8 * (width - box_w), -speed
        else:
            x, velocity = 0.1 * (width - box_w), speed
        objects.append(SynthObject(
            box=BoundingBox(x, y, box_w, box_h),
            velocity=(velocity, 0.0),
            dropouts=dropouts,
        ))
    return SynthSpec(
        objects=tuple(objects),
        image_size=image_size,
        num_frames=num_frames,
        **options,
    )


def dump_sequence(
    gt: Sequence[Trajectory], fs: FrameSet, directory: Path
) -> Path:
    """Write a MOT16-style sequence folder and return its path."""
    directory = Path(directory)
    (directory / DETECTIONS_FILE).parent.mkdir(parents=True, exist_ok=True)
    (directory / GROUND_TRUTH_FILE).parent.mkdir(parents=True, exist_ok=True)
    write_seqinfo(
        SequenceInfo(fs.sequence or directory.name, fs.image_size,
                     fs.length),
        directory / SEQINFO_FILE,
    )
    with open(directory / DETECTIONS_FILE, 'w', encoding='utf-8') as stream:
        write_detections(fs, stream)
    with open(directory / FEATURES_FILE, 'w', encoding='utf-8') as stream:
        write_features(fs, stream)
    with open(directory / GROUND_TRUTH_FILE, 'w', encoding='utf-8') as stream:
        write_trajectories(gt, stream)
    logger.info('wrote synthetic sequence %r to %s', fs.sequence, directory)
    return directory
