"""Online tracker: quality-split two-stage matching, frame by frame."""
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from .affinity import AffinityParams, affinity_matrix
from .assignment import solve_max_gated
from .constants import (AGGREGATION_AVERAGE, AGGREGATION_MODES,
                        AGGREGATION_RUNNING, TAU_ASSOCIATION, TAU_MISSING,
                        TAU_QUALITY)
from .exceptions import ConfigError, ContractViolation, SequencingError
from .mot_data import (AppearanceFeature, BoundingBox, Detection, FrameSet,
                       ImageSize, Trajectory, TrajectoryEntry)
from .motion import (MotionNoiseConfig, MotionState, init_motion, predict,
                     snapshot, update)

logger = logging.getLogger(__name__)


class TrackState(enum.Enum):
    ACTIVE = 'active'
    LOST = 'lost'
    FINISHED = 'finished'


@dataclass(frozen=True)
class OnlineConfig:
    affinity: AffinityParams = field(default_factory=AffinityParams)
    tau_t: float = TAU_QUALITY
    tau_a: float = TAU_ASSOCIATION
    tau_m: int = TAU_MISSING
    aggregation: str = AGGREGATION_AVERAGE
    motion: MotionNoiseConfig = field(default_factory=MotionNoiseConfig)

    def __post_init__(self):
        errors = []
        if not 0 <= self.tau_t <= 1:
            errors.append(f'tau_t must lie in [0, 1], got {self.tau_t}')
        if not -1 <= self.tau_a <= 1:
            errors.append(f'tau_a must lie in [-1, 1], got {self.tau_a}')
        if self.tau_m < 1:
            errors.append(f'tau_m must be >= 1, got {self.tau_m}')
        if self.aggregation not in AGGREGATION_MODES:
            errors.append(f'unknown aggregation mode {self.aggregation!r}')
        if errors:
            raise ConfigError(errors)


class Tracklet:
    """A live or finished track and the detections associated with it."""

    def __init__(self, track_id: int, detection: Detection,
                 noise: MotionNoiseConfig):
        if detection.feature is None:
            raise ContractViolation(
                f'detection at frame {detection.frame} has no feature'
            )
        self.id = track_id
        self.motion: MotionState = init_motion(detection, noise)
        self.feature: AppearanceFeature = _normalized(detection.feature)
        self.couples: List[float] = []
        self.frames_since_match = 0
        self.state = TrackState.ACTIVE
        self.detections: List[Detection] = [detection]

    def __repr__(self):
        return (f'Tracklet(id={self.id}, length={self.length}, '
                f'state={self.state.value})')

    @property
    def length(self) -> int:
        return len(self.couples)

    @property
    def last_frame(self) -> int:
        return self.detections[-1].frame

    @property
    def is_finished(self) -> bool:
        return self.state is TrackState.FINISHED

    def boxes(self) -> List[Tuple[int, BoundingBox]]:
        return [(det.frame, det.bbox) for det in self.detections]

    def to_trajectory(self) -> Trajectory:
        return Trajectory(self.id, [
            TrajectoryEntry(frame, box) for frame, box in self.boxes()
        ])


def quality(t: Tracklet, w3: float) -> float:
    """Mean association affinity saturated by tracklet length."""
    if t.length == 0:
        return 0.0
    saturation = 1 - math.exp(-w3 * math.sqrt(t.length))
    return float(np.mean(t.couples)) * saturation


def _normalized(feature: AppearanceFeature) -> AppearanceFeature:
    return feature / np.linalg.norm(feature)


def aggregate_feature(
    old: AppearanceFeature, new: AppearanceFeature, old_weight: float = 1.0
) -> AppearanceFeature:
    """Weighted mean of two features, renormalized to unit length.

    If the mean vanishes (old is exactly -new) the old feature is kept.
    """
    old = np.asarray(old, dtype=np.float64)
    new = np.asarray(new, dtype=np.float64)
    if old.shape != new.shape:
        raise ContractViolation(
            f'feature dimensions differ: {old.shape} vs {new.shape}'
        )
    mean = (old_weight * old + new) / (old_weight + 1)
    norm = np.linalg.norm(mean)
    if norm == 0:
        return _normalized(old)
    return mean / norm


@dataclass
class StepResult:
    frame: int
    stage1: List[Tuple[int, int]] = field(default_factory=list)
    stage2: List[Tuple[int, int]] = field(default_factory=list)
    new_ids: List[int] = field(default_factory=list)
    finished_ids: List[int] = field(default_factory=list)
    outputs: List[Tuple[int, BoundingBox]] = field(default_factory=list)

    @property
    def matches(self) -> List[Tuple[int, int]]:
        """(tracklet id, detection index) pairs of both stages."""
        return self.stage1 + self.stage2


def _match_subset(matrix, rows, cols, tau) -> List[Tuple[int, int]]:
    if not rows or not cols:
        return []
    result = solve_max_gated(matrix[np.ix_(rows, cols)], tau)
    return [(rows[i], cols[j]) for i, j in result.matches]


def _inside(center: Tuple[float, float], bounds: ImageSize) -> bool:
    x, y = center
    return 0 <= x < bounds[0] and 0 <= y < bounds[1]


class OnlineTracker:
    """Tracker state for one sequence; feed frames in increasing order."""

    def __init__(self, cfg: OnlineConfig, bounds: ImageSize,
                 tracklets: Optional[Sequence[Tracklet]] = None,
                 next_id: Optional[int] = None):
        self.cfg = cfg
        self.bounds = bounds
        self.tracklets: List[Tracklet] = list(tracklets or [])
        self.finished: List[Tracklet] = []
        self.next_id = next_id or max(
            (t.id for t in self.tracklets), default=0
        ) + 1
        self.last_frame = 0

    def _new_tracklet(self, detection: Detection) -> Tracklet:
        tracklet = Tracklet(self.next_id, detection, self.cfg.motion)
        self.next_id += 1
        return tracklet

    def _associate(self, tracklet: Tracklet, prior: MotionState,
                   detection: Detection, affinity: float) -> None:
        tracklet.couples.append(affinity)
        tracklet.motion = update(prior, detection)
        weight = 1.0
        if self.cfg.aggregation == AGGREGATION_RUNNING:
            weight = float(len(tracklet.detections))
        tracklet.feature = aggregate_feature(
            tracklet.feature, _normalized(detection.feature), weight
        )
        tracklet.detections.append(detection)
        tracklet.frames_since_match = 0
        tracklet.state = TrackState.ACTIVE

    def _check_input(self, frame: int,
                     detections: Sequence[Detection]) -> None:
        if frame <= self.last_frame:
            raise SequencingError(
                f'frame {frame} fed after frame {self.last_frame}'
            )
        for det in detections:
            if det.frame != frame:
                raise SequencingError(
                    f'detection of frame {det.frame} fed as frame {frame}'
                )
            if det.feature is None:
                raise ContractViolation(
                    f'detection at frame {det.frame} carries no feature'
                )

    def _split_by_quality(self) -> Tuple[List[int], List[int]]:
        high, low = [], []
        for i, tracklet in enumerate(self.tracklets):
            if quality(tracklet, self.cfg.affinity.w3) > self.cfg.tau_t:
                high.append(i)
            else:
                low.append(i)
        return high, low

    def _mark_missed(self, priors: Sequence[MotionState],
                     matched_rows: Set[int]) -> None:
        for row, tracklet in enumerate(self.tracklets):
            if row in matched_rows:
                continue
            tracklet.motion = priors[row]
            tracklet.frames_since_match += 1
            tracklet.state = TrackState.LOST
            if tracklet.frames_since_match > self.cfg.tau_m:
                tracklet.state = TrackState.FINISHED

    def _retire(self, result: StepResult) -> None:
        alive = []
        for tracklet in self.tracklets:
            if not tracklet.is_finished and not _inside(
                tracklet.motion.center, self.bounds
            ):
                tracklet.state = TrackState.FINISHED
            if tracklet.is_finished:
                self.finished.append(tracklet)
                result.finished_ids.append(tracklet.id)
            else:
                alive.append(tracklet)
        self.tracklets = alive

    def step(self, frame: int, detections: Sequence[Detection]) -> StepResult:
        self._check_input(frame, detections)
        self.last_frame = frame
        result = StepResult(frame)
        cfg = self.cfg

        priors = [predict(t.motion) for t in self.tracklets]
        matrix = affinity_matrix(
            [snapshot(prior, t.feature)
             for prior, t in zip(priors, self.tracklets)],
            detections,
            cfg.affinity,
        )
        high, low = self._split_by_quality()

        columns = list(range(len(detections)))
        stage1 = _match_subset(matrix, high, columns, cfg.tau_a)
        matched_rows = {row for row, _ in stage1}
        matched_cols = {col for _, col in stage1}
        stage2 = _match_subset(
            matrix,
            sorted([i for i in high if i not in matched_rows] + low),
            [j for j in columns if j not in matched_cols],
            cfg.tau_a,
        )
        matched_rows.update(row for row, _ in stage2)
        matched_cols.update(col for _, col in stage2)

        for stage, pairs in ((result.stage1, stage1), (result.stage2, stage2)):
            for row, col in pairs:
                tracklet = self.tracklets[row]
                self._associate(tracklet, priors[row], detections[col],
                                float(matrix[row, col]))
                stage.append((tracklet.id, col))
                result.outputs.append((tracklet.id, detections[col].bbox))

        self._mark_missed(priors, matched_rows)

        for col in columns:
            if col in matched_cols:
                continue
            tracklet = self._new_tracklet(detections[col])
            self.tracklets.append(tracklet)
            result.new_ids.append(tracklet.id)
            result.outputs.append((tracklet.id, detections[col].bbox))

        self._retire(result)

        logger.debug(
            'frame %d: %d high / %d low tracklets, %d + %d matches, '
            '%d new, %d finished',
            frame, len(high), len(low), len(stage1), len(stage2),
            len(result.new_ids), len(result.finished_ids),
        )
        return result

    def all_tracklets(self) -> List[Tracklet]:
        return sorted(self.finished + self.tracklets, key=lambda t: t.id)


def track_frames(
    fs: FrameSet,
    cfg: OnlineConfig,
    frames: Optional[Sequence[int]] = None,
    bounds: Optional[ImageSize] = None,
) -> List[Tracklet]:
    """Run the online tracker over ``frames`` (all frames by default)."""
    tracker = OnlineTracker(cfg, bounds or fs.bounds())
    for frame in (fs.frame_indices() if frames is None else frames):
        tracker.step(frame, fs[frame])
    return tracker.all_tracklets()


def run_online(fs: FrameSet, cfg: OnlineConfig) -> List[Trajectory]:
    tracklets = track_frames(fs, cfg)
    trajectories = [t.to_trajectory() for t in tracklets]
    logger.info('online: %d trajectories over %d frames of %r',
                len(trajectories), len(fs), fs.sequence)
    return trajectories
