"""Offline tracker: segment, track inside segments, then merge upwards.

Tracklet linking inside a merged segment is a greedy global-best pairwise
rule: the admissible pair with the highest combined affinity is linked
first, affinities involving the new tracklet are recomputed and the loop
repeats until no pair reaches ``tau_link``. No higher-order affinities
are used.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (BIG_TARGET_MODES, BIG_TARGET_REDUCE,
                        BIG_TARGET_REJECT, LINK_TIE_DECIMALS,
                        MAX_INTERPOLATION_GAP, MAX_LINK_GAP, MERGE_FAN_IN,
                        REDUCED_WEIGHT, SEGMENT_LENGTH, SMOOTHNESS_EPS,
                        TAU_HEIGHT_RATIO, TAU_LINK, TAU_SCALE,
                        VELOCITY_WINDOW)
from .exceptions import ConfigError, ContractViolation
from .mot_data import (AppearanceFeature, BoundingBox, Detection, FrameSet,
                       Trajectory, TrajectoryEntry)
from .online_tracker import OnlineConfig, track_frames

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OfflineConfig:
    online: OnlineConfig = field(default_factory=OnlineConfig)
    segment_length: int = SEGMENT_LENGTH
    merge_fan_in: int = MERGE_FAN_IN
    tau_link: float = TAU_LINK
    tau_s: float = TAU_SCALE
    tau_r: float = TAU_HEIGHT_RATIO
    reduced_weight: float = REDUCED_WEIGHT
    max_link_gap: int = MAX_LINK_GAP
    max_interpolation_gap: int = MAX_INTERPOLATION_GAP
    big_target_mode: str = BIG_TARGET_REDUCE

    def __post_init__(self):
        errors = []
        if self.segment_length < 2:
            errors.append(
                f'segment_length must be >= 2, got {self.segment_length}'
            )
        if self.merge_fan_in < 2:
            errors.append(
                f'merge_fan_in must be >= 2, got {self.merge_fan_in}'
            )
        for name in ('tau_s', 'tau_r', 'reduced_weight'):
            value = getattr(self, name)
            if not 0 < value <= 1:
                errors.append(f'{name} must lie in (0, 1], got {value}')
        if not 0 <= self.tau_link <= 1:
            errors.append(f'tau_link must lie in [0, 1], got {self.tau_link}')
        for name in ('max_link_gap', 'max_interpolation_gap'):
            if getattr(self, name) < 0:
                errors.append(f'{name} must be >= 0')
        if self.big_target_mode not in BIG_TARGET_MODES:
            errors.append(
                f'unknown big_target_mode {self.big_target_mode!r}'
            )
        if errors:
            raise ConfigError(errors)

    @property
    def affinity(self):
        return self.online.affinity


class LinkTracklet:
    """Detections linked into one identity, oldest first."""

    def __init__(self, detections: Sequence[Detection]):
        if not detections:
            raise ContractViolation('a tracklet needs at least one detection')
        if any(det.feature is None for det in detections):
            raise ContractViolation('offline linking needs features')
        self.detections: List[Detection] = list(detections)
        self.feature_sum = np.sum(
            [det.feature / np.linalg.norm(det.feature)
             for det in detections],
            axis=0,
        )

    def __len__(self):
        return len(self.detections)

    def __repr__(self):
        return f'LinkTracklet(frames={self.start}..{self.end}, n={len(self)})'

    @property
    def start(self) -> int:
        return self.detections[0].frame

    @property
    def end(self) -> int:
        return self.detections[-1].frame

    @cached_property
    def feature(self) -> AppearanceFeature:
        norm = np.linalg.norm(self.feature_sum)
        if norm == 0:
            return self.detections[-1].feature
        return self.feature_sum / norm

    @cached_property
    def mean_area(self) -> float:
        return float(np.mean([det.bbox.area for det in self.detections]))

    @cached_property
    def mean_height(self) -> float:
        return float(np.mean([det.bbox.h for det in self.detections]))

    def _velocity(self, detections: Sequence[Detection]) -> np.ndarray:
        if len(detections) < 2:
            return np.zeros(2)
        first, last = detections[0], detections[-1]
        shift = np.subtract(last.bbox.center(), first.bbox.center())
        return shift / (last.frame - first.frame)

    def tail_velocity(self) -> np.ndarray:
        return self._velocity(self.detections[-VELOCITY_WINDOW:])

    def head_velocity(self) -> np.ndarray:
        return self._velocity(self.detections[:VELOCITY_WINDOW])

    def merged(self, other: 'LinkTracklet') -> 'LinkTracklet':
        if other.start <= self.end:
            raise ContractViolation('linked tracklets overlap in time')
        merged = LinkTracklet.__new__(LinkTracklet)
        merged.detections = self.detections + other.detections
        merged.feature_sum = self.feature_sum + other.feature_sum
        return merged

    def to_trajectory(self, track_id: int) -> Trajectory:
        return Trajectory(track_id, [
            TrajectoryEntry(det.frame, det.bbox) for det in self.detections
        ])


@dataclass
class Segment:
    start: int
    end: int
    tracklets: List[LinkTracklet] = field(default_factory=list)

    def frames(self) -> range:
        return range(self.start, self.end + 1)


@dataclass(frozen=True)
class TrackletPairAffinity:
    appearance: float = 0.0
    motion: float = 0.0
    smoothness: float = 0.0
    combined: float = 0.0
    admissible: bool = False
    big_target: bool = False


INADMISSIBLE = TrackletPairAffinity()


def tracklet_pair_affinity(
    a: LinkTracklet,
    b: LinkTracklet,
    cfg: OfflineConfig,
    image_height: Optional[float] = None,
) -> TrackletPairAffinity:
    """Affinity of appending ``b`` after ``a``."""
    gap = b.start - a.end
    if gap <= 0 or gap > cfg.max_link_gap:
        return INADMISSIBLE

    area_a, area_b = a.mean_area, b.mean_area
    if min(area_a, area_b) / max(area_a, area_b) < cfg.tau_s:
        return INADMISSIBLE

    big_target = bool(image_height) and (
        max(a.mean_height, b.mean_height) / image_height > cfg.tau_r
    )
    if big_target and cfg.big_target_mode == BIG_TARGET_REJECT:
        return INADMISSIBLE
    factor = cfg.reduced_weight if big_target else 1.0

    cosine = float(np.dot(a.feature, b.feature))
    appearance = min(max(cosine, 0.0), 1.0)

    v_a, v_b = a.tail_velocity(), b.head_velocity()
    first = b.detections[0].bbox
    predicted = np.add(a.detections[-1].bbox.center(), v_a * gap)
    dx, dy = (predicted - np.asarray(first.center())) / (first.w, first.h)
    motion = math.exp(-factor * cfg.affinity.w1 * (dx * dx + dy * dy))

    discrepancy = np.linalg.norm(v_a - v_b) / (
        np.linalg.norm(v_a) + np.linalg.norm(v_b) + SMOOTHNESS_EPS
    )
    smoothness = math.exp(-factor * float(discrepancy))

    return TrackletPairAffinity(
        appearance=appearance,
        motion=motion,
        smoothness=smoothness,
        combined=appearance * motion * smoothness,
        admissible=True,
        big_target=big_target,
    )


def segment_sequence(fs: FrameSet, cfg: OfflineConfig) -> List[Segment]:
    frames = fs.frame_indices()
    if not frames:
        return []
    return [
        Segment(start, min(start + cfg.segment_length - 1, frames[-1]))
        for start in range(frames.start, frames.stop, cfg.segment_length)
    ]


def _order(tracklet: LinkTracklet) -> Tuple[int, float, float]:
    box = tracklet.detections[0].bbox
    return tracklet.start, box.x, box.y


def _link_score(
    a: LinkTracklet,
    b: LinkTracklet,
    cfg: OfflineConfig,
    image_height: Optional[float],
) -> Optional[float]:
    pair = tracklet_pair_affinity(a, b, cfg, image_height)
    if pair.admissible and pair.combined >= cfg.tau_link:
        return pair.combined
    return None


def associate_dense_neighbors(
    tracklets: Sequence[LinkTracklet],
    cfg: OfflineConfig,
    image_height: Optional[float] = None,
) -> List[LinkTracklet]:
    """Greedily link the best admissible pair until none reaches tau_link."""
    pool: Dict[int, LinkTracklet] = dict(
        enumerate(sorted(tracklets, key=_order))
    )
    next_key = len(pool)

    def score(ka: int, kb: int) -> Optional[float]:
        return _link_score(pool[ka], pool[kb], cfg, image_height)

    scores: Dict[Tuple[int, int], float] = {}
    for ka, kb in permutations(pool, 2):
        value = score(ka, kb)
        if value is not None:
            scores[ka, kb] = value

    def priority(item: Tuple[Tuple[int, int], float]):
        # Affinities equal up to rounding tie; the shorter gap wins.
        (ka, kb), value = item
        gap = pool[kb].start - pool[ka].end
        return round(value, LINK_TIE_DECIMALS), -gap, -ka, -kb

    while scores:
        (ka, kb), value = max(scores.items(), key=priority)
        merged = pool.pop(ka).merged(pool.pop(kb))
        logger.debug('linked %r (affinity %.4f)', merged, value)
        scores = {
            pair: pair_value for pair, pair_value in scores.items()
            if ka not in pair and kb not in pair
        }
        key, next_key = next_key, next_key + 1
        pool[key] = merged
        for other in list(pool):
            if other == key:
                continue
            for pair in ((key, other), (other, key)):
                pair_value = score(*pair)
                if pair_value is not None:
                    scores[pair] = pair_value

    return sorted(pool.values(), key=_order)


def interpolate(traj: Trajectory, max_gap: int) -> Trajectory:
    """Fill gaps of at most ``max_gap`` frames with linear boxes."""
    if max_gap <= 0 or len(traj) < 2:
        return traj
    entries: List[TrajectoryEntry] = []
    for prev, nxt in zip(traj.entries, traj.entries[1:]):
        entries.append(prev)
        gap = nxt.frame - prev.frame - 1
        if not 0 < gap <= max_gap:
            continue
        start = np.array([prev.bbox.x, prev.bbox.y, prev.bbox.w,
                          prev.bbox.h])
        stop = np.array([nxt.bbox.x, nxt.bbox.y, nxt.bbox.w, nxt.bbox.h])
        for frame in range(prev.frame + 1, nxt.frame):
            alpha = (frame - prev.frame) / (nxt.frame - prev.frame)
            values = start + alpha * (stop - start)
            entries.append(TrajectoryEntry(
                frame, BoundingBox(*map(float, values)), interpolated=True
            ))
    entries.append(traj.entries[-1])
    return Trajectory(traj.id, entries)


def track_segments(fs: FrameSet, cfg: OfflineConfig) -> List[Segment]:
    """Segments of ``fs`` holding the online tracklets grown inside each."""
    bounds = fs.bounds()
    segments = segment_sequence(fs, cfg)
    for segment in segments:
        segment.tracklets = [
            LinkTracklet(tracklet.detections)
            for tracklet in track_frames(fs, cfg.online, segment.frames(),
                                         bounds)
        ]
    return segments


def merge_levels(
    segments: Sequence[Segment],
    cfg: OfflineConfig,
    image_height: Optional[float] = None,
) -> Iterator[List[Segment]]:
    """Yield the segments of every level, from the input up to one."""
    segments = list(segments)
    yield segments
    level = 0
    while len(segments) > 1:
        level += 1
        merged = []
        for i in range(0, len(segments), cfg.merge_fan_in):
            group = segments[i:i + cfg.merge_fan_in]
            members = [t for segment in group for t in segment.tracklets]
            merged.append(Segment(
                group[0].start,
                group[-1].end,
                associate_dense_neighbors(members, cfg, image_height),
            ))
        segments = merged
        logger.debug('level %d: %d segments, %d tracklets', level,
                     len(segments),
                     sum(len(s.tracklets) for s in segments))
        yield segments


def run_offline(fs: FrameSet, cfg: OfflineConfig) -> List[Trajectory]:
    image_height = fs.image_size[1] if fs.image_size else None
    *_, top = merge_levels(track_segments(fs, cfg), cfg, image_height)

    tracklets = sorted(top[0].tracklets, key=_order) if top else []
    trajectories = [
        interpolate(tracklet.to_trajectory(track_id),
                    cfg.max_interpolation_gap)
        for track_id, tracklet in enumerate(tracklets, start=1)
    ]
    logger.info('offline: %d trajectories over %d frames of %r',
                len(trajectories), len(fs), fs.sequence)
    return trajectories
