"""CLEAR-MOT evaluation with IoU matching."""
import logging
from dataclasses import dataclass, field, fields
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from .assignment import solve_max_gated
from .constants import (IOU_THRESHOLD, MOSTLY_LOST_RATIO,
                        MOSTLY_TRACKED_RATIO)
from .exceptions import ConfigError
from .mot_data import BoundingBox, FrameSet, Trajectory, TrajectoryEntry

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ('MT', 'ML', 'FP', 'FN', 'IDS', 'FM', 'MOTA', 'MOTP')
OVERALL = 'OVERALL'


@dataclass(frozen=True)
class MotCounts:
    """Additive evaluation counts; sums of counts are again counts."""

    gt_boxes: int = 0
    fp: int = 0
    fn: int = 0
    ids: int = 0
    fm: int = 0
    matches: int = 0
    iou_sum: float = 0.0
    gt_ids: int = 0
    mostly_tracked: int = 0
    mostly_lost: int = 0

    def __add__(self, other: 'MotCounts') -> 'MotCounts':
        return MotCounts(**{
            f.name: getattr(self, f.name) + getattr(other, f.name)
            for f in fields(self)
        })

    @property
    def mota(self) -> float:
        errors = self.fp + self.fn + self.ids
        return 100.0 * (1 - errors / max(self.gt_boxes, 1))

    @property
    def motp(self) -> float:
        if not self.matches:
            return 0.0
        return 100.0 * self.iou_sum / self.matches

    @property
    def mt(self) -> float:
        if not self.gt_ids:
            return 0.0
        return 100.0 * self.mostly_tracked / self.gt_ids

    @property
    def ml(self) -> float:
        if not self.gt_ids:
            return 0.0
        return 100.0 * self.mostly_lost / self.gt_ids

    def row(self) -> Dict[str, float]:
        return {
            'MT': self.mt, 'ML': self.ml, 'FP': self.fp, 'FN': self.fn,
            'IDS': self.ids, 'FM': self.fm, 'MOTA': self.mota,
            'MOTP': self.motp,
        }


@dataclass(frozen=True)
class MotMetrics:
    counts: MotCounts = field(default_factory=MotCounts)
    sequences: Dict[str, MotCounts] = field(default_factory=dict)

    @property
    def fp(self) -> int:
        return self.counts.fp

    @property
    def fn(self) -> int:
        return self.counts.fn

    @property
    def ids(self) -> int:
        return self.counts.ids

    @property
    def fm(self) -> int:
        return self.counts.fm

    @property
    def mt(self) -> float:
        return self.counts.mt

    @property
    def ml(self) -> float:
        return self.counts.ml

    @property
    def mota(self) -> float:
        return self.counts.mota

    @property
    def motp(self) -> float:
        return self.counts.motp


def fold(results: Iterable[MotMetrics]) -> MotMetrics:
    """Combine per-sequence evaluations; order does not matter."""
    total = MotCounts()
    sequences: Dict[str, MotCounts] = {}
    for result in results:
        total = total + result.counts
        for name, counts in result.sequences.items():
            sequences[name] = sequences.get(name, MotCounts()) + counts
    return MotMetrics(total, dict(sorted(sequences.items())))


def _check_threshold(iou_threshold: float) -> None:
    if not 0 < iou_threshold <= 1:
        raise ConfigError(
            f'iou threshold must lie in (0, 1], got {iou_threshold}'
        )


def _by_frame(
    trajs: Sequence[Trajectory], skip_ignored: bool
) -> Dict[int, Dict[int, BoundingBox]]:
    frames: Dict[int, Dict[int, BoundingBox]] = {}
    for traj in trajs:
        for entry in traj.entries:
            if skip_ignored and entry.ignored:
                continue
            frames.setdefault(entry.frame, {})[traj.id] = entry.bbox
    return frames


def _match_frame(
    gts: Dict[int, BoundingBox],
    hyps: Dict[int, BoundingBox],
    last_hyp: Dict[int, int],
    iou_threshold: float,
) -> Dict[int, int]:
    """Ground-truth id to hypothesis id correspondences of one frame."""
    pairs: Dict[int, int] = {}
    # Keep last correspondences that are still valid.
    for gid, gbox in gts.items():
        hid = last_hyp.get(gid)
        if (hid in hyps and hid not in pairs.values()
                and gbox.iou(hyps[hid]) >= iou_threshold):
            pairs[gid] = hid

    free_gts = [gid for gid in sorted(gts) if gid not in pairs]
    taken = set(pairs.values())
    free_hyps = [hid for hid in sorted(hyps) if hid not in taken]
    if free_gts and free_hyps:
        overlap = np.array([
            [gts[gid].iou(hyps[hid]) for hid in free_hyps]
            for gid in free_gts
        ])
        overlap[overlap < iou_threshold] = 0.0
        solved = solve_max_gated(overlap, iou_threshold)
        for row, col in solved.matches:
            pairs[free_gts[row]] = free_hyps[col]
    return pairs


def evaluate(
    gt: Sequence[Trajectory],
    hyp: Sequence[Trajectory],
    iou_threshold: float = IOU_THRESHOLD,
    sequence: str = '',
) -> MotMetrics:
    _check_threshold(iou_threshold)
    gt_frames = _by_frame(gt, skip_ignored=True)
    hyp_frames = _by_frame(hyp, skip_ignored=False)

    fp = fn = ids = matches = 0
    iou_sum = 0.0
    last_hyp: Dict[int, int] = {}
    tracked: Dict[int, List[bool]] = {}

    for frame in sorted(set(gt_frames) | set(hyp_frames)):
        gts = gt_frames.get(frame, {})
        hyps = hyp_frames.get(frame, {})
        pairs = _match_frame(gts, hyps, last_hyp, iou_threshold)

        for gid in gts:
            tracked.setdefault(gid, []).append(gid in pairs)
        for gid, hid in pairs.items():
            if gid in last_hyp and last_hyp[gid] != hid:
                ids += 1
            last_hyp[gid] = hid
            iou_sum += gts[gid].iou(hyps[hid])
        matches += len(pairs)
        fn += len(gts) - len(pairs)
        fp += len(hyps) - len(pairs)

    fm = sum(_fragmentations(history) for history in tracked.values())
    ratios = [sum(history) / len(history) for history in tracked.values()]
    mostly_tracked = sum(r >= MOSTLY_TRACKED_RATIO for r in ratios)
    mostly_lost = sum(r <= MOSTLY_LOST_RATIO for r in ratios)

    counts = MotCounts(
        gt_boxes=sum(len(gts) for gts in gt_frames.values()),
        fp=fp, fn=fn, ids=ids, fm=fm,
        matches=matches, iou_sum=iou_sum,
        gt_ids=len(tracked),
        mostly_tracked=mostly_tracked, mostly_lost=mostly_lost,
    )
    logger.debug('evaluated %r: %s', sequence, counts.row())
    return MotMetrics(counts, {sequence: counts} if sequence else {})


def _fragmentations(history: List[bool]) -> int:
    """Count resumptions of tracking after an interruption."""
    count = 0
    seen_match = interrupted = False
    for matched in history:
        if matched:
            if seen_match and interrupted:
                count += 1
            seen_match, interrupted = True, False
        elif seen_match:
            interrupted = True
    return count


class DetectionCounts(NamedTuple):
    fp: int
    fn: int
    total: int


def detection_pr(
    gt: Sequence[Trajectory],
    detections: FrameSet,
    iou_threshold: float = IOU_THRESHOLD,
) -> DetectionCounts:
    """FP and FN of raw detections, each one its own single-box track."""
    hyp = [
        Trajectory(track_id, [TrajectoryEntry(det.frame, det.bbox)])
        for track_id, det in enumerate(detections.detections(), start=1)
    ]
    counts = evaluate(gt, hyp, iou_threshold).counts
    return DetectionCounts(counts.fp, counts.fn, counts.fp + counts.fn)


def summary_frame(metrics: MotMetrics) -> pd.DataFrame:
    rows = {name: counts.row() for name, counts in metrics.sequences.items()}
    rows[OVERALL] = metrics.counts.row()
    frame = pd.DataFrame.from_dict(rows, orient='index',
                                   columns=list(SUMMARY_COLUMNS))
    frame.index.name = 'Sequence'
    return frame


def summary_table(metrics: MotMetrics, label: Optional[str] = None) -> str:
    """Fixed-column table in MT, ML, FP, FN, IDS, FM, MOTA, MOTP order."""
    frame = summary_frame(metrics)
    if label:
        frame.index.name = label
    formatters = {
        'MT': '{:.2f}%'.format,
        'ML': '{:.2f}%'.format,
        'MOTA': '{:.1f}'.format,
        'MOTP': '{:.1f}'.format,
    }
    for column in ('FP', 'FN', 'IDS', 'FM'):
        formatters[column] = '{:d}'.format
    return frame.to_string(formatters=formatters) + '\n'


def summary_key_values(metrics: MotMetrics) -> str:
    lines = []
    for name, row in summary_frame(metrics).iterrows():
        for column in SUMMARY_COLUMNS:
            value = row[column]
            if column in ('FP', 'FN', 'IDS', 'FM'):
                value = int(value)
            lines.append(f'{name}.{column}={value}')
    return '\n'.join(lines) + '\n'
