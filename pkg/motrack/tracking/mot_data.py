"""MOT16-format data model and file plumbing.

Detection files are ``frame,id,x,y,w,h,score,...`` rows. Appearance
features come from a companion text file holding one whitespace-separated
vector per detection row, in the same order as the detection file.
"""
import configparser
import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import (Dict, Iterable, Iterator, List, NamedTuple, Optional,
                    TextIO, Tuple)

import numpy as np

from .constants import OUTPUT_PRECISION
from .exceptions import (AlignmentError, BoxValidationError,
                         ConsistencyError, ContractViolation, ParseError)

logger = logging.getLogger(__name__)

AppearanceFeature = np.ndarray
ImageSize = Tuple[float, float]

MIN_DETECTION_COLUMNS = 7
MIN_TRAJECTORY_COLUMNS = 6


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float):
        return cls(cx - w / 2, cy - h / 2, w, h)

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    def center(self) -> Tuple[float, float]:
        return self.x + self.w / 2, self.y + self.h / 2

    def is_valid(self) -> bool:
        return self.w > 0 and self.h > 0

    def iou(self, other: 'BoundingBox') -> float:
        if self == other:
            return 1.0
        inter_w = min(self.right, other.right) - max(self.x, other.x)
        inter_h = min(self.bottom, other.bottom) - max(self.y, other.y)
        if inter_w <= 0 or inter_h <= 0:
            return 0.0
        inter = min(inter_w * inter_h, self.area, other.area)
        return min(inter / (self.area + other.area - inter), 1.0)


def as_feature(values, dim: Optional[int] = None) -> AppearanceFeature:
    feature = np.asarray(values, dtype=np.float64).ravel()
    if dim is not None and feature.shape[0] != dim:
        raise ContractViolation(
            f'feature has {feature.shape[0]} values, expected {dim}'
        )
    if not np.all(np.isfinite(feature)) or np.linalg.norm(feature) <= 0:
        raise ContractViolation('feature must be finite with non-zero norm')
    return feature


@dataclass(frozen=True, eq=False)
class Detection:
    frame: int
    bbox: BoundingBox
    score: float = 1.0
    feature: Optional[AppearanceFeature] = None

    def __post_init__(self):
        if self.frame < 1:
            raise ContractViolation(f'frame index {self.frame} is below 1')
        if not self.bbox.is_valid():
            raise ContractViolation(f'invalid box {self.bbox}')
        if self.feature is not None:
            object.__setattr__(self, 'feature', as_feature(self.feature))


@dataclass(frozen=True)
class FrameSet:
    """Detections of one sequence grouped by 1-based frame index."""

    sequence: str = ''
    image_size: Optional[ImageSize] = None
    frames: Dict[int, Tuple[Detection, ...]] = field(default_factory=dict)
    length: Optional[int] = None

    @property
    def last_frame(self) -> int:
        return max(max(self.frames, default=0), self.length or 0)

    def frame_indices(self) -> range:
        return range(1, self.last_frame + 1)

    def __len__(self) -> int:
        return self.last_frame

    def __getitem__(self, frame: int) -> Tuple[Detection, ...]:
        return self.frames.get(frame, ())

    def __iter__(self) -> Iterator[Tuple[int, Tuple[Detection, ...]]]:
        for frame in self.frame_indices():
            yield frame, self[frame]

    def detections(self) -> List[Detection]:
        return [det for _, group in self for det in group]

    @property
    def num_detections(self) -> int:
        return sum(len(group) for group in self.frames.values())

    def bounds(self) -> ImageSize:
        """Image size, or the extent of all boxes when it is unknown."""
        if self.image_size is not None:
            return self.image_size
        boxes = [det.bbox for det in self.detections()]
        if not boxes:
            return 0.0, 0.0
        return (
            max(box.right for box in boxes),
            max(box.bottom for box in boxes),
        )


@dataclass(frozen=True)
class TrajectoryEntry:
    frame: int
    bbox: BoundingBox
    interpolated: bool = False
    flag: float = 1.0
    label: int = -1
    visibility: float = -1.0

    @property
    def ignored(self) -> bool:
        return self.flag == 0


@dataclass
class Trajectory:
    id: int
    entries: List[TrajectoryEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.id < 1:
            raise ConsistencyError(f'trajectory id {self.id} is not positive')
        frames = [entry.frame for entry in self.entries]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ConsistencyError(
                f'trajectory {self.id} frames are not strictly increasing'
            )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def start(self) -> int:
        return self.entries[0].frame

    @property
    def end(self) -> int:
        return self.entries[-1].frame

    def frames(self) -> List[int]:
        return [entry.frame for entry in self.entries]

    def box_at(self, frame: int) -> Optional[BoundingBox]:
        for entry in self.entries:
            if entry.frame == frame:
                return entry.bbox
        return None

    def detected(self) -> 'Trajectory':
        return Trajectory(
            self.id,
            [entry for entry in self.entries if not entry.interpolated],
        )


class SequenceInfo(NamedTuple):
    name: str
    image_size: Optional[ImageSize]
    length: Optional[int]


def _split_row(line: str, line_no: int, min_columns: int) -> List[float]:
    parts = [part.strip() for part in line.split(',')]
    if len(parts) < min_columns:
        raise ParseError(
            f'expected at least {min_columns} columns, got {len(parts)}',
            line_no,
        )
    try:
        return [float(part) for part in parts]
    except ValueError as exc:
        raise ParseError(f'non-numeric field ({exc})', line_no) from exc


def _integral(value: float, line_no: int, name: str) -> int:
    if not math.isfinite(value) or not value.is_integer():
        raise ParseError(f'{name} {value} is not an integer', line_no)
    return int(value)


def _row_box(values: List[float], line_no: int) -> BoundingBox:
    box = BoundingBox(*values[2:6])
    if not all(map(math.isfinite, values[2:6])) or not box.is_valid():
        raise BoxValidationError(
            f'box must be finite with positive size, got {box}',
            line_no,
        )
    return box


def _numbered_lines(stream: TextIO) -> Iterator[Tuple[int, str]]:
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if line:
            yield line_no, line


def read_features(stream: TextIO) -> List[AppearanceFeature]:
    features = []
    dim = None
    for line_no, line in _numbered_lines(stream):
        try:
            vector = np.array(line.split(), dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f'non-numeric feature ({exc})', line_no) from exc
        if dim is None:
            dim = vector.shape[0]
        elif vector.shape[0] != dim:
            raise ParseError(
                f'feature has {vector.shape[0]} values, expected {dim}',
                line_no,
            )
        if not np.all(np.isfinite(vector)) or np.linalg.norm(vector) <= 0:
            raise ParseError('feature must be finite with non-zero norm',
                             line_no)
        features.append(vector)
    return features


def parse_detections(
    stream: TextIO,
    features: Optional[TextIO] = None,
    sequence: str = '',
    image_size: Optional[ImageSize] = None,
    length: Optional[int] = None,
) -> FrameSet:
    """Read a ``det.txt``-style stream; the id column is discarded."""
    rows = []
    for line_no, line in _numbered_lines(stream):
        values = _split_row(line, line_no, MIN_DETECTION_COLUMNS)
        frame = _integral(values[0], line_no, 'frame index')
        if frame < 1:
            raise ParseError(f'invalid frame index {values[0]}', line_no)
        rows.append((frame, _row_box(values, line_no), values[6]))

    vectors: List[Optional[AppearanceFeature]] = [None] * len(rows)
    if features is not None:
        loaded = read_features(features)
        if len(loaded) != len(rows):
            raise AlignmentError(
                f'{len(loaded)} feature rows for {len(rows)} detection rows'
            )
        vectors = loaded

    grouped: Dict[int, List[Detection]] = {}
    for (frame, box, score), vector in zip(rows, vectors):
        grouped.setdefault(frame, []).append(
            Detection(frame, box, score, vector)
        )
    logger.debug('parsed %d detections over %d frames of %r',
                 len(rows), len(grouped), sequence)
    return FrameSet(
        sequence=sequence,
        image_size=image_size,
        frames={frame: tuple(grouped[frame]) for frame in sorted(grouped)},
        length=length,
    )


def filter_by_score(fs: FrameSet, threshold: float) -> FrameSet:
    return replace(fs, frames={
        frame: tuple(det for det in group if det.score >= threshold)
        for frame, group in fs.frames.items()
    })


def parse_ground_truth(stream: TextIO) -> List[Trajectory]:
    """Read ``gt.txt``-style or result rows into per-identity trajectories."""
    by_id: Dict[int, Dict[int, TrajectoryEntry]] = {}
    for line_no, line in _numbered_lines(stream):
        values = _split_row(line, line_no, MIN_TRAJECTORY_COLUMNS)
        frame = _integral(values[0], line_no, 'frame index')
        track_id = _integral(values[1], line_no, 'identity')
        if frame < 1:
            raise ParseError(f'invalid frame index {values[0]}', line_no)
        if track_id < 1:
            raise ParseError(f'identity {track_id} is not positive', line_no)
        extra = values[6:9] + [1.0, -1.0, -1.0][len(values[6:9]):]
        entries = by_id.setdefault(track_id, {})
        if frame in entries:
            raise ConsistencyError(
                f'line {line_no}: duplicate row for frame {frame}, '
                f'id {track_id}'
            )
        entries[frame] = TrajectoryEntry(
            frame=frame,
            bbox=_row_box(values, line_no),
            flag=extra[0],
            label=_integral(extra[1], line_no, 'class label'),
            visibility=extra[2],
        )
    return [
        Trajectory(track_id, [entries[f] for f in sorted(entries)])
        for track_id, entries in sorted(by_id.items())
    ]


def _fixed(value: float) -> str:
    return f'{value:.{OUTPUT_PRECISION}f}'


def write_trajectories(
    trajs: Iterable[Trajectory], stream: Optional[TextIO] = None
) -> str:
    rows = {}
    for traj in trajs:
        for entry in traj.entries:
            key = (entry.frame, traj.id)
            if key in rows:
                raise ConsistencyError(
                    f'duplicate output row for frame {entry.frame}, '
                    f'id {traj.id}'
                )
            box = entry.bbox
            rows[key] = ','.join([
                str(entry.frame), str(traj.id),
                _fixed(box.x), _fixed(box.y), _fixed(box.w), _fixed(box.h),
                '1', '-1', '-1', '-1',
            ])
    text = ''.join(rows[key] + '\n' for key in sorted(rows))
    if stream is not None:
        stream.write(text)
    return text


def write_detections(fs: FrameSet, stream: Optional[TextIO] = None) -> str:
    lines = []
    for det in fs.detections():
        box = det.bbox
        values = (box.x, box.y, box.w, box.h, det.score)
        lines.append(
            f'{det.frame},-1,'
            + ','.join(repr(float(value)) for value in values)
            + ',-1,-1,-1\n'
        )
    text = ''.join(lines)
    if stream is not None:
        stream.write(text)
    return text


def write_features(fs: FrameSet, stream: Optional[TextIO] = None) -> str:
    """Feature rows aligned with :func:`write_detections` output."""
    detections = fs.detections()
    if any(det.feature is None for det in detections):
        raise ContractViolation('every detection needs a feature to dump')
    buffer = io.StringIO()
    if detections:
        np.savetxt(buffer, np.vstack([det.feature for det in detections]),
                   fmt='%.17g')
    text = buffer.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def load_seqinfo(path: Path) -> SequenceInfo:
    parser = configparser.ConfigParser(interpolation=None)
    if not parser.read(path):
        raise ParseError(f'cannot read {path}')
    if not parser.has_section('Sequence'):
        raise ParseError(f'{path} has no [Sequence] section')
    section = parser['Sequence']
    try:
        width = section.getfloat('imWidth')
        height = section.getfloat('imHeight')
        length = section.getint('seqLength')
    except ValueError as exc:
        raise ParseError(f'{path}: {exc}') from exc
    image_size = (width, height) if width and height else None
    return SequenceInfo(
        name=section.get('name', Path(path).parent.name),
        image_size=image_size,
        length=length,
    )


def write_seqinfo(info: SequenceInfo, path: Path) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser['Sequence'] = {'name': info.name}
    if info.image_size is not None:
        parser['Sequence']['imWidth'] = str(int(info.image_size[0]))
        parser['Sequence']['imHeight'] = str(int(info.image_size[1]))
    if info.length is not None:
        parser['Sequence']['seqLength'] = str(info.length)
    with open(path, 'w', encoding='utf-8') as handle:
        parser.write(handle)


def read_sequence(
    detections: Path,
    features: Optional[Path] = None,
    seqinfo: Optional[Path] = None,
    sequence: Optional[str] = None,
    image_size: Optional[ImageSize] = None,
) -> FrameSet:
    length = None
    if seqinfo is not None:
        info = load_seqinfo(seqinfo)
        sequence = sequence or info.name
        image_size = info.image_size or image_size
        length = info.length
    with open(detections, encoding='utf-8') as det_stream:
        if features is None:
            return parse_detections(det_stream, None, sequence or '',
                                    image_size, length)
        with open(features, encoding='utf-8') as feature_stream:
            return parse_detections(det_stream, feature_stream,
                                    sequence or '', image_size, length)


def read_trajectories(path: Path) -> List[Trajectory]:
    with open(path, encoding='utf-8') as stream:
        return parse_ground_truth(stream)
