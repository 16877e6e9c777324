"""Binds ingestion, trackers, metrics and the generator into one run."""
import logging
import sys
from pathlib import Path
from typing import List, NamedTuple, Optional, TextIO

import pandas as pd

from .config import RunConfig, write_resolved
from .constants import (DETECTIONS_FILE, EXIT_OK, FEATURES_FILE,
                        GROUND_TRUTH_FILE, METRICS_KEY_VALUE_FILE,
                        METRICS_TABLE_FILE, MODE_DETECTION_PR, MODE_EVALUATE,
                        MODE_OFFLINE, MODE_ONLINE, MODE_SYNTH, SEQINFO_FILE)
from .exceptions import DataError
from .metrics import (MotMetrics, detection_pr, evaluate, fold,
                      summary_key_values, summary_table)
from .mot_data import (FrameSet, filter_by_score, read_sequence,
                       read_trajectories, write_trajectories)
from .offline_tracker import run_offline
from .online_tracker import run_online
from .synth import dump_sequence, generate

logger = logging.getLogger(__name__)


class SequenceJob(NamedTuple):
    name: str
    detections: Path
    features: Optional[Path] = None
    ground_truth: Optional[Path] = None
    seqinfo: Optional[Path] = None


class RunReport(NamedTuple):
    status: int
    artifacts: List[Path]
    metrics: Optional[MotMetrics] = None


def sequence_name(detections: Path) -> str:
    """``MOT16-02`` for ``.../MOT16-02/det/det.txt``, else the file stem."""
    detections = Path(detections)
    if detections.parent.name == 'det' and detections.name == 'det.txt':
        return detections.parent.parent.name
    return detections.stem


def _optional(path: Path) -> Optional[Path]:
    return path if path.exists() else None


def discover_sequences(directory: Path) -> List[SequenceJob]:
    """Sub-directories of ``directory`` that hold a ``det/det.txt``."""
    jobs = [
        SequenceJob(
            name=child.name,
            detections=child / DETECTIONS_FILE,
            features=_optional(child / FEATURES_FILE),
            ground_truth=_optional(child / GROUND_TRUTH_FILE),
            seqinfo=_optional(child / SEQINFO_FILE),
        )
        for child in sorted(Path(directory).iterdir())
        if (child / DETECTIONS_FILE).is_file()
    ]
    if not jobs:
        raise DataError(f'no sequence with {DETECTIONS_FILE} in {directory}')
    return jobs


def sequence_jobs(cfg: RunConfig) -> List[SequenceJob]:
    if cfg.is_batch:
        return discover_sequences(cfg.sequences_dir)
    return [SequenceJob(
        name=cfg.sequence or sequence_name(cfg.detections),
        detections=cfg.detections,
        features=cfg.features,
        ground_truth=cfg.ground_truth,
        seqinfo=cfg.seqinfo,
    )]


def load_detections(cfg: RunConfig, job: SequenceJob,
                    needs_features: bool = True) -> FrameSet:
    if needs_features and job.features is None:
        raise DataError(
            f'sequence {job.name}: no appearance feature file, '
            'the trackers need one'
        )
    fs = read_sequence(
        job.detections,
        job.features if needs_features else None,
        job.seqinfo,
        sequence=job.name,
        image_size=cfg.image_size,
    )
    threshold = cfg.threshold_for(fs.sequence)
    kept = filter_by_score(fs, threshold)
    logger.info('%s: %d of %d detections kept at score threshold %s',
                fs.sequence, kept.num_detections, fs.num_detections,
                threshold)
    return kept


def _write_metrics(cfg: RunConfig, metrics: MotMetrics, stdout: TextIO,
                   artifacts: List[Path]) -> None:
    table = summary_table(metrics)
    for name, text in ((METRICS_TABLE_FILE, table),
                       (METRICS_KEY_VALUE_FILE, summary_key_values(metrics))):
        path = cfg.output_dir / name
        path.write_text(text, encoding='utf-8')
        artifacts.append(path)
    stdout.write(table)


def _track(cfg: RunConfig, stdout: TextIO) -> RunReport:
    tracker = run_online if cfg.mode == MODE_ONLINE else run_offline
    params = cfg.online if cfg.mode == MODE_ONLINE else cfg.offline
    artifacts: List[Path] = []
    evaluations: List[MotMetrics] = []
    for job in sequence_jobs(cfg):
        fs = load_detections(cfg, job)
        trajectories = tracker(fs, params)
        path = cfg.output_dir / f'{fs.sequence}.txt'
        with open(path, 'w', encoding='utf-8') as stream:
            write_trajectories(trajectories, stream)
        artifacts.append(path)
        logger.info('%s: %d trajectories written to %s', fs.sequence,
                    len(trajectories), path)
        if job.ground_truth is not None:
            result = evaluate(read_trajectories(job.ground_truth),
                              trajectories, cfg.iou_threshold, fs.sequence)
            logger.info('%s: %s', fs.sequence, result.counts.row())
            evaluations.append(result)

    metrics = None
    if evaluations:
        metrics = fold(evaluations)
        _write_metrics(cfg, metrics, stdout, artifacts)
    return RunReport(EXIT_OK, artifacts, metrics)


def _evaluate(cfg: RunConfig, stdout: TextIO) -> RunReport:
    name = cfg.sequence or sequence_name(cfg.hypotheses)
    metrics = evaluate(
        read_trajectories(cfg.ground_truth),
        read_trajectories(cfg.hypotheses),
        cfg.iou_threshold,
        name,
    )
    logger.info('%s: %s', name, metrics.counts.row())
    artifacts: List[Path] = []
    _write_metrics(cfg, metrics, stdout, artifacts)
    return RunReport(EXIT_OK, artifacts, metrics)


def _detection_pr(cfg: RunConfig, stdout: TextIO) -> RunReport:
    job = sequence_jobs(cfg)[0]
    fs = load_detections(cfg, job, needs_features=False)
    counts = detection_pr(read_trajectories(cfg.ground_truth), fs,
                          cfg.iou_threshold)
    frame = pd.DataFrame(
        [counts._asdict()], index=pd.Index([fs.sequence], name='Sequence')
    )
    frame.columns = [column.upper() for column in frame.columns]
    table = frame.to_string() + '\n'
    path = cfg.output_dir / METRICS_TABLE_FILE
    path.write_text(table, encoding='utf-8')
    stdout.write(table)
    logger.info('%s: detection FP %d, FN %d', fs.sequence, counts.fp,
                counts.fn)
    return RunReport(EXIT_OK, [path])


def _synth(cfg: RunConfig, stdout: TextIO) -> RunReport:
    gt, fs = generate(cfg.synth)
    directory = dump_sequence(gt, fs, cfg.output_dir / fs.sequence)
    stdout.write(f'{directory}\n')
    return RunReport(EXIT_OK, [directory])


HANDLERS = {
    MODE_ONLINE: _track,
    MODE_OFFLINE: _track,
    MODE_EVALUATE: _evaluate,
    MODE_DETECTION_PR: _detection_pr,
    MODE_SYNTH: _synth,
}


def run(cfg: RunConfig, stdout: Optional[TextIO] = None) -> RunReport:
    """Execute ``cfg.mode``, writing every artifact into the output dir."""
    stdout = stdout or sys.stdout
    config_path = write_resolved(cfg)
    report = HANDLERS[cfg.mode](cfg, stdout)
    return report._replace(artifacts=[config_path, *report.artifacts])
