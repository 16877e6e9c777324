import numpy as np
import pytest
from fixtures.sequences import N_FRAMES, N_OBJECTS
from tracking.constants import (DETECTIONS_FILE, FEATURES_FILE,
                                GROUND_TRUTH_FILE, SEQINFO_FILE)
from tracking.exceptions import SynthSpecError
from tracking.metrics import evaluate
from tracking.mot_data import (BoundingBox, filter_by_score, read_sequence,
                               read_trajectories, write_detections,
                               write_features)
from tracking.online_tracker import OnlineConfig, run_online
from tracking.synth import SynthObject, SynthSpec, generate, lane_layout

DROPOUT_GRID = (0, 2, 5, 10, 20)


def noisy_spec(seed):
    return lane_layout(N_OBJECTS, 30, position_jitter=1.0,
                       feature_jitter=0.1, clutter_rate=2.0, seed=seed)


def test_zero_noise_detections_equal_ground_truth(clean_sequence):
    gt, fs = clean_sequence
    assert len(gt) == N_OBJECTS and len(fs) == N_FRAMES
    assert fs.num_detections == N_OBJECTS * N_FRAMES
    for frame, group in fs:
        expected = {traj.box_at(frame) for traj in gt}
        assert {det.bbox for det in group} == expected, (
            "Make sure noise-free detections sit exactly on the ground truth."
        )


def test_features_follow_archetypes(clean_sequence):
    _, fs = clean_sequence
    first = np.vstack([det.feature for det in fs[1]])
    np.testing.assert_allclose(np.linalg.norm(first, axis=1), 1.0)
    np.testing.assert_allclose(first @ first.T, np.eye(N_OBJECTS),
                               atol=1e-12)
    for _, group in fs:
        np.testing.assert_allclose(
            np.vstack([det.feature for det in group]), first
        )


def test_dropout_frames_are_missing():
    gt, fs = generate(lane_layout(N_OBJECTS, 40, dropout_length=3))
    assert all(len(traj) == 40 for traj in gt)
    assert fs.num_detections == N_OBJECTS * (40 - 3)
    empty = [frame for frame, group in fs if not group]
    assert empty == [18, 19, 20]
    assert len(fs) == 40, "Make sure frames without detections still count."


def test_same_seed_same_sequence():
    first_gt, first = generate(noisy_spec(11))
    second_gt, second = generate(noisy_spec(11))
    assert write_detections(first) == write_detections(second)
    assert write_features(first) == write_features(second)
    assert first_gt == second_gt
    _, other = generate(noisy_spec(12))
    assert write_detections(other) != write_detections(first)


def test_clutter_scores_stay_below_true_scores():
    gt, fs = generate(noisy_spec(5))
    assert fs.num_detections > N_OBJECTS * 30
    confident = filter_by_score(fs, 0.5)
    assert confident.num_detections == N_OBJECTS * 30, (
        "Make sure clutter is generated with scores below 0.5."
    )


def test_perturbation_offsets_vertical_position():
    obj = SynthObject(BoundingBox(100.0, 100.0, 20.0, 40.0))
    spec = SynthSpec(objects=(obj,), num_frames=30, perturbation=5.0,
                     perturbation_period=20.0)
    assert spec.box_at(obj, 6).y == pytest.approx(105.0)
    assert spec.box_at(obj, 16).y == pytest.approx(95.0)
    assert spec.box_at(obj, 6).x == 100.0


def test_object_lifetime():
    late = SynthObject(BoundingBox(10.0, 10.0, 20.0, 40.0), start=5, end=9)
    (traj,), fs = generate(SynthSpec(objects=(late,), num_frames=12))
    assert traj.frames() == [5, 6, 7, 8, 9]
    assert len(fs) == 12


@pytest.mark.parametrize(
    "options",
    [
        {"objects": (SynthObject(BoundingBox(1900.0, 0.0, 40.0, 100.0)),)},
        {"objects": (SynthObject(BoundingBox(100.0, 100.0, 40.0, 100.0),
                                 velocity=(100.0, 0.0)),)},
        {"position_jitter": -1.0},
        {"num_frames": 0},
        {"objects": tuple(
            SynthObject(BoundingBox(10.0 * i, 0.0, 5.0, 5.0))
            for i in range(5)
        ), "feature_dim": 4},
    ],
    ids=["outside the image", "leaves the image", "negative jitter",
         "no frames", "too many objects"],
)
def test_invalid_spec(options):
    with pytest.raises(SynthSpecError):
        SynthSpec(**options)


def test_dump_sequence_files(sequence_dir, clean_sequence):
    gt, fs = clean_sequence
    for name in (SEQINFO_FILE, DETECTIONS_FILE, FEATURES_FILE,
                 GROUND_TRUTH_FILE):
        assert (sequence_dir / name).is_file(), (
            f"Make sure `{name}` is written for a synthetic sequence."
        )
    loaded = read_sequence(sequence_dir / DETECTIONS_FILE,
                           sequence_dir / FEATURES_FILE,
                           sequence_dir / SEQINFO_FILE)
    assert loaded.sequence == fs.sequence
    assert loaded.image_size == fs.image_size
    assert len(loaded) == len(fs)
    assert write_detections(loaded) == write_detections(fs)
    loaded_gt = read_trajectories(sequence_dir / GROUND_TRUTH_FILE)
    assert [traj.frames() for traj in loaded_gt] == [
        traj.frames() for traj in gt
    ]


def test_longer_dropouts_never_raise_mota():
    scores = []
    for length in DROPOUT_GRID:
        gt, fs = generate(lane_layout(N_OBJECTS, 60, dropout_length=length))
        scores.append(evaluate(gt, run_online(fs, OnlineConfig())).mota)
    assert scores == sorted(scores, reverse=True), (
        "Make sure MOTA does not grow with the dropout length."
    )
    assert scores[0] == pytest.approx(100.0)
