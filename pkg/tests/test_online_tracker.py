import math

import numpy as np
import pytest
from conftest import make_detection, make_frameset, unit_vector
from tracking.affinity import affinity_matrix
from tracking.assignment import solve_max
from tracking.constants import AGGREGATION_RUNNING
from tracking.exceptions import (ConfigError, ContractViolation,
                                 SequencingError)
from tracking.metrics import evaluate
from tracking.motion import MotionNoiseConfig, predict, snapshot
from tracking.online_tracker import (OnlineConfig, OnlineTracker, TrackState,
                                     Tracklet, aggregate_feature, quality,
                                     run_online)
from tracking.synth import generate, lane_layout

BOUNDS = (1000.0, 1000.0)
BOX = (100.0, 100.0, 20.0, 40.0)


def tracklet_with_couples(track_id, couples, feature=None):
    feature = unit_vector(0) if feature is None else feature
    tracklet = Tracklet(track_id, make_detection(1, BOX, feature),
                        MotionNoiseConfig())
    tracklet.couples = list(couples)
    return tracklet


@pytest.mark.parametrize(
    ("couples", "expected"),
    [
        ([0.8, 1.0], 0.73510),
        ([0.5], 0.5 * 0.69881),
        ([], 0.0),
        ([1.0] * 10000, 1.0),
    ],
    ids=["two couples", "one couple", "no couples", "long perfect"],
)
def test_quality(couples, expected):
    t = tracklet_with_couples(1, couples)
    assert quality(t, 1.2) == pytest.approx(expected, abs=5e-6)


def test_quality_against_direct_evaluation(rng):
    for _ in range(100):
        couples = rng.uniform(0, 1, rng.integers(1, 30))
        w3 = rng.uniform(0.1, 3)
        t = tracklet_with_couples(1, couples)
        saturation = 1 - math.exp(-w3 * math.sqrt(len(couples)))
        expected = couples.mean() * saturation
        assert quality(t, w3) == pytest.approx(expected, rel=1e-12)


def test_aggregate_feature():
    v = np.array([3.0, 4.0])
    np.testing.assert_allclose(aggregate_feature(v, v), [0.6, 0.8])
    np.testing.assert_allclose(
        aggregate_feature([1, 0], [0, 1]), [1 / math.sqrt(2)] * 2
    )
    np.testing.assert_allclose(aggregate_feature([1, 0], [-1, 0]), [1, 0])
    np.testing.assert_allclose(
        aggregate_feature([1, 0], [0, 1], old_weight=3.0),
        np.array([3, 1]) / math.sqrt(10),
    )


def test_new_tracklets_for_first_frame():
    tracker = OnlineTracker(OnlineConfig(), BOUNDS)
    result = tracker.step(1, [
        make_detection(1, BOX, unit_vector(0)),
        make_detection(1, (400, 400, 20, 40), unit_vector(1)),
    ])
    assert result.new_ids == [1, 2]
    assert [t.length for t in tracker.tracklets] == [0, 0], (
        "Make sure new tracklets start with zero couples."
    )


def test_perfect_match_adds_a_couple():
    tracker = OnlineTracker(OnlineConfig(), BOUNDS)
    tracker.step(1, [make_detection(1, BOX, unit_vector(0))])
    result = tracker.step(2, [make_detection(2, BOX, unit_vector(0))])
    (tracklet,) = tracker.tracklets
    assert result.matches == [(1, 0)]
    assert tracklet.length == 1
    assert tracklet.couples[0] == pytest.approx(1.0)
    assert tracklet.state is TrackState.ACTIVE


def test_tracklet_finishes_after_tau_m_missed_frames():
    tracker = OnlineTracker(OnlineConfig(tau_m=3), BOUNDS)
    tracker.step(1, [make_detection(1, BOX, unit_vector(0))])
    for frame in (2, 3, 4):
        result = tracker.step(frame, [])
        assert result.finished_ids == []
        assert tracker.tracklets[0].state is TrackState.LOST
    result = tracker.step(5, [])
    assert result.finished_ids == [1], (
        "Make sure a tracklet is finished after tau_m + 1 missed frames."
    )
    assert tracker.tracklets == []
    assert [t.id for t in tracker.all_tracklets()] == [1]


def test_tracklet_leaving_the_image_is_finished():
    tracker = OnlineTracker(OnlineConfig(), (200.0, 200.0))
    tracker.step(1, [make_detection(1, (150, 150, 40, 40), unit_vector(0))])
    result = tracker.step(2, [])
    assert result.finished_ids == [], (
        "Make sure a tracklet whose center is inside the image survives."
    )
    tracker.tracklets[0].motion.mean[0] = 250.0
    result = tracker.step(3, [])
    assert result.finished_ids == [1]


def test_frames_must_increase():
    tracker = OnlineTracker(OnlineConfig(), BOUNDS)
    tracker.step(2, [])
    with pytest.raises(SequencingError):
        tracker.step(2, [])
    with pytest.raises(SequencingError):
        tracker.step(3, [make_detection(4, BOX, unit_vector(0))])


def test_detection_without_feature():
    tracker = OnlineTracker(OnlineConfig(), BOUNDS)
    with pytest.raises(ContractViolation):
        tracker.step(1, [make_detection(1, BOX)])


def test_config_ranges():
    with pytest.raises(ConfigError) as excinfo:
        OnlineConfig(tau_t=1.5, tau_m=0, aggregation="median")
    assert len(excinfo.value.violations) == 3


def test_high_quality_tracklet_keeps_its_detection():
    cfg = OnlineConfig()
    high = tracklet_with_couples(
        1, [0.9] * 10, unit_vector(0) + 0.5 * unit_vector(1)
    )
    low = tracklet_with_couples(2, [], unit_vector(0))
    detection = make_detection(2, BOX, unit_vector(0))

    matrix = affinity_matrix(
        [snapshot(predict(t.motion), t.feature) for t in (high, low)],
        [detection],
        cfg.affinity,
    )
    assert solve_max(matrix).matches == [(1, 0)], (
        "Make sure the scenario is one where single-stage matching would "
        "hand the detection to the low-quality tracklet."
    )

    tracker = OnlineTracker(cfg, BOUNDS, tracklets=[high, low])
    result = tracker.step(2, [detection])
    assert result.stage1 == [(1, 0)], (
        "Make sure the high-quality tracklet is matched in the first stage."
    )
    assert result.stage2 == []
    assert high.length == 11 and low.frames_since_match == 1
    assert tracker.next_id == 3


def test_running_aggregation_weights_history():
    cfg = OnlineConfig(aggregation=AGGREGATION_RUNNING)
    tracker = OnlineTracker(cfg, BOUNDS)
    tracker.step(1, [make_detection(1, BOX, unit_vector(0))])
    tracker.step(2, [make_detection(2, BOX, unit_vector(0))])
    mixed = unit_vector(0) + unit_vector(1)
    tracker.step(3, [make_detection(3, BOX, mixed)])
    expected = 2 * unit_vector(0) + mixed / np.linalg.norm(mixed)
    np.testing.assert_allclose(
        tracker.tracklets[0].feature, expected / np.linalg.norm(expected)
    )


def test_run_online_empty():
    assert run_online(make_frameset([]), OnlineConfig()) == []


def test_single_object_fifty_frames():
    gt, fs = generate(lane_layout(1, 50))
    trajs = run_online(fs, OnlineConfig())
    assert len(trajs) == 1 and len(trajs[0]) == 50
    assert evaluate(gt, trajs).mota == pytest.approx(100.0)


def test_clean_sequence_closure(clean_sequence):
    gt, fs = clean_sequence
    trajs = run_online(fs, OnlineConfig())
    metrics = evaluate(gt, trajs)
    assert len(trajs) == 3, "Make sure every object gets one trajectory."
    assert metrics.mota == pytest.approx(100.0)
    assert metrics.ids == 0


def test_short_dropout_keeps_identities():
    gt, fs = generate(lane_layout(2, 60, dropout_length=2))
    trajs = run_online(fs, OnlineConfig())
    assert len(trajs) == 2
    assert evaluate(gt, trajs).ids == 0


def test_occlusion_shorter_than_tau_m():
    cfg = OnlineConfig(tau_m=10)
    gt, fs = generate(lane_layout(3, 60, dropout_length=9))
    trajs = run_online(fs, cfg)
    metrics = evaluate(gt, trajs)
    assert metrics.ids == 0, (
        "Make sure identities survive a dropout shorter than tau_m."
    )
    assert metrics.fn == 3 * 9
    assert len({t.id for t in trajs}) == len(trajs) == 3
