import pytest
from tracking.mot_data import BoundingBox
from tracking.synth import (SynthObject, SynthSpec, dump_sequence, generate,
                            lane_layout)

N_OBJECTS = 3
N_FRAMES = 100
BORDER_DROPOUT = (9, 13)
SEED_GRID = tuple(range(10))


@pytest.fixture
def clean_spec():
    return lane_layout(N_OBJECTS, N_FRAMES, seed=7)


@pytest.fixture
def clean_sequence(clean_spec):
    return generate(clean_spec)


@pytest.fixture
def border_dropout_spec():
    """Three objects that vanish across the first segment border."""
    def factory(seed: int) -> SynthSpec:
        base = lane_layout(N_OBJECTS, 60)
        objects = tuple(
            SynthObject(
                box=obj.box,
                velocity=obj.velocity,
                dropouts=(BORDER_DROPOUT,),
            )
            for obj in base.objects
        )
        return SynthSpec(
            objects=objects,
            image_size=base.image_size,
            num_frames=base.num_frames,
            position_jitter=0.5,
            feature_jitter=0.02,
            seed=seed,
        )
    return factory


@pytest.fixture
def crossing_spec():
    """Two objects whose paths cross in the middle of the sequence."""
    return SynthSpec(
        objects=(
            SynthObject(BoundingBox(100.0, 300.0, 40.0, 100.0), (10.0, 0.0)),
            SynthObject(BoundingBox(500.0, 300.0, 40.0, 100.0), (-10.0, 0.0)),
        ),
        image_size=(640.0, 480.0),
        num_frames=40,
        seed=3,
    )


@pytest.fixture
def sequence_dir(tmp_path, clean_sequence):
    gt, fs = clean_sequence
    return dump_sequence(gt, fs, tmp_path / "data" / fs.sequence)


@pytest.fixture
def config_file(tmp_path):
    def factory(text: str, name: str = "run.ini"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return factory
