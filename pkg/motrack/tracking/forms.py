from pathlib import Path
from typing import Dict, List, Mapping, Optional

from django import forms
from django.core.exceptions import ValidationError

from . import constants


def positive(value):
    if value is not None and not value > 0:
        raise ValidationError('Ensure this value is strictly positive.')


class SectionForm(forms.Form):
    """One configuration section; keys outside ``fields`` are rejected."""

    section = ''
    allow_unknown = False

    @classmethod
    def bind(cls, values: Mapping[str, str], **kwargs) -> 'SectionForm':
        data = {
            name: field.initial
            for name, field in cls.base_fields.items()
            if field.initial is not None
        }
        data.update(values)
        return cls(data=data, **kwargs)

    def unknown_keys(self) -> List[str]:
        if self.allow_unknown:
            return []
        return sorted(set(self.data) - set(self.fields))

    def violations(self) -> List[str]:
        messages = [
            f'{self.section}.{key}: unknown key'
            for key in self.unknown_keys()
        ]
        for name, errors in self.errors.items():
            key = self.section if name == '__all__' else (
                f'{self.section}.{name}'
            )
            messages.extend(f'{key}: {error}' for error in errors)
        return messages

    def resolved(self) -> Dict[str, str]:
        """Cleaned values as text, in field order, empty ones left out."""
        return {
            name: str(value)
            for name, value in self.cleaned_data.items()
            if value not in (None, '')
        }


class RunForm(SectionForm):
    section = 'run'
    path_fields = (
        'detections',
        'features',
        'ground_truth',
        'hypotheses',
        'seqinfo',
        'sequences_dir',
    )

    sequence = forms.CharField(required=False)
    detections = forms.CharField(required=False)
    features = forms.CharField(required=False)
    ground_truth = forms.CharField(required=False)
    hypotheses = forms.CharField(required=False)
    seqinfo = forms.CharField(required=False)
    sequences_dir = forms.CharField(required=False)
    output_dir = forms.CharField(initial='output')
    image_width = forms.FloatField(required=False, validators=[positive])
    image_height = forms.FloatField(required=False, validators=[positive])
    seed = forms.IntegerField(initial=0, min_value=0)

    def __init__(self, *args, base_dir: Optional[Path] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.base_dir = Path(base_dir or Path.cwd())

    def resolve(self, value: str) -> Path:
        path = Path(value).expanduser()
        if not path.is_absolute():
            path = self.base_dir / path
        return path.resolve()

    def clean(self):
        cleaned_data = super().clean()
        for name in self.path_fields:
            value = cleaned_data.get(name)
            if not value:
                cleaned_data[name] = None
                continue
            path = self.resolve(value)
            if not path.exists():
                self.add_error(name, f'path does not exist: {path}')
            else:
                cleaned_data[name] = path
        if cleaned_data.get('output_dir'):
            cleaned_data['output_dir'] = self.resolve(
                cleaned_data['output_dir']
            )
        width = cleaned_data.get('image_width')
        height = cleaned_data.get('image_height')
        if (width is None) != (height is None):
            raise ValidationError(
                'image_width and image_height must be given together.'
            )
        return cleaned_data


class ThresholdsForm(SectionForm):
    """Detection score threshold per sequence name, plus ``default``."""

    section = 'thresholds'
    allow_unknown = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        for name in self.data:
            self.fields[name] = forms.FloatField()


class OnlineForm(SectionForm):
    section = 'online'

    w1 = forms.FloatField(initial=constants.W1_MOTION, validators=[positive])
    w2 = forms.FloatField(initial=constants.W2_SHAPE, validators=[positive])
    w3 = forms.FloatField(initial=constants.W3_QUALITY, validators=[positive])
    tau_t = forms.FloatField(
        initial=constants.TAU_QUALITY, min_value=0, max_value=1
    )
    tau_a = forms.FloatField(
        initial=constants.TAU_ASSOCIATION, min_value=-1, max_value=1
    )
    tau_m = forms.IntegerField(initial=constants.TAU_MISSING, min_value=1)
    aggregation = forms.ChoiceField(
        initial=constants.AGGREGATION_AVERAGE,
        choices=[(mode, mode) for mode in constants.AGGREGATION_MODES],
    )


class MotionForm(SectionForm):
    section = 'motion'

    process_position_var = forms.FloatField(
        initial=constants.PROCESS_POSITION_VAR, min_value=0
    )
    process_velocity_var = forms.FloatField(
        initial=constants.PROCESS_VELOCITY_VAR, min_value=0
    )
    measurement_var = forms.FloatField(
        initial=constants.MEASUREMENT_VAR, min_value=0
    )
    initial_position_var = forms.FloatField(
        initial=constants.INITIAL_POSITION_VAR, min_value=0
    )
    initial_velocity_var = forms.FloatField(
        initial=constants.INITIAL_VELOCITY_VAR, min_value=0
    )


class OfflineForm(SectionForm):
    section = 'offline'

    segment_length = forms.IntegerField(
        initial=constants.SEGMENT_LENGTH, min_value=2
    )
    merge_fan_in = forms.IntegerField(
        initial=constants.MERGE_FAN_IN, min_value=2
    )
    tau_link = forms.FloatField(
        initial=constants.TAU_LINK, min_value=0, max_value=1
    )
    tau_s = forms.FloatField(
        initial=constants.TAU_SCALE, max_value=1, validators=[positive]
    )
    tau_r = forms.FloatField(
        initial=constants.TAU_HEIGHT_RATIO, max_value=1, validators=[positive]
    )
    reduced_weight = forms.FloatField(
        initial=constants.REDUCED_WEIGHT, max_value=1, validators=[positive]
    )
    max_link_gap = forms.IntegerField(
        initial=constants.MAX_LINK_GAP, min_value=0
    )
    max_interpolation_gap = forms.IntegerField(
        initial=constants.MAX_INTERPOLATION_GAP, min_value=0
    )
    big_target_mode = forms.ChoiceField(
        initial=constants.BIG_TARGET_REDUCE,
        choices=[(mode, mode) for mode in constants.BIG_TARGET_MODES],
    )


class MetricsForm(SectionForm):
    section = 'metrics'

    iou_threshold = forms.FloatField(
        initial=constants.IOU_THRESHOLD, max_value=1, validators=[positive]
    )


class SynthForm(SectionForm):
    section = 'synth'

    sequence = forms.CharField(initial='SYNTH-01')
    frames = forms.IntegerField(initial=100, min_value=1)
    objects = forms.IntegerField(initial=3, min_value=0)
    width = forms.FloatField(initial=1920.0, validators=[positive])
    height = forms.FloatField(initial=1080.0, validators=[positive])
    position_jitter = forms.FloatField(initial=0.0, min_value=0)
    feature_jitter = forms.FloatField(initial=0.0, min_value=0)
    clutter_rate = forms.FloatField(initial=0.0, min_value=0)
    dropout_length = forms.IntegerField(initial=0, min_value=0)
    feature_dim = forms.IntegerField(
        initial=constants.FEATURE_DIM, min_value=1
    )
    perturbation = forms.FloatField(initial=0.0, min_value=0)
    seed = forms.IntegerField(required=False, min_value=0)


SECTION_FORMS = (
    RunForm,
    ThresholdsForm,
    OnlineForm,
    MotionForm,
    OfflineForm,
    MetricsForm,
    SynthForm,
)
