"""Run configuration: INI text in, validated :class:`RunConfig` out."""
import configparser
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from .affinity import AffinityParams
from .constants import (MODE_DETECTION_PR, MODE_EVALUATE, MODE_ONLINE,
                        MODE_SYNTH, MODES, RESOLVED_CONFIG_FILE,
                        TRACKER_MODES)
from .exceptions import ConfigError
from .forms import SECTION_FORMS, SectionForm
from .mot_data import ImageSize
from .motion import MotionNoiseConfig
from .offline_tracker import OfflineConfig
from .online_tracker import OnlineConfig
from .synth import SynthSpec, lane_layout

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 'default'

Sections = Dict[str, Dict[str, str]]


@dataclass(frozen=True)
class RunConfig:
    mode: str = MODE_ONLINE
    sequence: str = ''
    detections: Optional[Path] = None
    features: Optional[Path] = None
    ground_truth: Optional[Path] = None
    hypotheses: Optional[Path] = None
    seqinfo: Optional[Path] = None
    sequences_dir: Optional[Path] = None
    output_dir: Path = Path('output')
    image_size: Optional[ImageSize] = None
    seed: int = 0
    thresholds: Dict[str, float] = field(default_factory=dict)
    offline: OfflineConfig = field(default_factory=OfflineConfig)
    iou_threshold: float = 0.5
    synth: Optional[SynthSpec] = None
    resolved: Sections = field(default_factory=dict)

    @property
    def online(self) -> OnlineConfig:
        return self.offline.online

    @property
    def is_batch(self) -> bool:
        return self.sequences_dir is not None

    def threshold_for(self, sequence: str) -> float:
        """Score threshold of ``sequence``; no filtering without a default."""
        return self.thresholds.get(
            sequence, self.thresholds.get(DEFAULT_THRESHOLD, -math.inf)
        )


def parse_sections(raw_text: str) -> Sections:
    parser = configparser.ConfigParser(
        interpolation=None, default_section='__none__'
    )
    parser.optionxform = str
    try:
        parser.read_string(raw_text)
    except configparser.Error as exc:
        raise ConfigError(f'cannot parse configuration: {exc}') from exc
    return {name: dict(parser[name]) for name in parser.sections()}


def apply_overrides(sections: Sections, overrides: Iterable[str]) -> None:
    errors = []
    for override in overrides:
        key, sep, value = override.partition('=')
        section, dot, name = key.strip().partition('.')
        if not sep or not dot or not section or not name:
            errors.append(
                f'override {override!r} must look like section.key=value'
            )
            continue
        sections.setdefault(section, {})[name] = value.strip()
    if errors:
        raise ConfigError(errors)


def _mode_violations(mode: str, run: dict) -> List[str]:
    needed: Sequence[str] = ()
    if mode in TRACKER_MODES and not run.get('sequences_dir'):
        needed = ('detections',)
    elif mode == MODE_EVALUATE:
        needed = ('ground_truth', 'hypotheses')
    elif mode == MODE_DETECTION_PR:
        needed = ('ground_truth', 'detections')
    return [
        f'run.{name}: required for mode {mode}'
        for name in needed if not run.get(name)
    ]


def _synth_spec(synth: dict, seed: int) -> SynthSpec:
    return lane_layout(
        synth['objects'],
        num_frames=synth['frames'],
        image_size=(synth['width'], synth['height']),
        dropout_length=synth['dropout_length'],
        position_jitter=synth['position_jitter'],
        feature_jitter=synth['feature_jitter'],
        clutter_rate=synth['clutter_rate'],
        feature_dim=synth['feature_dim'],
        perturbation=synth['perturbation'],
        seed=seed if synth['seed'] is None else synth['seed'],
        sequence=synth['sequence'],
    )


def validate_config(
    raw_text: str = '',
    mode: str = MODE_ONLINE,
    base_dir: Optional[Path] = None,
    overrides: Iterable[str] = (),
    output_dir: Optional[Path] = None,
) -> RunConfig:
    """Parse and check a configuration, reporting every violation at once."""
    sections = parse_sections(raw_text)
    apply_overrides(sections, overrides)

    violations = []
    if mode not in MODES:
        violations.append(
            f'mode: unknown mode {mode!r}, expected one of {", ".join(MODES)}'
        )
    known = {form_class.section: form_class for form_class in SECTION_FORMS}
    violations.extend(
        f'{name}: unknown section'
        for name in sorted(set(sections) - set(known))
    )

    forms: Dict[str, SectionForm] = {}
    for name, form_class in known.items():
        kwargs = {'base_dir': base_dir} if name == 'run' else {}
        form = form_class.bind(sections.get(name, {}), **kwargs)
        violations.extend(form.violations())
        forms[name] = form
    if forms['run'].is_valid():
        violations.extend(_mode_violations(mode, forms['run'].cleaned_data))
    if violations:
        raise ConfigError(violations)

    data = {name: form.cleaned_data for name, form in forms.items()}
    run = data['run']
    if output_dir is not None:
        run['output_dir'] = Path(output_dir).resolve()
    online = OnlineConfig(
        affinity=AffinityParams(**{
            key: data['online'][key] for key in ('w1', 'w2', 'w3')
        }),
        tau_t=data['online']['tau_t'],
        tau_a=data['online']['tau_a'],
        tau_m=data['online']['tau_m'],
        aggregation=data['online']['aggregation'],
        motion=MotionNoiseConfig(**data['motion']),
    )
    offline = OfflineConfig(online=online, **data['offline'])
    synth = None
    if mode == MODE_SYNTH:
        synth = _synth_spec(data['synth'], run['seed'])

    image_size = None
    if run['image_width'] is not None:
        image_size = (run['image_width'], run['image_height'])
    resolved = {name: form.resolved() for name, form in forms.items()}
    resolved['run']['output_dir'] = str(run['output_dir'])
    return RunConfig(
        mode=mode,
        sequence=run['sequence'],
        detections=run['detections'],
        features=run['features'],
        ground_truth=run['ground_truth'],
        hypotheses=run['hypotheses'],
        seqinfo=run['seqinfo'],
        sequences_dir=run['sequences_dir'],
        output_dir=run['output_dir'],
        image_size=image_size,
        seed=run['seed'],
        thresholds=dict(data['thresholds']),
        offline=offline,
        iou_threshold=data['metrics']['iou_threshold'],
        synth=synth,
        resolved=resolved,
    )


def load_config(
    path: Optional[Path] = None,
    mode: str = MODE_ONLINE,
    overrides: Iterable[str] = (),
    output_dir: Optional[Path] = None,
) -> RunConfig:
    """Read the file at ``path`` (or nothing) and validate it."""
    raw_text, base_dir = '', Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            raw_text = path.read_text(encoding='utf-8')
        except OSError as exc:
            raise ConfigError(
                f'cannot read configuration {path}: {exc}'
            ) from exc
        base_dir = path.resolve().parent
    return validate_config(raw_text, mode, base_dir, overrides, output_dir)


def write_resolved(cfg: RunConfig, directory: Optional[Path] = None) -> Path:
    """Echo the fully resolved configuration next to the run outputs."""
    directory = Path(directory or cfg.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, values in cfg.resolved.items():
        parser[section] = values
    path = directory / RESOLVED_CONFIG_FILE
    with open(path, 'w', encoding='utf-8') as handle:
        parser.write(handle)
    logger.debug('resolved configuration written to %s', path)
    return path
