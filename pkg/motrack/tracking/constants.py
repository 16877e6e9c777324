# Online tracker defaults.
W1_MOTION = 0.5
W2_SHAPE = 1.5
W3_QUALITY = 1.2
TAU_QUALITY = 0.5
TAU_ASSOCIATION = 0.4
TAU_MISSING = 100

AGGREGATION_AVERAGE = 'average'
AGGREGATION_RUNNING = 'running'
AGGREGATION_MODES = (AGGREGATION_AVERAGE, AGGREGATION_RUNNING)

# Kalman filter noise defaults.
PROCESS_POSITION_VAR = 1.0
PROCESS_VELOCITY_VAR = 0.25
MEASUREMENT_VAR = 1.0
INITIAL_POSITION_VAR = 1.0
INITIAL_VELOCITY_VAR = 100.0
MIN_BOX_SIDE = 1.0

# Offline tracker defaults.
SEGMENT_LENGTH = 10
MERGE_FAN_IN = 2
TAU_LINK = 0.3
TAU_SCALE = 0.5
TAU_HEIGHT_RATIO = 0.5
REDUCED_WEIGHT = 0.3
MAX_LINK_GAP = 50
LINK_TIE_DECIMALS = 9
MAX_INTERPOLATION_GAP = 20
VELOCITY_WINDOW = 5
SMOOTHNESS_EPS = 1e-6

BIG_TARGET_REDUCE = 'reduce'
BIG_TARGET_REJECT = 'reject'
BIG_TARGET_MODES = (BIG_TARGET_REDUCE, BIG_TARGET_REJECT)

# Evaluation.
IOU_THRESHOLD = 0.5
MOSTLY_TRACKED_RATIO = 0.8
MOSTLY_LOST_RATIO = 0.2

# Input/output.
FEATURE_DIM = 128
OUTPUT_PRECISION = 2
DETECTIONS_FILE = 'det/det.txt'
FEATURES_FILE = 'det/det_features.txt'
GROUND_TRUTH_FILE = 'gt/gt.txt'
SEQINFO_FILE = 'seqinfo.ini'
RESOLVED_CONFIG_FILE = 'config.ini'
METRICS_TABLE_FILE = 'metrics.txt'
METRICS_KEY_VALUE_FILE = 'metrics.kv'

# Command modes.
MODE_ONLINE = 'online'
MODE_OFFLINE = 'offline'
MODE_EVALUATE = 'evaluate'
MODE_DETECTION_PR = 'detection-pr'
MODE_SYNTH = 'synth'
MODES = (
    MODE_ONLINE,
    MODE_OFFLINE,
    MODE_EVALUATE,
    MODE_DETECTION_PR,
    MODE_SYNTH,
)
TRACKER_MODES = (MODE_ONLINE, MODE_OFFLINE)

# Exit codes of the command-line surface.
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_INTERNAL_ERROR = 4
