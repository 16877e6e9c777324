import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get(
    'MOTRACK_SECRET_KEY',
    'motrack-offline-engine-no-web-surface',
)

DEBUG = False

INSTALLED_APPS = [
    'tracking.apps.TrackingConfig',
]

DATABASES = {}

USE_TZ = True

MOTRACK_LOG_LEVEL = os.environ.get('MOTRACK_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'tracking': {
            'handlers': ['console'],
            'level': MOTRACK_LOG_LEVEL,
            'propagate': False,
        },
    },
}
