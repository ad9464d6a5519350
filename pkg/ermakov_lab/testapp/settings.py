import os

PROJECT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

INSTALLED_APPS = (
    "ermakov_lab",
    "ermakov_lab.testapp",
)

SECRET_KEY = "fake-key"

TIME_ZONE = "UTC"
USE_TZ = True


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {"null": {"class": "logging.NullHandler"}},
    "loggers": {"ermakov_lab": {"handlers": ["null"], "level": "DEBUG"}},
}
