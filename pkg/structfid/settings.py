"""
Django settings for the structfid management commands.

structfid has no models and no database; Django provides the command
framework and logging configuration only.
"""

import os

SECRET_KEY = os.environ.get("STRUCTFID_SECRET_KEY", "structfid-cli-only")

DEBUG = False

INSTALLED_APPS = ["structfid"]

DATABASES = {}

USE_TZ = True

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "structfid": {"handlers": ["stderr"], "level": "WARNING"},
    },
}
