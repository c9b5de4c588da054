"""Settings of the sample project that runs the test-suite; the app needs no database."""

import os

SECRET_KEY = "7q3_8$ko2ath=yd0+h!3vk=!dkfv7c#0_wo3q4*tw(p-se(ju0"

DEBUG = True

INSTALLED_APPS = [
    "rest_framework",
    "django_dominative_laplace",
    "sample_app.apps.SampleAppConfig",
]

DATABASES = {}

# Serializers only; no request ever reaches an authentication class
REST_FRAMEWORK = {"UNAUTHENTICATED_USER": None}

USE_TZ = True


# Logging

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "{levelname} {name}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "simple"},
    },
    "loggers": {
        "django_dominative_laplace": {
            "handlers": ["console"],
            "level": os.environ.get("DJANGO_DOMINATIVE_LAPLACE_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}

# Thread pool size of the suites
DJANGO_DOMINATIVE_LAPLACE_WORKERS = 4
