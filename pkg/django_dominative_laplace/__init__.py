default_app_config = "django_dominative_laplace.apps.DominativeLaplaceAppConfig"

__version__ = "1.0.0"
