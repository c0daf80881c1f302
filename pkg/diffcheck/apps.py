from django.apps import AppConfig


class DiffcheckConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'diffcheck'
    verbose_name = 'Outcome Comparison'
