from django.apps import AppConfig


class LitmusConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'litmus'
    verbose_name = 'Litmus Tests'
