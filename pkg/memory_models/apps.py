from django.apps import AppConfig


class MemoryModelsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'memory_models'
    verbose_name = 'Memory Models'
