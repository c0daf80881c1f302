import os

from celery import Celery

# Set default Django settings
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

app = Celery('litmus_toolkit')

# Load config from Django settings (CELERY_* variables)
app.config_from_object('django.conf:settings', namespace='CELERY')

# pipeline.tasks
app.autodiscover_tasks()
