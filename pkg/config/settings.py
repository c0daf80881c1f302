"""
Django settings for the litmus toolkit.

Every tunable is read through python-decouple so a ``.env`` file or the
environment can override it.
"""

from pathlib import Path

from decouple import Csv, config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-litmus-toolkit-development-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=Csv())

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Third-party
    'rest_framework',
    'django_filters',
    'drf_spectacular',
    'django_celery_results',

    # Toolkit apps
    'litmus',
    'executions',
    'memory_models',
    'diffcheck',
    'transforms',
    'pipeline',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'config.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'config.wsgi.application'

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

AUTH_PASSWORD_VALIDATORS = [
    {'NAME': 'django.contrib.auth.password_validation.UserAttributeSimilarityValidator'},
    {'NAME': 'django.contrib.auth.password_validation.MinimumLengthValidator'},
    {'NAME': 'django.contrib.auth.password_validation.CommonPasswordValidator'},
    {'NAME': 'django.contrib.auth.password_validation.NumericPasswordValidator'},
]

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

STATIC_URL = 'static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# ============================================
# SIMULATION
# ============================================
SIMULATION = {
    # Candidate executions examined per test before giving up
    'CANDIDATE_CAP': config('SIMULATION_CANDIDATE_CAP', default=1_000_000, cast=int),
    'TIMEOUT_SECONDS': config('SIMULATION_TIMEOUT_SECONDS', default=120, cast=int),
    'UNROLL_FACTOR': config('SIMULATION_UNROLL_FACTOR', default=2, cast=int),
    # Candidates between two wall-clock checks
    'TIME_CHECK_INTERVAL': config('SIMULATION_TIME_CHECK_INTERVAL', default=256, cast=int),
}

# ============================================
# COMPILE AND COMPARE PIPELINE
# ============================================
PIPELINE = {
    'OUTPUT_DIR': config('PIPELINE_OUTPUT_DIR', default=str(BASE_DIR / 'out')),
    'PROFILES_FILE': config('PIPELINE_PROFILES_FILE', default=str(BASE_DIR / 'profiles.json')),
    'GOLDEN_DIR': config('PIPELINE_GOLDEN_DIR', default=str(BASE_DIR / 'pipeline' / 'golden')),
    'STAGE_TIMEOUT': config('PIPELINE_STAGE_TIMEOUT', default=60, cast=int),
    # 'ignore-racy' or 'compare-anyway'
    'RACY_POLICY': config('PIPELINE_RACY_POLICY', default='ignore-racy'),
    'BATCH_PARALLELISM': config('PIPELINE_BATCH_PARALLELISM', default=1, cast=int),
    # 'auto', 'off' or the path of a YAML persistence plan
    'PERSIST_LOCALS': config('PIPELINE_PERSIST_LOCALS', default='auto'),
}

# ============================================
# LOGGING
# ============================================
LOG_LEVEL = config('LOG_LEVEL', default='WARNING')

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
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': True}
        for app in ('litmus', 'executions', 'memory_models', 'diffcheck', 'transforms', 'pipeline')
    },
}

# ============================================
# DJANGO REST FRAMEWORK CONFIGURATION
# ============================================
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': (
        'rest_framework.authentication.SessionAuthentication',
        'rest_framework.authentication.BasicAuthentication',
    ),
    'DEFAULT_PERMISSION_CLASSES': (
        'rest_framework.permissions.IsAuthenticated',
    ),
    'DEFAULT_SCHEMA_CLASS': 'drf_spectacular.openapi.AutoSchema',
    'DEFAULT_PAGINATION_CLASS': 'rest_framework.pagination.PageNumberPagination',
    'PAGE_SIZE': 20,
    'DEFAULT_FILTER_BACKENDS': (
        'django_filters.rest_framework.DjangoFilterBackend',
        'rest_framework.filters.SearchFilter',
        'rest_framework.filters.OrderingFilter',
    ),
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
        'rest_framework.renderers.BrowsableAPIRenderer',
    ],
    'DATETIME_FORMAT': '%Y-%m-%dT%H:%M:%SZ',
}

# ============================================
# DRF SPECTACULAR (API DOCUMENTATION)
# ============================================
SPECTACULAR_SETTINGS = {
    'TITLE': 'Litmus Toolkit API',
    'DESCRIPTION': 'Litmus corpus, memory models and compile-and-compare batch results',
    'VERSION': '1.0.0',
    'SERVE_INCLUDE_SCHEMA': False,
}

# ============================================
# CELERY CONFIGURATION
# ============================================
CELERY_BROKER_URL = config('CELERY_BROKER_URL', default='redis://localhost:6379/0')
CELERY_RESULT_BACKEND = config('CELERY_RESULT_BACKEND', default='django-db')
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'

# Without a broker, batches run in-process
CELERY_TASK_ALWAYS_EAGER = config('CELERY_TASK_ALWAYS_EAGER', default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True

# A pipeline run is bounded by its stage timeouts; this is the backstop
CELERY_TASK_TIME_LIMIT = config('CELERY_TASK_TIME_LIMIT', default=30 * 60, cast=int)
CELERY_TASK_SOFT_TIME_LIMIT = CELERY_TASK_TIME_LIMIT - 60

CELERY_TASK_ROUTES = {
    'pipeline.tasks.*': {'queue': 'pipeline'},
}
