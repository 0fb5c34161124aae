"""
Django settings for config project.

Paramètres du projet hsifc : classification pixel par pixel des images
hyperspectrales à partir de la seule signature spectrale.

Toutes les valeurs sont lisibles depuis l'environnement (ou le fichier .env).
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables
load_dotenv(BASE_DIR / '.env')

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-dev-key-change-in-production')

DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = ['localhost', '127.0.0.1']

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    "rest_framework",
    "hsifc",  # Notre application de classification
]

# Database
# Aucune donnée n'est persistée en base : SQLite local suffit pour `manage.py check`.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'fr-fr'
TIME_ZONE = 'Europe/Paris'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Racine des jeux de données convertis (ENVI .hdr + .img)
HSIFC_DATA_DIR = Path(os.getenv('HSIFC_DATA_DIR', str(BASE_DIR / 'data')))

# Dossier par défaut des artefacts (modèles HSM1, rapports JSON, cartes PPM)
HSIFC_OUTPUT_DIR = Path(os.getenv('HSIFC_OUTPUT_DIR', str(BASE_DIR / 'runs')))

# Valeurs par défaut du protocole (surchargées par le fichier de config puis les flags)
HSIFC_TEST_FRACTION = float(os.getenv('HSIFC_TEST_FRACTION', '0.2'))
HSIFC_SEED = int(os.getenv('HSIFC_SEED', '0'))
HSIFC_EPOCHS = int(os.getenv('HSIFC_EPOCHS', '100'))
HSIFC_BATCH_SIZE = int(os.getenv('HSIFC_BATCH_SIZE', '256'))
HSIFC_LEARNING_RATE = float(os.getenv('HSIFC_LEARNING_RATE', '1e-3'))
HSIFC_DEFAULT_HIDDEN = [
    int(size) for size in os.getenv('HSIFC_DEFAULT_HIDDEN', '250,300,400,300').split(',') if size.strip()
]

HSIFC_LOG_LEVEL = os.getenv('HSIFC_LOG_LEVEL', 'DEBUG' if DEBUG else 'INFO')

# Configuration de logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'hsifc': {
            'handlers': ['console'],
            'level': HSIFC_LOG_LEVEL,
            'propagate': False,
        },
        'django': {
            'handlers': ['console'],
            'level': os.getenv('DJANGO_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
