from django.apps import AppConfig


class HsifcConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'hsifc'
    verbose_name = 'Classification hyperspectrale par signature'
