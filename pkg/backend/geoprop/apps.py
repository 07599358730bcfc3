from django.apps import AppConfig


class GeopropConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'geoprop'
    verbose_name = 'GEOPROP location inference'
