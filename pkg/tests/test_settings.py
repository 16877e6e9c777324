from django.conf import settings


def test_no_database_settings():
    assert settings.DATABASES == {}
    assert not settings.is_overridden("DEFAULT_AUTO_FIELD"), (
        "Make sure no model field default is configured: the project has "
        "no models."
    )
