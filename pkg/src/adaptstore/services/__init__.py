from adaptstore.services.auth import AuthService, sign_session, validate_session
from adaptstore.services.images import (
    CacheImgFront,
    ImageProviderService,
    StaticImageService,
)
from adaptstore.services.persistence import (
    CacheDbFront,
    PersistenceInstance,
    ProviderStore,
    StaticDbService,
)
from adaptstore.services.recommender_service import RecommenderService
from adaptstore.services.webui import WebUiService

__all__ = [
    "AuthService",
    "CacheDbFront",
    "CacheImgFront",
    "ImageProviderService",
    "PersistenceInstance",
    "ProviderStore",
    "RecommenderService",
    "StaticDbService",
    "StaticImageService",
    "WebUiService",
    "sign_session",
    "validate_session",
]
