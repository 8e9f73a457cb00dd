"""HTTP service and its thin client."""

from .app import create_app
from .client import ServiceClient, ServiceError

__all__ = ["ServiceClient", "ServiceError", "create_app"]
