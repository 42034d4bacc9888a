# CLI Middlewares Package
from cli.middlewares.registry import RegistryMiddleware

__all__ = ["RegistryMiddleware"]
