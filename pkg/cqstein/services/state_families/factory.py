import importlib
import logging
from typing import Any, Type

from cqstein.core.errors import UnsupportedSetKind
from cqstein.services.state_families.base import BaseStateFamily

logger = logging.getLogger(__name__)


class StateFamilyFactory:
    """
    Factory class to dynamically load and instantiate free-state families.
    """

    # Key: family tag, Value: (module_path, class_name)
    FAMILY_MAP = {
        "ppt_2x2": ("cqstein.services.state_families.ppt", "PptTwoQubitFamily"),
        "incoherent": ("cqstein.services.state_families.incoherent", "IncoherentFamily"),
        "fixed_state": ("cqstein.services.state_families.fixed_state", "FixedStateFamily"),
    }

    @classmethod
    def get_family_class(cls, name: str) -> Type[BaseStateFamily]:
        key = name.lower()
        if key not in cls.FAMILY_MAP:
            raise UnsupportedSetKind(f"Unsupported state family: {name}")

        module_path, class_name = cls.FAMILY_MAP[key]
        try:
            module = importlib.import_module(module_path)
            return getattr(module, class_name)
        except ImportError as e:
            logger.error(f"Failed to import module {module_path}: {e}")
            raise
        except AttributeError as e:
            logger.error(f"Class {class_name} not found in {module_path}: {e}")
            raise

    @classmethod
    def create_family(cls, name: str, dim: int, **params: Any) -> BaseStateFamily:
        """
        Instantiate a family for the given tag and dimension.
        """
        family_class = cls.get_family_class(name)
        return family_class(dim, **params)

    @classmethod
    def available(cls):
        return sorted(cls.FAMILY_MAP)
