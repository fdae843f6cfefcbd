from cqstein.services.state_families.base import BaseStateFamily
from cqstein.services.state_families.factory import StateFamilyFactory

__all__ = ["BaseStateFamily", "StateFamilyFactory"]
