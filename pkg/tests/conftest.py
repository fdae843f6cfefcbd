"""
Shared fixtures: seeded generator, catalogue channels and channel files on disk.
"""
import numpy as np
import pytest

from cqstein.core.config import settings
from cqstein.services import catalogue
from cqstein.services.channel_io import save_channel, save_free_set
from cqstein.services.free_sets import FreeSetDescriptor


@pytest.fixture
def rng():
    """Generator seeded from settings so every run draws the same instances."""
    return np.random.default_rng(settings.SEED)


@pytest.fixture
def flip():
    return catalogue.orthogonal_flip_channel()


@pytest.fixture
def constant_zero():
    return catalogue.constant_zero_channel()


@pytest.fixture
def depolarizing():
    return catalogue.qubit_depolarizing()


@pytest.fixture
def classical_copy():
    return catalogue.classical_copy_channel()


@pytest.fixture
def qubit_replacer():
    return FreeSetDescriptor.replacer(2, 2)


@pytest.fixture
def depolarizing_set():
    return catalogue.depolarizing_singleton()


@pytest.fixture
def channel_files(tmp_path):
    """Catalogue channels and two free sets written as spec files."""
    paths = {}
    for name in ("flip", "constant_zero", "depolarizing"):
        paths[name] = save_channel(catalogue.get_channel(name), tmp_path / f"{name}.json", name=name)
    paths["biased_90"] = save_channel(catalogue.biased_channel(0.9), tmp_path / "biased_90.json")
    paths["biased_99"] = save_channel(catalogue.biased_channel(0.99), tmp_path / "biased_99.json")
    paths["replacer"] = save_free_set(FreeSetDescriptor.replacer(2, 2), tmp_path / "replacer.json")
    paths["singleton"] = save_free_set(catalogue.depolarizing_singleton(), tmp_path / "singleton.json")
    return paths
