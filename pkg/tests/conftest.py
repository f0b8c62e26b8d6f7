from __future__ import annotations

import numpy as np
import pytest

from config.settings import ExperimentConfig
from data.ball_cache import CACHE_ENV
from spaces.space import path_space


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Keep the ball cache of every test inside its own temp directory."""
    cache_dir = tmp_path / "ball_cache"
    monkeypatch.setenv(CACHE_ENV, str(cache_dir))
    return cache_dir


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def path10():
    return path_space(10)


@pytest.fixture
def small_config(tmp_path) -> ExperimentConfig:
    """A config whose every run finishes in well under a second."""
    config = ExperimentConfig(experiment="test", output_base_dir=str(tmp_path / "out"))
    config.profile.spaces = ["z^1"]
    config.profile.ball_radii = [5]
    config.profile.radii = [1, 2]
    config.witness.space = "z^1@6"
    config.witness.scales = [1, 2]
    config.witness.projection_samples = 50
    config.demo.wreath_group = "wreath(cyclic:2,z^1)"
    config.demo.wreath_radius = 1
    config.demo.grigorchuk_radius = 1
    config.demo.radii = [1]
    config.demo.witness_scales = [1]
    return config
