import numpy as np
import pytest

from community_explore.core.generators import DistributionSpec, generate_instance
from community_explore.core.model import RngHandle
from community_explore.exceptions import ConfigError


class TestDistributionSpec:
    def test_from_dict(self):
        spec = DistributionSpec.from_dict({"kind": "uniform", "m": 4, "lo": 2, "hi": 10})
        assert spec.label == "uniform(2,10)"
        assert spec.to_dict() == {"kind": "uniform", "m": 4, "lo": 2, "hi": 10}

    def test_unknown_field(self):
        with pytest.raises(ConfigError) as info:
            DistributionSpec.from_dict({"kind": "uniform", "m": 4, "lo": 2, "hi": 10, "mean": 3})
        assert "unknown distribution field 'mean'" in info.value.problems

    @pytest.mark.parametrize(
        "data",
        [
            {"kind": "gamma", "m": 5, "shape": 2.0},
            {"kind": "uniform", "m": 5, "lo": 8, "hi": 3},
            {"kind": "geometric", "m": 5, "p": 1.5},
            {"kind": "zipf", "m": 5},
            {"kind": "geometric", "p": 0.5},
        ],
    )
    def test_invalid(self, data):
        with pytest.raises(ConfigError):
            DistributionSpec.from_dict(data)

    def test_gamma_needs_both_parameters(self):
        problems = DistributionSpec("gamma", 3).problems()
        assert len(problems) == 2


class TestGenerateInstance:
    def test_uniform_range(self):
        spec = DistributionSpec("uniform", 200, lo=3, hi=6)
        instance = generate_instance(spec, RngHandle(0))
        assert instance.m == 200
        assert min(instance.sizes) >= 3
        assert max(instance.sizes) <= 6
        assert set(instance.sizes) == {3, 4, 5, 6}

    def test_geometric_mean(self):
        spec = DistributionSpec("geometric", 5000, p=0.1)
        sizes = generate_instance(spec, RngHandle(1)).sizes
        assert min(sizes) >= 2
        assert np.mean(sizes) == pytest.approx(11.0, abs=0.6)

    def test_gamma_sizes_start_at_two(self):
        spec = DistributionSpec("gamma", 500, shape=2.0, rate=0.5)
        sizes = generate_instance(spec, RngHandle(2)).sizes
        assert min(sizes) >= 2
        assert np.mean(sizes) == pytest.approx(2.0 / 0.5 + 1.5, abs=0.6)

    def test_seeded(self):
        spec = DistributionSpec("geometric", 20, p=0.3)
        assert generate_instance(spec, RngHandle(5)) == generate_instance(spec, RngHandle(5))
