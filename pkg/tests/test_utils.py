import numpy as np
import pytest

from pbvqo.utils import (
    derive_seed, histogram_counts, random_pulse_params, summarize,
    wrap_angle,
)


def test_derive_seed():
    seeds = [derive_seed(42, k) for k in range(100)]
    assert seeds == [derive_seed(42, k) for k in range(100)]
    assert len(set(seeds)) == 100
    assert all(0 <= s < 2 ** 32 for s in seeds)
    assert derive_seed(43, 0) != derive_seed(42, 0)
    with pytest.raises(ValueError):
        derive_seed(-1, 0)
    with pytest.raises(ValueError):
        derive_seed(0, -1)


def test_wrapping():
    assert wrap_angle(np.pi) == pytest.approx(np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    assert wrap_angle(0.3 + 4 * np.pi) == pytest.approx(0.3)


def test_random_pulse_params():
    params = random_pulse_params(np.random.default_rng(0), 3, 2.0)
    assert params.shape == (6,)
    assert np.all(np.abs(params[:3]) <= 2.0)
    assert np.all((0 <= params[3:]) & (params[3:] < 2 * np.pi))
    again = random_pulse_params(np.random.default_rng(0), 3, 2.0)
    assert np.array_equal(params, again)


def test_summarize():
    stats = summarize([1, 2, 3, 4, 100])
    assert stats["count"] == 5
    assert (stats["q1"], stats["median"], stats["q3"]) == (2, 3, 4)
    assert stats["min"] == stats["best"] == 1
    assert stats["max"] == 100
    assert stats["mean"] == 22
    # 100 is beyond Q3 + 1.5 IQR = 7
    assert stats["outliers"] == [100]
    assert (stats["whisker_low"], stats["whisker_high"]) == (1, 4)

    assert summarize([]) == {"count": 0}
    single = summarize([None, 0.5])
    assert single["count"] == 1 and single["median"] == 0.5
    assert single["outliers"] == []


def test_histogram_counts():
    edges, counts = histogram_counts({"a": [0.1, 0.5, 1.0], "b": [0.0]},
                                     bins=2)
    assert np.allclose(edges, [0, 0.5, 1])
    assert list(counts["a"]) == [1, 2]
    assert list(counts["b"]) == [1, 0]

    edges, counts = histogram_counts({"a": []}, bins=4)
    assert edges[-1] == 1.0 and list(counts["a"]) == [0] * 4
    with pytest.raises(ValueError):
        histogram_counts({"a": [0.1]}, bins=0)
