# Copyright 2026 The greenwood Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

import numpy as np
import pytest

import greenwood as gw


def test_statistic_hand_example():
    assert gw.modified_greenwood(np.array([1.0, -1.0, 2.0])) == 0.375
    assert gw.modified_greenwood([3.0, 3.0, 3.0, 3.0]) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        gw.modified_greenwood([1.0])


def test_sampling_is_reproducible():
    a = gw.sample("stable", 1.5, 1000, seed=3)
    b = gw.sample("stable", 1.5, 1000, seed=3)
    assert a.shape == (1000,)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, gw.sample("stable", 1.5, 1000, seed=3, stream=1))


def test_table_and_mg2(tmp_path):
    table = gw.build_quantile_table("gaussian", None, [100], [0.05], "upper",
                                    replications=5000, seed=1)
    assert len(table) == 1
    q = table.find("gaussian", None, 100, 0.05, "upper")
    assert 0.015 < q < 0.02
    path = tmp_path / "t.json"
    table.save(path)
    again = gw.QuantileTable.load(path)
    assert again.to_dict()["entries"] == table.to_dict()["entries"]

    spiky = np.r_[np.full(99, 1e-3), 1e3]
    out = gw.test("MG2", spiky, table)
    assert out["reject"] is True
    assert out["statistic"] > out["thresholds"][0]
    heavy = gw.sample("stable", 1.0, 100, seed=5)
    assert out["kind"] == "MG2"
    with pytest.raises(LookupError):
        gw.test("MG2", heavy[:50], table)


def test_spectrogram_shape():
    x = gw.sample("gaussian", None, 8000, seed=2)
    s = gw.spectrogram(x, sample_rate=1000.0, window_length=200)
    assert s.values.shape == (101, 40)
    assert (s.values >= 0).all()
    rows = gw.frequency_rows(s, 100.0, 200.0)
    assert len(rows) == 21
    assert rows[0][1].shape == (40,)
    w = gw.kaiser_window(11, 0.0)
    np.testing.assert_array_equal(w, np.ones(11))
