# Copyright 2026 The wxforge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

import wxforge

ROAD, BUILDING, SKY = 0, 2, 10
REPO = Path(os.environ.get("WXFORGE_SOURCE_DIR", Path(__file__).resolve().parents[2]))


@pytest.fixture
def sources(tmp_path):
    h, w = 48, 64
    rows = np.arange(h)[:, None].repeat(w, axis=1)
    seg = np.where(rows < 16, SKY, np.where(rows < 24, BUILDING, ROAD)).astype(np.uint8)
    rgb = np.zeros((h, w, 3), np.uint8)
    rgb[seg == SKY] = (130, 190, 235)
    rgb[seg == BUILDING] = (150, 100, 80)
    rgb[seg == ROAD] = (85, 90, 100)
    rgb[..., 0] += (np.arange(w) % 7).astype(np.uint8)
    # 16-bit inverse depth: far rows are near zero.
    depth = (rows / h * 65535).astype(np.uint16)

    Image.fromarray(rgb).save(tmp_path / "a.png")
    Image.fromarray(seg).save(tmp_path / "a_seg.png")
    Image.fromarray(depth).save(tmp_path / "a_depth.png")
    record = {
        "image_id": "a",
        "image": str(tmp_path / "a.png"),
        "seg": str(tmp_path / "a_seg.png"),
        "depth": str(tmp_path / "a_depth.png"),
        "boxes": [],
    }
    path = tmp_path / "sources.json"
    path.write_text(json.dumps([record]))
    return path, rgb


def test_families():
    assert len(wxforge.families()) == 7
    assert "dense_fog" in wxforge.families()


def test_augment_is_deterministic(sources):
    path, rgb = sources
    a = wxforge.augment_source(path, "a", "dense_fog", 3, seed=11)
    b = wxforge.augment_source(path, "a", "dense_fog", 3, seed=11)
    assert a.shape == rgb.shape and a.dtype == np.uint8
    assert np.array_equal(a, b)
    assert not np.array_equal(a, rgb)


def test_domain_errors_carry_kind(sources):
    path, _ = sources
    with pytest.raises(wxforge.Error) as info:
        wxforge.augment_source(path, "a", "dense_fog", 9)
    assert info.value.args[0] == "level-out-of-range"
    with pytest.raises(wxforge.Error) as info:
        wxforge.augment_source(path, "a", "hail", 1)
    assert info.value.args[0] == "unknown-family"


def test_embeddings_round_trip(tmp_path):
    rows = np.random.default_rng(0).normal(size=(5, 3)).astype(np.float32)
    wxforge.write_embeddings(tmp_path / "x.wxe", rows, [f"r{i}" for i in range(5)], "demo")
    back, ids, tag = wxforge.read_embeddings(tmp_path / "x.wxe")
    assert np.array_equal(back, rows)
    assert ids == ["r0", "r1", "r2", "r3", "r4"]
    assert tag == "demo"


def test_golden_file_reads():
    rows, ids, tag = wxforge.read_embeddings(REPO / "tests" / "golden" / "small.wxe")
    assert tag == "golden-space"
    assert ids == ["first", "zweite-é"]
    assert rows[1, 2] == 65504.0


def test_distances():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(400, 4))
    assert wxforge.frechet(x, x) == pytest.approx(0.0, abs=1e-8)
    assert wxforge.frechet(x, x + 1.0) == pytest.approx(4.0, rel=1e-9)
    assert wxforge.mmd2(x, x, unbiased=False) == 0.0
    # Two single points at distance d: biased MMD² = 2 − 2·exp(−d²/2σ²).
    p, q = np.zeros((1, 2)), np.array([[3.0, 4.0]])
    want = 2 - 2 * math.exp(-25 / 200)
    assert wxforge.mmd2(p, q, scale=1.0, unbiased=False) == pytest.approx(want, rel=1e-12)
    assert wxforge.contrastive({"fog": 1.0, "rain": 2.0, "snow": 3.0}, "fog") == pytest.approx(3.0)


def test_correlation():
    r, p, n = wxforge.pearson([1, 2, 3, 4, 5], [2, 4, 5, 4, 5])
    assert n == 5
    assert r == pytest.approx(0.7745966692, rel=1e-9)
    assert p == pytest.approx(wxforge.pearson_p_value(r, 5))
    assert 0.1 < p < 0.15
