# Copyright 2026 The DRGame Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import json

import numpy as np
import pytest
import scipy.sparse as sp

import drgame


def test_preferences_hand_example():
    # One user, three games; game 2 has zero playtime but is still stored.
    playtime = sp.coo_matrix(([30.0, 10.0, 0.0], ([0, 0, 0], [0, 1, 2])), shape=(1, 3))
    cats = sp.csr_matrix(np.array([[1, 0], [1, 0], [0, 1]], dtype=float))
    out = drgame.preferences(playtime, cats)
    assert out["percentile"].nnz == 3
    assert out["implicit"].nnz == 3
    assert out["preference"].shape == (1, 2)
    assert np.all(out["implicit"].data > 0)


def test_category_weights_worked_example():
    cats = sp.csr_matrix(np.array([[1, 0], [1, 0], [0, 1]], dtype=float))
    np.testing.assert_allclose(drgame.category_weights(cats), [2 / 3, 2 / 3, 4 / 3], atol=1e-12)


def test_metrics():
    ranked = [[0, 1, 2], [3, 4, 5]]
    test = [[1], [9]]
    assert drgame.recall_at_n(ranked, test, 2) == pytest.approx(0.5)
    primary, classic = drgame.hit_ratio_at_n(ranked, test, 2)
    assert classic == pytest.approx(0.5)
    assert primary == pytest.approx(0.5)


def test_kmeans_and_softmax():
    pts = np.vstack([np.zeros((5, 2)), np.full((5, 2), 10.0)])
    labels, centroids = drgame.kmeans(pts, 2, seed=3)
    assert len(set(labels[:5])) == 1 and len(set(labels[5:])) == 1
    assert labels[0] != labels[5]
    assert centroids.shape == (2, 2)
    np.testing.assert_allclose(drgame.softmax(np.zeros(4)), np.full(4, 0.25))


def test_usage_error_maps_to_exception():
    with pytest.raises(drgame.UsageError):
        drgame.load_config(overrides=["nope.key=1"])


def test_pipeline_end_to_end(tmp_path):
    drgame.make_synthetic(users=60, items=40, categories=6, seed=5, out=str(tmp_path / "data"))
    config = drgame.default_config()
    config["paths"].update(
        interactions=str(tmp_path / "data" / "interactions.jsonl"),
        items=str(tmp_path / "data" / "items.jsonl"),
        workdir=str(tmp_path / "work"),
    )
    config["repr"].update(dim=8, dgi_epochs=20)
    config["train"].update(dim=8, max_epochs=5, batch_size=128, validation_n=5)
    config["gnn"]["layers"] = 2
    config["eval"]["ns"] = [5]
    with drgame.Pipeline(config) as p:
        p.all()
        metrics = json.loads((tmp_path / "work" / "metrics.json").read_text())
        assert metrics
        rec = p.recommend("p00000", 5)
        assert rec["user_id"] == "p00000"
        assert len(rec["item_ids"]) == 5
