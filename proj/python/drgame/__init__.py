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


"""Python access to the DRGame recommender core."""

import json

import numpy as np
import scipy.sparse as sp

from . import _drgame
from ._drgame import (
    DataError,
    Error,
    NumericError,
    UsageError,
    category_embeddings,
    cluster_count,
    coverage_at_n,
    hit_ratio_at_n,
    kmeans,
    make_synthetic,
    recall_at_n,
    softmax,
)

__all__ = [
    "DataError", "Error", "NumericError", "UsageError", "Pipeline",
    "category_embeddings", "category_weights", "cluster_count", "coverage_at_n",
    "default_config", "hit_ratio_at_n", "kmeans", "load_config", "make_synthetic",
    "preferences", "recall_at_n", "softmax",
]


def _csr(parts):
    indptr, indices, data, shape = parts
    return sp.csr_matrix((np.asarray(data), np.asarray(indices), np.asarray(indptr)),
                         shape=shape)


def _coo(matrix):
    m = sp.coo_matrix(matrix)
    return m.row.astype(np.int32).tolist(), m.col.astype(np.int32).tolist(), m.shape


def preferences(playtime, categories, denominator="any_touched_category"):
    """Percentile, category preference and implicit preference.

    `playtime` is a users x items scipy matrix whose *stored* entries are the
    interactions, zeros included. `categories` is the items x categories
    0/1 membership matrix.
    """
    r = sp.coo_matrix(playtime)
    ci, cc, (_, num_cats) = _coo(categories)
    out = _drgame.preferences(r.row.astype(np.int32).tolist(), r.col.astype(np.int32).tolist(),
                              r.data.astype(float).tolist(), r.shape[0], r.shape[1],
                              ci, cc, num_cats, denominator)
    return {
        "percentile": _csr(out["percentile"]),
        "preference": np.asarray(out["preference"]),
        "implicit": _csr(out["implicit"]),
    }


def category_weights(categories):
    """Per-item loss weights from an items x categories membership matrix."""
    ci, cc, (num_items, num_cats) = _coo(categories)
    return np.asarray(_drgame.category_weights(ci, cc, num_items, num_cats))


def default_config():
    return json.loads(_drgame.default_config_json())


def load_config(path=None, overrides=()):
    return json.loads(_drgame.load_config_json(path, list(overrides)))


class Pipeline:
    """Workdir pipeline; holds the workdir lock until closed."""

    def __init__(self, config=None, force=False):
        self._impl = _drgame.Pipeline(json.dumps(config or default_config()), force)

    def __getattr__(self, name):
        if name in ("ingest", "preprocess", "embed", "select", "train", "evaluate",
                    "all", "sweep", "recommend_all", "workdir"):
            return getattr(self._impl, name)
        raise AttributeError(name)

    def recommend(self, user_id, n=10):
        return json.loads(self._impl.recommend_json(user_id, n))

    def close(self):
        self._impl = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
