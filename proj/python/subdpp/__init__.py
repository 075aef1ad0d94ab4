# Copyright 2026 The subdpp Authors.
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
"""Low-rank determinantal point processes on large and continuous ground sets."""

from ._subdpp import (
    GreedyResult,
    GroundSet,
    LowRankL,
    ObservationSet,
    __version__,
    best_diagonal_baseline,
    chance_level,
    dense_l,
    expected_cardinality,
    fit,
    fourier_features,
    greedy_map,
    k_from_l,
    l_from_k,
    log_det_l_plus_i,
    log_likelihood,
    objective,
    sample,
    sample_kernel,
    split_sentences,
    subspace_distance,
    synth_spectrum,
    tokenize,
    word_cosine_neighbors,
)

__all__ = [
    "GreedyResult",
    "GroundSet",
    "LowRankL",
    "ObservationSet",
    "__version__",
    "best_diagonal_baseline",
    "chance_level",
    "dense_l",
    "expected_cardinality",
    "fit",
    "fourier_features",
    "greedy_map",
    "k_from_l",
    "l_from_k",
    "log_det_l_plus_i",
    "log_likelihood",
    "objective",
    "sample",
    "sample_kernel",
    "split_sentences",
    "subspace_distance",
    "synth_spectrum",
    "tokenize",
    "word_cosine_neighbors",
]
