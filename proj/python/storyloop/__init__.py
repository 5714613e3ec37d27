# Copyright 2026 The Storyloop Authors.
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

"""Edit-based evaluation, context packing and corpus tools for story writing."""

from storyloop._storyloop import (
    StoryloopError,
    corpus_stats,
    diff,
    fleiss_kappa,
    pearson,
    rouge_l,
    rouge_w,
    solve_policy,
    split,
    tokenize,
    truncate_sentences,
    user_score,
)

__all__ = [
    "StoryloopError",
    "corpus_stats",
    "diff",
    "fleiss_kappa",
    "pearson",
    "rouge_l",
    "rouge_w",
    "solve_policy",
    "split",
    "tokenize",
    "truncate_sentences",
    "user_score",
]
