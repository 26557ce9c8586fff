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

"""Python access to the wxforge core library."""

from ._wxforge import (
    Error,
    augment_source,
    contrastive,
    families,
    frechet,
    mmd2,
    pearson,
    pearson_p_value,
    read_embeddings,
    write_embeddings,
)

__all__ = [
    "Error",
    "augment_source",
    "contrastive",
    "families",
    "frechet",
    "mmd2",
    "pearson",
    "pearson_p_value",
    "read_embeddings",
    "write_embeddings",
]
