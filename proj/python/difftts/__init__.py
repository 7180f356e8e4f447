# Copyright 2026 The difftts Authors
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

"""Diffusion text-to-speech: training, sampling, editing, and metrics."""

# Installed wheels place the extension inside the package; the in-tree
# test layout puts it on sys.path directly.
try:
    from ._difftts import (  # noqa: F401
        Error,
        Synthesizer,
        UsageError,
        default_train_config,
        fsd_between_sets,
        inference_alpha_bars,
        normalize_text,
        read_wav,
        resample,
        toy_train_config,
        train,
        write_wav,
    )
except ImportError:
    from _difftts import (  # noqa: F401
        Error,
        Synthesizer,
        UsageError,
        default_train_config,
        fsd_between_sets,
        inference_alpha_bars,
        normalize_text,
        read_wav,
        resample,
        toy_train_config,
        train,
        write_wav,
    )

__all__ = [
    "Error",
    "Synthesizer",
    "UsageError",
    "default_train_config",
    "fsd_between_sets",
    "inference_alpha_bars",
    "normalize_text",
    "read_wav",
    "resample",
    "toy_train_config",
    "train",
    "write_wav",
]
