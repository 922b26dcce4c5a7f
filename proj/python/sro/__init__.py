# Copyright 2026 The sro Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Sampler-robust portfolio optimization."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_backtest as _run_backtest
from ._core import run_controlled as _run_controlled


def _as_json(config):
    return config if isinstance(config, str) else _json.dumps(config)


def run_controlled(config, out_dir=None):
    """Run the controlled study. `config` is a dict or a JSON string."""
    return _run_controlled(_as_json(config), out_dir)


def run_backtest(config, out_dir=None):
    """Run the rolling backtest. `config` is a dict or a JSON string."""
    return _run_backtest(_as_json(config), out_dir)
