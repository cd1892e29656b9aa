# Copyright 2026 The qdiana Authors. All Rights Reserved.
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
# ==============================================================================

import json
import math

import numpy as np
import pytest

import qdiana

CONFIG = {
    "problem": {"type": "synthetic", "loss": "logistic", "d": 8, "n": 2, "m": 4, "seed": 1},
    "method": {"name": "vr-diana", "variant": "saga", "gamma": "auto:strongly_convex"},
    "quantizer": {"scheme": "dither", "p": 2, "s": 1},
    "run": {"iters": 20, "seed": 3, "cadence": 5},
}


def test_identity_quantize_is_exact():
    x = np.array([1.5, -2.0, 0.25])
    decoded, bits = qdiana.quantize(x, scheme="identity")
    np.testing.assert_array_equal(decoded, x)
    assert bits == 3 * 64


def test_dither_is_unbiased():
    x = np.array([3.0, 4.0])
    total = np.zeros(2)
    for seed in range(4000):
        decoded, _ = qdiana.quantize(x, scheme="dither", seed=seed)
        total += decoded
    np.testing.assert_allclose(total / 4000, x, atol=0.3)


def test_omega_bound():
    assert qdiana.omega_bound("sparsify", 10, r=1) == 9.0
    assert qdiana.omega_bound("identity", 10) == 0.0
    assert math.isclose(qdiana.omega_bound("block_dither", 8, block_size=2), math.sqrt(2) + 1)


def test_run_trace():
    trace = qdiana.run(json.dumps(CONFIG))
    assert trace["k"] == [0, 5, 10, 15, 20]
    assert len(trace["x_final"]) == 8
    assert trace["uplink_total"] == trace["bits_up_cum"][-1]
    assert trace["f_gap"][-1] < trace["f_gap"][0]
    again = qdiana.run(json.dumps(CONFIG))
    np.testing.assert_array_equal(trace["x_final"], again["x_final"])
    assert trace["f_gap"] == again["f_gap"]


def test_errors_are_translated():
    with pytest.raises(qdiana.Error):
        qdiana.quantize(np.array([1.0]), scheme="sparsify", r=5)
    with pytest.raises(qdiana.Error, match="method.gamme"):
        bad = dict(CONFIG, method={"name": "diana", "gamme": 1})
        qdiana.run(json.dumps(bad))


def test_cli_help():
    code, out, _ = qdiana.cli(["--help"])
    assert code == 0
    assert "run" in out
