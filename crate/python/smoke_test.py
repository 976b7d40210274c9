"""Smoke test for the capwave_py extension.

Build and run:
    cargo build -p capwave-py --release --features extension-module
    cp target/release/libcapwave_py.so python/capwave_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import capwave_py as cw


def main():
    grid = cw.SpectralGrid(64)
    x = grid.nodes()
    d = grid.derivative([math.sin(a) for a in x])
    assert max(abs(v - math.cos(a)) for v, a in zip(d, x)) < 1e-12
    h = grid.hilbert([math.cos(a) for a in x])
    assert max(abs(v - math.sin(a)) for v, a in zip(h, x)) < 1e-12
    assert cw.omega(4.0) == 8.0

    flat = cw.SurfaceState.from_angle(grid, [0.0] * 64, [0.5] * 64)
    model = cw.Model(grid, 1e-2)
    s = flat
    for _ in range(20):
        s = model.step(s)
    assert max(abs(v) for v in s.theta) < 1e-13

    wave = cw.SurfaceState.from_angle(grid, [1e-3 * math.cos(a) for a in x], [0.0] * 64)
    fields = model.derived_fields(wave)
    assert abs(max(fields["kappa"]) - 1e-3) < 1e-6
    inv = model.validate_state(wave)
    assert inv["chord_arc"] > 0.99

    big = cw.SurfaceState.from_angle(grid, [2.0 * math.cos(a) for a in x], [0.0] * 64)
    try:
        model.step(big)
    except RuntimeError as e:
        assert "chord-arc-abort" in str(e)
    else:
        raise AssertionError("expected a chord-arc abort")

    lin = cw.LinearSolution(grid, [math.cos(a) for a in x], [0.0] * 64)
    k, _ = lin.propagate(1.0)
    assert abs(k[0] - math.cos(1.0) * math.cos(x[0])) < 1e-12
    assert abs(lin.energy_linear(3.0) - math.pi) < 1e-12

    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "flat.toml")
        with open(cfg, "w") as f:
            f.write('mode = "nonlinear"\nsteps = 10\n[grid]\nn = 32\n')
        assert "q_min = 0.5" in cw.load_config(cfg)
        manifest = json.loads(cw.run_config(cfg, os.path.join(tmp, "out")))
        assert manifest["termination"]["reason"] == "completed"
        with open(os.path.join(tmp, "bad.toml"), "w") as f:
            f.write('mode = "nonlinear"\n[grid]\nn = 32\n[stepper]\ndtt = 1\n')
        try:
            cw.load_config(os.path.join(tmp, "bad.toml"))
        except ValueError as e:
            assert "dtt" in str(e)
        else:
            raise AssertionError("unknown key accepted")

    print("capwave_py smoke test passed")


if __name__ == "__main__":
    main()
