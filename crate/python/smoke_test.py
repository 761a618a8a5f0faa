"""Smoke test for the opspec_py extension module.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/py/Cargo.toml`.
"""

import math
import os
import tempfile

import opspec_py as op

SMALL = """
[grid]
n_modes = 32

[observations.layout]
kind = "spatial"
n = 32
time = 0.5
"""


def main():
    cfg = op.Config(SMALL)
    assert cfg.n_modes == 32
    assert len(cfg.hash()) == 64
    assert op.Config(cfg.to_toml()).hash() == cfg.hash()

    try:
        op.Config("[grid]\nbogus = 1\n")
    except op.OpspecError as e:
        assert str(e).startswith("config:"), e
    else:
        raise AssertionError("unknown keys must be rejected")

    # alpha = 2 is the Fickian model
    frade = op.Spectrum.frade(0.01, 2.0, 16)
    fick = op.Spectrum.fickian(0.01, 16)
    for k in range(1, 17):
        assert abs(frade.mu(k) - fick.mu(k)) < 1e-12 * abs(fick.mu(k))
    back = op.Spectrum.from_table(frade.to_table("abc"))
    assert back.values() == frade.values()
    r_star, theta_star = frade.rescaled()
    assert len(r_star) == len(theta_star) == 16

    data = op.generate_frade(cfg)
    assert len(data["values"]) == 32 and data["sigma"] is None

    res = op.calibrate_map(cfg)
    assert res.converged, res
    truth = data["truth"]
    for k in range(1, res.cutoff + 1):
        err = abs(res.spectrum.mu(k) - truth.mu(k)) / abs(truth.mu(k))
        assert err < 1e-3, (k, err)

    xs, fields = op.evolve(cfg, res.spectrum, [0.5, 1.5])
    _, exact = op.evolve(cfg, truth, [0.5, 1.5])
    assert max(abs(a - b) for a, b in zip(fields[1], exact[1])) < 1e-3
    assert len(xs) == len(fields[0])

    chk = op.check_derivatives(cfg, n_modes=8, seed=4)
    assert chk["passed"], chk

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "s.txt")
        with open(path, "w") as f:
            f.write(frade.to_table("abc"))
        t = op.read_table(path)
        assert t["meta"]["schema"] == "spectrum"
        assert t["meta"]["config_hash"] == "abc"
        assert [row[0] for row in t["rows"]] == list(range(1, 17))

    mc = op.Config(
        SMALL
        + """
[constants]
mean_velocity = 1.0
diffusivity = 0.7
fractional_order = 1.5

[observations]
noise_fraction = 0.01

[calibration]
bounds = "unit_box"
initial_guess = { kind = "fickian", diffusivity = 0.5 }
chain = { n_samples = 1000, burn_in = 200, seed = 1 }
"""
    )
    out = op.calibrate_mcmc(mc)
    assert len(out["intervals"]) == len(out["active"])
    assert all(lo <= hi for lo, hi in out["intervals"])
    assert 0.0 < out["acceptance"][0] < 1.0
    assert len(out["samples"][0]) == 1000

    hf = op.Config(
        """
[highfid]
grid = { lx = 1.0, ly = 1.0, nx = 32, ny = 32 }
times = [0.0, 0.5]

[interrogation]
probes = [1, 2]
n_snapshots = 5
"""
    )
    up = op.upscale(hf)
    assert up["times"] == [0.0, 0.5] and len(up["mean"][1]) == 32
    mass = [sum(m) / 32 for m in up["mean"]]
    assert math.isclose(mass[0], mass[1], rel_tol=1e-10)
    verdicts = op.interrogate(hf)
    assert "shift_invariance" in verdicts["report"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
