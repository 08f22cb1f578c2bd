"""Smoke test for the lfsgm_py extension module.

Build and install first, e.g.:
    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
then run:
    python python/smoke_test.py
"""

import math
import os
import tempfile

import lfsgm_py as lf


def main():
    cfg = lf.PipelineConfig(directions=8, bounding=True)
    assert ("directions", "8") in cfg.to_dict()

    field, gt = lf.synthesize(2.0, s=5, t=5, texture_size=64, texture_seed=1)
    assert field.angular == (5, 5)
    assert gt.shape == (field.height, field.width)

    result = lf.estimate(field, cfg)
    margin = math.ceil(2.0 * 2) + 4
    bp = lf.badpix(result.disparity, gt, margin=margin)
    print(f"badpix={bp:.3f}% runtime={result.runtime_seconds:.3f}s "
          f"sampled_fraction={result.sampled_fraction:.3f}")
    assert bp <= 1.0, bp
    assert 0.0 < result.sampled_fraction <= 1.0
    assert lf.m_metric(20.0, 2.0) == 40.0
    assert lf.mse(gt, gt) == 0.0

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "d.pfm")
        lf.write_pfm(path, result.disparity)
        back = lf.read_pfm(path)
        # PFM stores 32-bit floats.
        assert all(abs(a - b) < 1e-5 for a, b in zip(back.values(), result.disparity.values()))
        lf.write_pfm(path, back)
        assert lf.read_pfm(path) == back
        lf.write_png(os.path.join(tmp, "d.png"), result.disparity, *field.disparity_range)
        field.save(os.path.join(tmp, "scene"))
        again = lf.LightField.load(os.path.join(tmp, "scene"))
        assert again.angular == field.angular

    try:
        lf.PipelineConfig(phi="abc")
    except ValueError:
        pass
    else:
        raise AssertionError("bad config accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
