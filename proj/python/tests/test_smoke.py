import math

import numpy as np
import pytest

import specswin


def test_paper_sequence_is_complete():
    seq = specswin.paper_sequence()
    assert seq.depth == 16
    assert seq.bands == [9, 20, 30, 40, 52]
    assert seq.is_complete()
    assert specswin.missing_pairs(seq) == []


def test_min_sequence_length():
    assert specswin.min_sequence_length(5) == 11
    built = specswin.build_sequence([9, 20, 30, 40, 52], 16)
    assert built.depth == 16 and built.is_complete()


def test_parse_band_list_rejects_garbage():
    assert specswin.parse_band_list("9,20,30") == [9, 20, 30]
    with pytest.raises(specswin.ConfigError):
        specswin.parse_band_list("9,x")


def test_epoch_schedule():
    assert specswin.cascade_epoch_schedule() == [80, 72, 65, 58, 53]


def test_pyramid_table_sizes():
    levels = specswin.pyramid_levels(specswin.Strategy.PHYSICAL)
    assert [len(level) for level in levels] == [9, 3, 7, 3, 7]
    assert len(specswin.finetune_bands(specswin.Strategy.PHYSICAL)) == 195


def test_cube_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.random((8, 6, 3), dtype=np.float32)
    cube = specswin.SpectralCube(arr, [500.0, 600.0, 700.0])
    np.testing.assert_array_equal(cube.to_numpy(), arr)
    specswin.save_cube(cube, tmp_path / "c.bin")
    back = specswin.load_cube(tmp_path / "c.bin")
    np.testing.assert_array_equal(back.to_numpy(), arr)
    assert back.wavelengths == [500.0, 600.0, 700.0]


def test_metrics_match_numpy():
    rng = np.random.default_rng(1)
    ref = rng.random((16, 16, 4), dtype=np.float32) + 0.1
    rec = ref + rng.normal(0, 0.01, ref.shape).astype(np.float32)
    a, b = specswin.SpectralCube(ref), specswin.SpectralCube(rec)
    r, g = ref.astype(np.float64), rec.astype(np.float64)
    mse = np.mean((r - g) ** 2)
    assert specswin.rmse(a, b) == pytest.approx(math.sqrt(mse), rel=1e-9)
    assert specswin.psnr(a, b) == pytest.approx(10 * math.log10(r.max() ** 2 / mse), rel=1e-9)
    cos = np.sum(r * g, axis=2) / (np.linalg.norm(r, axis=2) * np.linalg.norm(g, axis=2))
    assert specswin.sam(a, b) == pytest.approx(np.degrees(np.arccos(np.clip(cos, -1, 1))).mean(), rel=1e-6)
    report = specswin.evaluate(a, b)
    assert report["psnr"] == pytest.approx(specswin.psnr(a, b))
    assert math.isinf(specswin.psnr(a, a))


def test_ndvi_and_burn_mask():
    wl = [660.0, 850.0, 2200.0]
    pre = np.zeros((4, 4, 3), dtype=np.float32)
    pre[..., 0], pre[..., 1], pre[..., 2] = 0.1, 0.5, 0.1
    post = pre.copy()
    post[:2, :, 1] = 0.1
    ndvi = specswin.ndvi(specswin.SpectralCube(pre, wl))
    np.testing.assert_allclose(ndvi, (0.5 - 0.1) / (0.5 + 0.1))
    mask = specswin.burn_mask(specswin.SpectralCube(pre, wl), specswin.SpectralCube(post, wl), 0.2)
    assert mask[:2].all() and not mask[2:].any()


def test_linear_interpolation_baseline():
    scene = specswin.synthetic_scene(height=16, width=16, seed=3)
    msi = specswin.SpectralCube(scene.to_numpy()[:, :, [10, 40]], [scene.wavelengths[10], scene.wavelengths[40]])
    out = specswin.linear_interpolation(msi, [scene.wavelengths[25]])
    assert out.bands == 1 and out.height == 16


def test_bandseq_report():
    assert "complete=yes" in specswin.bandseq_report(published=True)


def test_synthetic_scene_custom_wavelengths():
    wl = [450.0, 550.0, 650.0, 800.0]
    scene = specswin.synthetic_scene(height=8, width=8, wavelengths=wl, seed=1)
    assert scene.bands == 4 and scene.wavelengths == wl
    default = specswin.synthetic_scene(height=8, width=8)
    assert default.bands == 224
