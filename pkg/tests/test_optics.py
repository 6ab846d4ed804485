import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holofocus import tensor as T
from holofocus.optics import (ComplexField, OpticalConfig, differentiable_propagate, frequency_grid,
                              intensity, make_kernel, normalize_hologram, propagate, propagate_pair, propagate_stack,
                              rayleigh_sommerfeld_sum, synthesize_hologram, transmittance_from_image)
from holofocus.samples import make_sample
from holofocus.tensor import Tensor

from gradcheck import check

DESK = OpticalConfig(532e-9, 2e-6, (64, 64))
# fine pitch so part of the spectrum is evanescent
FINE = OpticalConfig(532e-9, 0.2e-6, (64, 64))


def random_field(config, seed=0):
    rng = np.random.default_rng(seed)
    return ComplexField(rng.normal(size=config.grid), rng.normal(size=config.grid), config)


def band_limited(fld):
    fx, fy = frequency_grid(fld.config)
    lam = fld.config.wavelength
    mask = 1 - (lam * fx) ** 2 - (lam * fy) ** 2 >= 0
    return ComplexField.from_complex(np.fft.ifft2(np.fft.fft2(fld.values) * mask), fld.config)


def rms(a, b):
    return float(np.sqrt(np.mean(np.abs(a - b) ** 2)))


def test_config_validation():
    with pytest.raises(ValueError):
        OpticalConfig(-1.0, 2e-6, (8, 8))
    with pytest.raises(ValueError):
        OpticalConfig(532e-9, 2e-6, (1, 8))


def test_zero_distance_kernel_is_identity():
    k = make_kernel(FINE, 0.0)
    band = np.abs(k.transfer) > 0
    assert band.any() and not band.all()
    np.testing.assert_array_equal(k.transfer[band], 1.0)


def test_dc_phase():
    z = 5000e-6
    k = make_kernel(DESK, z)
    expected = (2 * np.pi * z / 532e-9) % (2 * np.pi)
    got = np.angle(k.transfer[0, 0]) % (2 * np.pi)
    assert abs(k.transfer[0, 0]) == pytest.approx(1.0, abs=1e-15)
    assert got == pytest.approx(expected, abs=1e-9)


def test_kernel_unit_modulus_and_evanescent_zero():
    k = make_kernel(FINE, 37e-6)
    mag = np.abs(k.transfer)
    prop = mag > 0
    np.testing.assert_allclose(mag[prop], 1.0, atol=1e-12)
    assert np.all(mag <= 1.0 + 1e-12)
    assert (~prop).sum() > 0


def test_kernel_conjugacy_exact():
    for z in (1e-6, 5e-3, 123.4e-6):
        np.testing.assert_array_equal(make_kernel(FINE, -z).transfer, np.conj(make_kernel(FINE, z).transfer))


def test_propagate_zero_is_identity():
    f = random_field(DESK)
    g = propagate(f, 0.0)
    np.testing.assert_allclose(g.values, f.values, atol=1e-14)


@pytest.mark.parametrize("config", [DESK, FINE], ids=["desk-pitch", "fine-pitch"])
def test_round_trip(config):
    f = band_limited(random_field(config, 1))
    back = propagate(propagate(f, 5e-3), -5e-3)
    assert rms(back.values, f.values) < 1e-6


def test_composition():
    f = random_field(DESK, 2)
    direct = propagate(f, 4.5e-3 + 0.7e-3)
    chained = propagate(propagate(f, 4.5e-3), 0.7e-3)
    assert rms(direct.values, chained.values) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(-6e-3, 6e-3), st.integers(0, 2 ** 16))
def test_energy_conserved_on_propagating_band(z, seed):
    f = band_limited(random_field(FINE, seed))
    g = propagate(f, z)
    e0 = np.sum(np.abs(f.values) ** 2)
    assert np.sum(np.abs(g.values) ** 2) == pytest.approx(e0, rel=1e-6)


def test_hologram_of_empty_scene_is_unity():
    t = ComplexField(np.ones(DESK.grid), np.zeros(DESK.grid), DESK)
    h = synthesize_hologram(t, 5e-3)
    np.testing.assert_allclose(h.intensity, 1.0, atol=1e-12)
    assert h.true_distance == 5e-3


def test_hologram_rejects_gain():
    t = ComplexField(np.full(DESK.grid, 1.5), np.zeros(DESK.grid), DESK)
    with pytest.raises(ValueError):
        synthesize_hologram(t, 1e-3)


def test_full_scale_hologram():
    cfg = OpticalConfig(532e-9, 2.0e-6, (500, 500))
    t = transmittance_from_image(make_sample("target", 500), cfg)
    h = synthesize_hologram(t, 5000e-6)
    assert h.intensity.shape == (500, 500)
    assert h.true_distance == 5000e-6
    assert np.all(h.intensity >= 0)
    # in-line hologram of an absorbing object differs from the bare object
    assert np.abs(h.intensity - t.amplitude ** 2).mean() > 0.01


def test_disk_matches_rayleigh_sommerfeld_sum():
    cfg = OpticalConfig(532e-9, 2e-6, (32, 32))
    yy, xx = np.mgrid[:32, :32] - 15.5
    disk = (np.hypot(yy, xx) < 6).astype(float)
    z = 1000e-6
    holo = synthesize_hologram(ComplexField(1 - disk, 0 * disk, cfg), z, pad=4).intensity
    # the unit plane wave propagates to exp(jkz); the disk is summed point by point
    k = 2 * np.pi / cfg.wavelength
    oracle = np.abs(np.exp(1j * k * z) - rayleigh_sommerfeld_sum(disk, cfg, z)) ** 2
    err = np.linalg.norm(holo - oracle) / np.linalg.norm(oracle)
    assert err < 1e-3
    # ring fringes: the centre is not a shadow
    assert holo.max() > 1.05 and holo.min() < 0.95


def test_rayleigh_sommerfeld_oracle_on_smooth_source():
    cfg = OpticalConfig(532e-9, 2e-6, (32, 32))
    yy, xx = np.mgrid[:32, :32] - 15.5
    g = np.exp(-(xx ** 2 + yy ** 2) / 18.0)
    asm = propagate(ComplexField(g, 0 * g, cfg), 1e-3, pad=8).values
    rs = rayleigh_sommerfeld_sum(g, cfg, 1e-3)
    assert np.linalg.norm(asm - rs) / np.linalg.norm(rs) < 1e-6


def test_transmittance_modes():
    img = make_sample("cell", 32)
    cfg = OpticalConfig(532e-9, 2e-6, (32, 32))
    amp = transmittance_from_image(img, cfg, alpha=0.9)
    assert amp.real.min() == pytest.approx(0.1) and amp.real.max() == pytest.approx(1.0)
    ph = transmittance_from_image(img, cfg, alpha=0.5, phase_object=True)
    np.testing.assert_allclose(ph.amplitude, 1.0)


def test_normalize_hologram_mean_one():
    assert normalize_hologram(np.array([[1.0, 3.0]])).mean() == pytest.approx(1.0)


# -- differentiable path ---------------------------------------------------------------

CFG8 = OpticalConfig(532e-9, 2e-6, (8, 8))


def test_differentiable_matches_numpy_path():
    f = random_field(DESK, 3)
    k = make_kernel(DESK, 5e-3)
    re, im = differentiable_propagate(Tensor(f.real), Tensor(f.imag), k)
    ref = propagate(f, 5e-3)
    np.testing.assert_allclose(re.data, ref.real, atol=1e-6)
    np.testing.assert_allclose(im.data, ref.imag, atol=1e-6)


def test_differentiable_energy_gradient_fd():
    f = random_field(CFG8, 4)
    k = make_kernel(CFG8, 300e-6)

    def energy(re, im):
        a, b = differentiable_propagate(re, im, k)
        return T.add(T.sum(T.square(a)), T.sum(T.square(b)))

    assert check(energy, [f.real, f.imag]) < 1e-4


def test_propagate_pair_fd_with_probe():
    rng = np.random.default_rng(5)
    k = make_kernel(CFG8, -250e-6)
    assert check(lambda x: propagate_pair(x, k), [rng.normal(size=(1, 2, 8, 8))]) < 1e-4


def test_intensity_fd():
    rng = np.random.default_rng(6)
    k = make_kernel(CFG8, 400e-6)
    assert check(lambda x: intensity(propagate_pair(x, k)), [rng.normal(size=(1, 2, 8, 8))]) < 1e-4


def test_zero_distance_differentiable_identity():
    f = random_field(CFG8, 7)
    k = make_kernel(CFG8, 0.0)
    re_t = Tensor(f.real, requires_grad=True)
    im_t = Tensor(f.imag, requires_grad=True)
    re, im = differentiable_propagate(re_t, im_t, k)
    np.testing.assert_allclose(re.data, f.real, atol=1e-14)
    np.testing.assert_allclose(im.data, f.imag, atol=1e-14)
    T.add(T.sum(re), T.sum(im)).backward()
    np.testing.assert_allclose(re_t.grad, 1.0, atol=1e-14)
    np.testing.assert_allclose(im_t.grad, 1.0, atol=1e-14)


def test_propagate_pair_shape_error():
    with pytest.raises(T.ShapeError, match="propagate_pair"):
        propagate_pair(Tensor(np.zeros((1, 2, 4, 4))), make_kernel(CFG8, 1e-4))


def test_propagate_stack_matches_single_kernels():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(1, 2, 8, 8))
    ks = [make_kernel(CFG8, z) for z in (100e-6, 200e-6, 350e-6)]
    stacked = propagate_stack(Tensor(x), ks).data
    for i, k in enumerate(ks):
        np.testing.assert_allclose(stacked[i], propagate_pair(Tensor(x), k).data[0], atol=1e-13)


def test_propagate_stack_fd():
    rng = np.random.default_rng(9)
    ks = [make_kernel(CFG8, z) for z in (-80e-6, 150e-6, 400e-6)]
    assert check(lambda x: intensity(propagate_stack(x, ks)), [rng.normal(size=(1, 2, 8, 8))]) < 1e-4
