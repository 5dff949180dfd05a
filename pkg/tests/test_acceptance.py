"""Acceptance gate: one test per criterion, reported in the terminal summary."""
import time

import numpy as np
import pytest

from conftest import NATURAL_IMAGES
from ciicrypt import bench, ca, chaos, cipher
from ciicrypt.cgii import cgii_pickup, ciir_reconstruct, depth_scan
from ciicrypt.chaos import LogisticParams
from ciicrypt.cli import main
from ciicrypt.imaging import PickupGeometry
from ciicrypt.metrics import chi_square_uniform, entropy, psnr
from ciicrypt.netpbm import read_image, write_image
from ciicrypt.smartmap import depth_convert

CHANNELS = "RGB"


@pytest.fixture(scope="module")
def key():
    return cipher.reference_key()


@pytest.fixture(scope="module")
def reports(natural_images, key):
    return {name: bench.run_suite(img, key, bench.SuiteParams(), name) for name, img in natural_images.items()}


def random_key(rng) -> cipher.KeyMaterial:
    geo = PickupGeometry(distance_mm=float(rng.integers(10, 89)))
    logistic = LogisticParams(float(rng.uniform(0.01, 0.99)), float(rng.uniform(3.57, 3.9999)))
    rules = tuple(int(r) for r in rng.choice([90, 150], 8))
    return cipher.KeyMaterial(geo, logistic, rules, int(rng.integers(1, 256)))


@pytest.mark.criterion(1, "inner cipher recovers the depth-converted EIA bit-exactly, < 2 s per image")
def test_inner_cipher_exactness():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10):
        k = random_key(rng)
        img = rng.integers(0, 256, (900, 900, 3), dtype=np.uint8)
        start = time.perf_counter()
        c = cipher.encrypt(img, k)
        recovered = cipher.recover_eias(c, k, zeros_lost=False)
        worst = max(worst, time.perf_counter() - start)
        for ch, eia in zip(range(3), recovered):
            assert np.array_equal(eia.pixels, cipher.converted_eia(img[..., ch], k).pixels)
    print(f"slowest image {worst:.2f} s")
    assert worst < 2.0


@pytest.mark.criterion(2, "depth-converted reconstruction at z=21 beats direct CIIR at z=69 by >= 3 dB per channel")
def test_depth_conversion_advantage(natural_images, key):
    geo = key.geometry
    for name, img in natural_images.items():
        for k, ch in enumerate(CHANNELS):
            plane = img[..., k]
            eia = cgii_pickup(plane, geo)
            direct = psnr(plane, ciir_reconstruct(eia, 69).image)
            converted = psnr(plane, cipher.reconstruct_converted(depth_convert(eia), key, 21))
            print(f"{name} {ch}: direct {direct:.2f} dB, converted {converted:.2f} dB")
            assert converted - direct >= 3.0, (name, ch, direct, converted)


@pytest.mark.criterion(3, "depth scans peak at 69 +- 3 mm (direct) and 21 +- 3 mm (converted)")
def test_focus_localization(natural_images, key):
    geo = key.geometry
    for name, img in natural_images.items():
        for k, ch in enumerate(CHANNELS):
            plane = img[..., k]
            eia = cgii_pickup(plane, geo)
            direct = depth_scan(eia, 3, 90, 3, plane).best().depth_mm
            converted = depth_scan(depth_convert(eia), 3, 90, 3, plane, fill_empty=True).best().depth_mm
            print(f"{name} {ch}: direct peak {direct:g} mm, converted peak {converted:g} mm")
            assert abs(direct - 69) <= 3 and abs(converted - 21) <= 3, (name, ch, direct, converted)


@pytest.mark.criterion(4, "each wrong key lowers PSNR by >= 10 dB on every image")
def test_key_sensitivity(reports):
    for name, report in reports.items():
        for ch in CHANNELS:
            good = report.psnr_of(name, "none", "0", ch)
            for attack, param in (("key_x0", "0.167573"), ("key_distance", "30"),
                                  ("key_rules", "90-90-150-90-90-90-150-90")):
                bad = report.psnr_of(name, attack, param, ch)
                print(f"{name} {ch} {attack}: {bad:.2f} dB vs {good:.2f} dB")
                assert good - bad >= 10.0, (name, ch, attack, good, bad)


@pytest.mark.criterion(5, "cipher entropy >= 7.9 bits and chi-square <= 5% of the plain image's")
def test_statistical_flattening(natural_images, key):
    for name, img in natural_images.items():
        c = cipher.encrypt(img, key)
        for k, ch in enumerate(CHANNELS):
            h, chi, chi_plain = entropy(c[..., k]), chi_square_uniform(c[..., k]), chi_square_uniform(img[..., k])
            print(f"{name} {ch}: entropy {h:.4f}, chi2 {chi:.1f} vs plain {chi_plain:.1f}")
            assert h >= 7.9 and chi <= 0.05 * chi_plain


def _ladder(report, name, attack, params, ch):
    return [report.psnr_of(name, attack, p, ch) for p in params]


@pytest.mark.criterion(6, "block occlusion 10/20/50/70%: PSNR strictly decreasing, >= 15 dB at 50%")
def test_occlusion_trend(reports):
    for name, report in reports.items():
        for ch in CHANNELS:
            ladder = _ladder(report, name, "occlusion", ("0.1", "0.2", "0.5", "0.7"), ch)
            print(f"{name} {ch}: " + " > ".join(f"{v:.2f}" for v in ladder))
            assert all(a > b for a, b in zip(ladder, ladder[1:])), (name, ch, ladder)
            assert ladder[2] >= 15.0


@pytest.mark.criterion(7, "noise v=0.1/0.5/0.8: PSNR strictly decreasing, fixed-seed reports reproducible")
def test_noise_trend(reports, natural_images, key):
    for name, report in reports.items():
        for ch in CHANNELS:
            ladder = _ladder(report, name, "noise", ("0.1", "0.5", "0.8"), ch)
            print(f"{name} {ch}: " + " > ".join(f"{v:.2f}" for v in ladder))
            assert all(a > b for a, b in zip(ladder, ladder[1:])), (name, ch, ladder)
    name = NATURAL_IMAGES[0]
    again = bench.run_suite(natural_images[name], key, bench.SuiteParams(occlusion=(), key_tests=False), name)
    first = bench.AttackReport(reports[name].select("noise"))
    assert first.to_csv() == bench.AttackReport(again.select("noise")).to_csv()


@pytest.mark.criterion(8, "CA rule vector R is maximum-length (period 255 for all seeds); ca_step is GF(2)-linear")
def test_ca_keystream():
    start = time.perf_counter()
    structure = ca.cycle_structure(ca.REFERENCE_RULES)
    assert structure == {ca.REFERENCE_PERIOD: 255}
    for seed in range(1, 256):
        stream = ca.byte_stream(seed, ca.REFERENCE_RULES, 2 * ca.REFERENCE_PERIOD)
        assert len(set(stream[:ca.REFERENCE_PERIOD].tolist())) == ca.REFERENCE_PERIOD
        assert np.array_equal(stream[:ca.REFERENCE_PERIOD], stream[ca.REFERENCE_PERIOD:])
        assert stream[ca.REFERENCE_PERIOD - 1] == seed
    step = [ca.ca_step(s, ca.REFERENCE_RULES) for s in range(256)]
    for a in range(256):
        for b in range(256):
            assert step[a ^ b] == step[a] ^ step[b]
    elapsed = time.perf_counter() - start
    print(f"cycle structure {structure}, {elapsed:.3f} s")
    assert elapsed < 1.0


@pytest.mark.criterion(9, "1000 permutation trials up to n = 10^6: bijection, round trip, histogram preserved")
def test_permutation_algebra():
    rng = np.random.default_rng(9)
    sizes = np.round(10 ** rng.uniform(0, 6, 999)).astype(int).tolist() + [10 ** 6]
    for n in sizes:
        params = LogisticParams(float(rng.uniform(0.01, 0.99)), float(rng.uniform(3.57, 3.9999)))
        perm = chaos.build_permutation(params, n)
        assert np.array_equal(np.bincount(perm, minlength=n), np.ones(n, np.int64))
        x = rng.integers(0, 256, n, dtype=np.uint8)
        s = chaos.scramble(x, perm)
        assert np.array_equal(chaos.unscramble(s, perm), x)
        assert np.array_equal(np.bincount(s, minlength=256), np.bincount(x, minlength=256))


@pytest.mark.criterion(10, "encrypt -> P6 file -> decrypt recovers the EIA bit-exactly; CLI exit codes conform")
def test_file_round_trip(natural_images, key, tmp_path, capsys):
    img = natural_images[NATURAL_IMAGES[0]]
    (tmp_path / "k.txt").write_text(cipher.REFERENCE_KEY_TEXT)
    write_image(tmp_path / "p.ppm", img)
    args = lambda *a: [str(x) for x in a]
    assert main(args("encrypt", "--in", tmp_path / "p.ppm", "--key", tmp_path / "k.txt",
                     "--out", tmp_path / "c.ppm")) == 0
    assert read_image(tmp_path / "c.ppm").shape == img.shape
    assert main(args("decrypt", "--in", tmp_path / "c.ppm", "--key", tmp_path / "k.txt",
                     "--out", tmp_path / "r.ppm", "--eia-out", tmp_path / "e.ppm")) == 0
    eia = read_image(tmp_path / "e.ppm")
    for k in range(3):
        assert np.array_equal(eia[..., k], cipher.converted_eia(img[..., k], key).pixels)
    (tmp_path / "bad.txt").write_text("pinholes=30x30\n")
    write_image(tmp_path / "small.ppm", img[:90, :90])
    codes = {
        2: args("decrypt", "--in", tmp_path / "c.ppm", "--out", tmp_path / "x.ppm"),
        3: args("decrypt", "--in", tmp_path / "c.ppm", "--key", tmp_path / "bad.txt", "--out", tmp_path / "x.ppm"),
        4: args("decrypt", "--in", tmp_path / "small.ppm", "--key", tmp_path / "k.txt", "--out", tmp_path / "x.ppm"),
        5: args("decrypt", "--in", tmp_path / "none.ppm", "--key", tmp_path / "k.txt", "--out", tmp_path / "x.ppm"),
    }
    for code, argv in codes.items():
        assert main(argv) == code
        captured = capsys.readouterr()
        assert captured.out == "" and captured.err
