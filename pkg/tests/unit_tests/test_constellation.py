import math
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from octane.enums import Qam8Geometry
from octane.exceptions import ConstellationError, ConstellationFileError
from octane.modfmt.builders import (
    build_2a8psk,
    build_8qam,
    build_pm8qam,
    build_pm_qpsk,
    build_qpsk,
    load_prs_fixture,
    ring_radii,
)
from octane.modfmt.constellation import (
    bits_to_int,
    int_to_bits,
    load_constellation,
    load_constellation_file,
    min_distance,
    normalize,
    write_constellation,
    write_constellation_file,
)

QPSK_FILE = """# plain QPSK, unnormalized
dim=2 bits=2 normalize=1 name=QPSK
00 1 1
01 1 -1
10 -1 1
11 -1 -1
"""


@pytest.fixture
def temp_dir():
    with tempfile.TemporaryDirectory() as tmpdirname:
        yield Path(tmpdirname)


class TestBuilders:
    def test_pm8qam_has_64_unit_power_points(self):
        pm8qam = build_pm8qam()
        assert pm8qam.size == 64
        assert pm8qam.bits == 6
        assert pm8qam.dimension == 4
        assert pm8qam.mean_power() == pytest.approx(1.0, abs=1e-12)
        assert np.unique(bits_to_int(pm8qam.labels)).size == 64

    def test_pm8qam_min_distance_is_the_per_polarisation_8qam_distance(self):
        # rectangular 8QAM levels +-1, +-3 by +-1: mean 2D power 6, neighbours 2 apart
        assert build_pm8qam().min_distance() == pytest.approx(2 / math.sqrt(12), rel=1e-12)
        assert build_pm8qam().min_distance() == pytest.approx(build_8qam().min_distance() / math.sqrt(2), rel=1e-12)

    def test_star_8qam_is_available(self):
        star = build_pm8qam(Qam8Geometry.STAR)
        assert star.size == 64
        assert star.mean_power() == pytest.approx(1.0, abs=1e-12)

    def test_qpsk_is_gray_labelled(self):
        qpsk = build_qpsk()
        for i in range(4):
            for j in range(i + 1, 4):
                distance = np.linalg.norm(qpsk.points[i] - qpsk.points[j])
                if distance == pytest.approx(qpsk.min_distance()):
                    assert np.sum(qpsk.labels[i] != qpsk.labels[j]) == 1

    def test_pm_qpsk_is_the_product_of_two_qpsk(self):
        pm_qpsk = build_pm_qpsk()
        assert pm_qpsk.size == 16
        assert pm_qpsk.bits == 4

    def test_2a8psk_with_equal_rings_is_pm_8psk(self):
        constellation = build_2a8psk(1.0, 6)
        x = np.hypot(constellation.points[:, 0], constellation.points[:, 1])
        y = np.hypot(constellation.points[:, 2], constellation.points[:, 3])
        np.testing.assert_allclose(x, 1 / math.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(y, 1 / math.sqrt(2), atol=1e-12)

    def test_2a8psk_is_constant_modulus(self):
        constellation = build_2a8psk(0.6, 6)
        assert constellation.size == 64
        assert np.ptp(constellation.squared_norms()) < 1e-12

    def test_5_bit_2a8psk_keeps_half_the_points(self):
        constellation = build_2a8psk(0.6, 5)
        assert constellation.size == 32
        assert constellation.bits == 5
        assert np.ptp(constellation.squared_norms()) < 1e-12
        assert np.unique(bits_to_int(constellation.labels)).size == 32

    @pytest.mark.parametrize("ring_ratio, m", [(0.0, 6), (1.5, 6), (0.6, 4)])
    def test_2a8psk_rejects_bad_parameters(self, ring_ratio, m):
        with pytest.raises(ConstellationError):
            build_2a8psk(ring_ratio, m)

    def test_ring_radii(self):
        r1, r2 = ring_radii(0.5)
        assert r2 / r1 == pytest.approx(0.5)
        assert r1**2 + r2**2 == pytest.approx(1.0)

    def test_prs_fixture(self):
        prs = load_prs_fixture()
        assert prs.size == 64
        assert prs.dimension == 4
        assert np.ptp(prs.squared_norms()) < 1e-12


class TestLoadConstellation:
    def test_normalizes_when_asked(self):
        constellation = load_constellation(QPSK_FILE)
        assert constellation.name == "QPSK"
        assert constellation.mean_power() == pytest.approx(1.0, abs=1e-12)

    def test_mean_power_two_is_scaled_to_one(self):
        source = QPSK_FILE.replace(" 1 1\n", " 1.4142135623730951 1.4142135623730951\n")
        points = np.array([[1.4142135623730951, 1.4142135623730951], [1, -1], [-1, 1], [-1, -1]])
        constellation = load_constellation(source)
        np.testing.assert_allclose(constellation.points, normalize(points))

    def test_duplicate_label(self):
        source = QPSK_FILE.replace("01 1 -1", "00 1 -1")
        with pytest.raises(ConstellationFileError, match="duplicate label"):
            load_constellation(source)

    def test_wrong_point_count(self):
        source = "\n".join(QPSK_FILE.splitlines()[:-1])
        with pytest.raises(ConstellationFileError, match="wrong point count"):
            load_constellation(source)

    def test_malformed_header(self):
        with pytest.raises(ConstellationFileError, match="malformed header"):
            load_constellation("dim=2 bits=2 name=QPSK\n00 1 1\n")

    def test_non_finite_coordinate(self):
        with pytest.raises(ConstellationFileError, match="non-finite"):
            load_constellation(QPSK_FILE.replace("11 -1 -1", "11 -1 nan"))

    def test_unnormalized_file_must_have_unit_power(self):
        with pytest.raises(ConstellationFileError, match="not unit"):
            load_constellation(QPSK_FILE.replace("normalize=1", "normalize=0"))

    def test_written_file_loads_back(self, temp_dir):
        pm8qam = build_pm8qam()
        path = temp_dir / "pm8qam.txt"
        write_constellation_file(pm8qam, path)
        loaded = load_constellation_file(path)
        np.testing.assert_array_equal(loaded.indexed_points, pm8qam.indexed_points)

    def test_comments_are_skipped_on_load(self):
        qpsk = build_qpsk()
        text = write_constellation(qpsk, comments=["exported", "second line"])
        assert text.startswith("# exported\n# second line\n")
        np.testing.assert_array_equal(load_constellation(text).indexed_points, qpsk.indexed_points)

    def test_missing_file_names_the_path(self, temp_dir):
        missing = temp_dir / "absent.txt"
        with pytest.raises(ConstellationFileError, match="absent.txt"):
            load_constellation_file(missing)


@given(st.integers(min_value=0, max_value=2**11 - 1))
def test_bit_conversion_is_msb_first(value):
    bits = int_to_bits(value, 11)
    assert int(bits_to_int(bits)[0]) == value
    assert int(bits[0]) == value >> 10


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_min_distance_scales_with_the_points(scale):
    points = build_pm8qam().points
    assert min_distance(points * scale) == pytest.approx(scale * min_distance(points), rel=1e-9)
