import math

import numpy as np
import pytest

from kmiter.errors import ConfigError
from kmiter.gridio import (
    GridFunction,
    ingest_grid,
    make_grid_function,
    read_grid_csv,
    render_grid,
    synth_data,
    write_grid_csv,
)
from kmiter.spectral import (
    from_coeffs,
    make_custom_spectrum,
    make_sine_spectrum_1d,
    make_sine_spectrum_rect,
    unit_mode,
)

import oracles


def grid_1d(n=129, length=1.0):
    return np.linspace(0.0, length, n)


class TestGridFunction:
    def test_boundary_trace_enforced(self):
        x = grid_1d(17)
        vals = np.sin(math.pi * x)
        vals[0] = 1e-6  # violates the zero-trace requirement
        with pytest.raises(ConfigError):
            make_grid_function((x,), vals)
        with pytest.warns(UserWarning):
            make_grid_function((x,), vals, boundary="warn")

    def test_two_dim_frame_checked(self):
        x = grid_1d(9)
        v = np.zeros((9, 9))
        v[0, 4] = 1e-3
        with pytest.raises(ConfigError):
            make_grid_function((x, x), v)

    def test_axis_validation(self):
        with pytest.raises(ConfigError):
            GridFunction(axes=(np.array([0.0, 0.5, 0.4]),), values=np.zeros(3))
        with pytest.raises(ConfigError):
            GridFunction(axes=(np.array([0.0, 0.1, 0.5]),), values=np.zeros(3))
        with pytest.raises(ConfigError):
            GridFunction(axes=(grid_1d(5),), values=np.zeros(4))
        with pytest.raises(ConfigError):
            GridFunction(axes=(grid_1d(5),), values=np.full(5, np.nan))


class TestCsvExchange:
    def test_roundtrip_1d(self, tmp_path):
        x = grid_1d(33)
        gf = make_grid_function((x,), np.sin(math.pi * x) * 0.7)
        path = tmp_path / "wave.csv"
        write_grid_csv(gf, path)
        back = read_grid_csv(path)
        np.testing.assert_array_equal(back.axes[0], gf.axes[0])
        np.testing.assert_array_equal(back.values, gf.values)

    def test_roundtrip_2d_with_shuffled_rows(self, tmp_path):
        x = grid_1d(9)
        y = grid_1d(7, length=2.0)
        vals = np.outer(np.sin(math.pi * x), np.sin(math.pi * y / 2.0))
        gf = make_grid_function((x, y), vals)
        path = tmp_path / "sheet.csv"
        write_grid_csv(gf, path)
        lines = path.read_text().strip().split("\n")
        header, rows = lines[0], lines[1:]
        rows.reverse()
        path.write_text("\n".join([header] + rows) + "\n")
        back = read_grid_csv(path)
        np.testing.assert_allclose(back.values, gf.values, rtol=1e-15)

    def test_header_required(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("0.0,0.0\n0.5,1.0\n1.0,0.0\n")
        with pytest.raises(ConfigError):
            read_grid_csv(p)

    def test_duplicate_x_rejected(self, tmp_path):
        p = tmp_path / "dup.csv"
        p.write_text("x,value\n0.0,0.0\n0.5,1.0\n0.5,2.0\n1.0,0.0\n")
        with pytest.raises(ConfigError):
            read_grid_csv(p)

    def test_incomplete_2d_grid_rejected(self, tmp_path):
        p = tmp_path / "holes.csv"
        p.write_text("x,y,value\n0.0,0.0,0.0\n0.0,1.0,0.0\n1.0,0.0,0.0\n")
        with pytest.raises(ConfigError):
            read_grid_csv(p)

    def test_non_numeric_rejected(self, tmp_path):
        p = tmp_path / "text.csv"
        p.write_text("x,value\n0.0,zero\n")
        with pytest.raises(ConfigError):
            read_grid_csv(p)

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(ConfigError):
            read_grid_csv(p)


class TestIngest:
    def test_first_basis_function(self):
        m = make_sine_spectrum_1d(3, 1.0)
        x = grid_1d(129)
        gf = make_grid_function((x,), math.sqrt(2.0) * np.sin(math.pi * x))
        c = ingest_grid(gf, m).coeffs
        assert np.max(np.abs(c - [1.0, 0.0, 0.0])) < 1e-4

    def test_zero_samples(self):
        m = make_sine_spectrum_1d(3, 1.0)
        gf = make_grid_function((grid_1d(65),), np.zeros(65))
        np.testing.assert_array_equal(ingest_grid(gf, m).coeffs, 0.0)

    def test_out_of_band_mode_is_invisible(self):
        m = make_sine_spectrum_1d(3, 1.0)
        x = grid_1d(257)
        gf = make_grid_function((x,), np.sin(4.0 * math.pi * x))
        c = ingest_grid(gf, m).coeffs
        assert np.max(np.abs(c)) < 1e-4

    def test_nyquist_guard(self):
        m = make_sine_spectrum_1d(8, 1.0)
        gf = make_grid_function((grid_1d(16),), np.zeros(16))
        with pytest.raises(ConfigError):
            ingest_grid(gf, m)  # needs 17 samples for 8 modes

    def test_domain_span_checked(self):
        m = make_sine_spectrum_1d(3, 1.0)
        x = np.linspace(0.0, 0.9, 65)
        gf = make_grid_function((x,), np.zeros(65))
        with pytest.raises(ConfigError):
            ingest_grid(gf, m)

    def test_2d_product_mode(self):
        m = make_sine_spectrum_rect(3, 3, 1.0, 1.0)
        x = grid_1d(65)
        sx = math.sqrt(2.0) * np.sin(2.0 * math.pi * x)
        sy = math.sqrt(2.0) * np.sin(math.pi * x)
        gf = make_grid_function((x, x), np.outer(sx, sy))
        v = ingest_grid(gf, m)
        want = np.zeros(9)
        want[m.mode_index_map.index((2, 1))] = 1.0
        assert np.max(np.abs(v.coeffs - want)) < 1e-3

    def test_dimension_mismatch(self):
        m = make_sine_spectrum_rect(2, 2, 1.0, 1.0)
        gf = make_grid_function((grid_1d(65),), np.zeros(65))
        with pytest.raises(ConfigError):
            ingest_grid(gf, m)

    def test_custom_basis_has_no_samples(self):
        m = make_custom_spectrum([1.0, 2.0])
        gf = make_grid_function((grid_1d(65),), np.zeros(65))
        with pytest.raises(ConfigError):
            ingest_grid(gf, m)


class TestRender:
    def test_roundtrip_1d(self):
        m = make_sine_spectrum_1d(8, 1.0)
        v = from_coeffs(m, np.linspace(1.0, -0.5, 8))
        back = ingest_grid(render_grid(v), m)
        assert np.max(np.abs(back.coeffs - v.coeffs)) < 1e-4

    def test_roundtrip_2d(self):
        m = make_sine_spectrum_rect(3, 2, 1.0, 2.0)
        rng = np.random.default_rng(8)
        v = from_coeffs(m, rng.standard_normal(m.n_modes))
        back = ingest_grid(render_grid(v), m)
        assert np.max(np.abs(back.coeffs - v.coeffs)) < 1e-4

    def test_boundary_is_exactly_zero(self):
        m = make_sine_spectrum_1d(4, 1.0)
        gf = render_grid(unit_mode(m, 2), points_per_axis=33)
        assert abs(gf.values[0]) < 1e-12 and abs(gf.values[-1]) < 1e-12

    def test_resolution_validation(self):
        m = make_sine_spectrum_1d(2, 1.0)
        with pytest.raises(ConfigError):
            render_grid(unit_mode(m, 1), points_per_axis=1)


class TestSynthData:
    def test_unit_mode(self):
        m = make_sine_spectrum_1d(3, 1.0)
        np.testing.assert_array_equal(
            synth_data("unit_mode", m, k=2).coeffs, [0.0, 1.0, 0.0]
        )

    def test_parabolic_terminal_diffusion_constants(self):
        m = make_sine_spectrum_1d(3, 1.0)
        e1 = unit_mode(m, 1)
        fast = synth_data("parabolic_terminal", m, u0=e1, T=0.0625, a2=8.0)
        slow = synth_data("parabolic_terminal", m, u0=e1, T=0.0625, a2=2.0)
        assert fast.coeffs[0] == pytest.approx(oracles.EXP_NEG_PI2_128, rel=1e-13)
        assert slow.coeffs[0] == pytest.approx(oracles.EXP_NEG_PI2_32, rel=1e-13)

    def test_parabolic_terminal_validation(self):
        m = make_sine_spectrum_1d(3, 1.0)
        with pytest.raises(ConfigError):
            synth_data("parabolic_terminal", m, u0=[1, 0, 0], T=0.0625)
        with pytest.raises(ConfigError):
            synth_data("parabolic_terminal", m, u0=unit_mode(m, 1), T=0.1, a2=0.0)
        other = make_sine_spectrum_1d(4, 1.0)
        with pytest.raises(ConfigError):
            synth_data("parabolic_terminal", m, u0=unit_mode(other, 1), T=0.1)

    def test_piecewise_profile_deterministic_and_nontrivial(self):
        m = make_sine_spectrum_1d(16, 1.0)
        a = synth_data("piecewise_profile", m)
        b = synth_data("piecewise_profile", m)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
        # the square-wave part injects energy well past the first mode
        assert np.max(np.abs(a.coeffs[8:])) > 1e-3

    def test_piecewise_profile_2d(self):
        m = make_sine_spectrum_rect(4, 4, 1.0, 1.0)
        v = synth_data("piecewise_profile", m)
        assert v.coeffs.size == 16
        assert np.any(v.coeffs != 0.0)

    def test_unknown_generator(self):
        m = make_sine_spectrum_1d(3, 1.0)
        with pytest.raises(ConfigError):
            synth_data("lightning_bolt", m)

    def test_unexpected_parameters_rejected(self):
        m = make_sine_spectrum_1d(3, 1.0)
        with pytest.raises(ConfigError):
            synth_data("unit_mode", m, k=1, flavor="spicy")
