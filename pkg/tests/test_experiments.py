import math

import pytest

from patchnoise.experiments import (
    F0_HERTZ,
    REFERENCE_BAND,
    ZETA0_DEFAULT,
    CantileverProbe,
    ExperimentRecord,
    IonSpecies,
    builtin_dataset,
    damping_rate,
    fit_dataset,
    fit_nsv,
    fit_zeta,
    heating_rate,
    invert_heating,
    load_dataset,
    make_record,
    record_to_row,
    rescale,
    rescale_density,
)
from patchnoise.quantities import CONSTANTS, FieldNoiseDensity, Length
from patchnoise.spectrum import scaling_function


class TestRescaling:
    def test_inverse_frequency_law(self):
        # measured at 4 kHz, quoted at 1 MHz: the density drops by 250
        assert rescale_density(4.0, 4.0e3) == pytest.approx(1.6e-2, rel=1e-12)
        assert rescale_density(9.0e-12, 3.0e6) == pytest.approx(2.7e-11, rel=1e-12)
        assert rescale_density(5.0e-12, 10.0e6) == pytest.approx(5.0e-11, rel=1e-12)

    def test_reference_frequency_is_identity(self):
        assert rescale_density(7.7e-12, F0_HERTZ) == pytest.approx(7.7e-12, rel=1e-15)

    def test_general_exponent(self):
        assert rescale_density(1.0, 2.0e6, 1.0e6, alpha=1.5) == pytest.approx(
            2.0**1.5, rel=1e-12
        )

    def test_round_trip(self):
        up = rescale_density(3.3e-12, 5.0e6, 1.0e6, alpha=0.8)
        back = rescale_density(up, 1.0e6, 5.0e6, alpha=0.8)
        assert back == pytest.approx(3.3e-12, rel=1e-12)

    def test_rejects_bad_frequencies(self):
        with pytest.raises(ValueError):
            rescale_density(1.0, 0.0)
        with pytest.raises(ValueError):
            rescale_density(1.0, 1e6, -1.0)

    def test_record_rescale(self):
        rec = make_record("seidelin", "ion-trap", 40e-6, 3.0e6, 9.0e-12)
        assert rec.s_e_rescaled.value == pytest.approx(2.7e-11, rel=1e-12)
        assert rescale(rec).value == pytest.approx(2.7e-11, rel=1e-12)
        assert rescale(rec, f0_hz=3.0e6).value == pytest.approx(9.0e-12, rel=1e-12)


class TestRecords:
    def test_kind_validated(self):
        with pytest.raises(ValueError, match="kind"):
            make_record("x", "resonator", 1e-6, 1e6, 1e-12)

    def test_frequency_validated(self):
        with pytest.raises(ValueError):
            make_record("x", "ion-trap", 1e-6, 0.0, 1e-12)

    def test_group_default(self):
        rec = make_record("x", "ion-trap", 1e-6, 1e6, 1e-12)
        assert rec.group is None


class TestProbes:
    def test_from_amu(self):
        ion = IonSpecies.from_amu(40.0, 1.0e6)
        assert ion.mass_kg == pytest.approx(40.0 * CONSTANTS.atomic_mass, rel=1e-15)
        assert ion.charge_c == CONSTANTS.elementary_charge
        assert ion.omega == pytest.approx(2.0 * math.pi * 1.0e6, rel=1e-15)

    def test_from_amu_multiple_charge(self):
        ion = IonSpecies.from_amu(9.0, 2.0e6, charge_multiple=2)
        assert ion.charge_c == pytest.approx(2.0 * CONSTANTS.elementary_charge, rel=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            IonSpecies(mass_kg=0.0, charge_c=1e-19, omega=1e6)
        with pytest.raises(ValueError):
            CantileverProbe(charge_c=-1e-19, temperature_k=300.0, omega_c=1e4)
        with pytest.raises(ValueError):
            CantileverProbe(charge_c=1e-19, temperature_k=0.0, omega_c=1e4)
        # zero induced charge is physical (ungrounded tip)
        CantileverProbe(charge_c=0.0, temperature_k=300.0, omega_c=1e4)


class TestRates:
    ION = IonSpecies.from_amu(40.0, 1.0e6)

    def test_heating_rate_frozen(self):
        # S_E = 5e-11 on a mass-40 singly charged ion at 1 MHz; the
        # hand calculation with CODATA values gives 7290.640478647666,
        # rounding to the quoted 7.29e3
        got = heating_rate(5.0e-11, self.ION)
        assert got == pytest.approx(7290.640478647666, rel=1e-12)
        assert got == pytest.approx(7.29e3, rel=1e-3)

    def test_heating_rate_from_density_type(self):
        assert heating_rate(FieldNoiseDensity(5.0e-11), self.ION) == pytest.approx(
            7290.640478647666, rel=1e-12
        )

    def test_invert_heating_round_trip(self):
        se = invert_heating(7.29e3, self.ION)
        assert heating_rate(se, self.ION) == pytest.approx(7.29e3, rel=1e-12)
        assert se.value == pytest.approx(5.0e-11, rel=1e-3)

    def test_damping_rate_frozen(self):
        probe = CantileverProbe(
            charge_c=1000.0 * CONSTANTS.elementary_charge,
            temperature_k=300.0,
            omega_c=2.0 * math.pi * 4.0e3,
        )
        got = damping_rate(4.0, probe)
        assert got == pytest.approx(6.197495927725704e-12, rel=1e-12)
        assert got == pytest.approx(6.18e-12, rel=1e-2)

    def test_rates_linear_in_density(self):
        assert heating_rate(1.0e-10, self.ION) == pytest.approx(
            2.0 * heating_rate(5.0e-11, self.ION), rel=1e-14
        )

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            heating_rate(-1.0e-12, self.ION)
        with pytest.raises(ValueError):
            invert_heating(-1.0, self.ION)
        probe = CantileverProbe(charge_c=1e-16, temperature_k=300.0, omega_c=1e4)
        with pytest.raises(ValueError):
            damping_rate(-1.0, probe)


class TestAmplitudeAnchor:
    def test_builtin_anchor_value(self):
        rec = builtin_dataset()[0]
        nsv = fit_nsv(rec, ZETA0_DEFAULT)
        assert nsv.value == pytest.approx(3.2e-16, rel=1e-12)

    def test_regime_guard_names_ratio(self):
        rec = make_record("seidelin", "ion-trap", 40e-6, 3.0e6, 9.0e-12)
        with pytest.raises(ValueError, match="40"):
            fit_nsv(rec, ZETA0_DEFAULT)

    def test_short_form_bias_is_understood(self):
        # inverting the full scaling function instead of its d << zeta
        # limit shifts the amplitude by 1/(rho s(rho)) - 1, which at the
        # anchor height (rho = 0.02) is 7.7 percent, not a sub-percent
        # correction
        rec = builtin_dataset()[0]
        rho = rec.d.value / ZETA0_DEFAULT.value
        short = fit_nsv(rec, ZETA0_DEFAULT).value
        full = (
            rec.s_e_rescaled.value
            * ZETA0_DEFAULT.value**2
            / scaling_function(rho)
        )
        assert full / short - 1.0 == pytest.approx(0.07702291716209264, rel=1e-9)


class TestZetaInversion:
    NSV = 3.2e-16

    @pytest.mark.parametrize(
        "source, d_um, f_mhz, s_e, zeta_expected",
        [
            ("seidelin", 40.0, 3.0, 9.0e-12, 5.370184098058092e-07),
            ("labaziewicz-low", 75.0, 1.0, 0.3e-11, 6.290599523584656e-07),
            ("labaziewicz-high", 75.0, 1.0, 3.0e-11, 1.993980995409041e-06),
            ("turchette", 140.0, 10.0, 5.0e-12, 9.08325231092217e-06),
        ],
    )
    def test_frozen_roots(self, source, d_um, f_mhz, s_e, zeta_expected):
        rec = make_record(source, "ion-trap", d_um * 1e-6, f_mhz * 1e6, s_e)
        fit = fit_zeta(rec, self.NSV)
        assert fit.converged
        assert fit.zeta.value == pytest.approx(zeta_expected, rel=1e-6)

    def test_root_reproduces_measurement(self):
        rec = make_record("seidelin", "ion-trap", 40e-6, 3.0e6, 9.0e-12)
        fit = fit_zeta(rec, self.NSV)
        z = fit.zeta.value
        model = self.NSV * scaling_function(rec.d.value / z) / (z * z)
        assert model == pytest.approx(rec.s_e_rescaled.value, rel=1e-5)

    def test_band_flags(self):
        recs = {r.source: r for r in builtin_dataset()}
        inside = fit_zeta(recs["labaziewicz-low"], self.NSV)
        assert inside.flags == ()
        below = fit_zeta(recs["seidelin"], self.NSV)
        assert any("reference band" in f for f in below.flags)
        above = fit_zeta(recs["turchette"], self.NSV)
        assert any("reference band" in f for f in above.flags)

    def test_no_root_when_density_exceeds_branch(self):
        # at d = 10 um the branch maximum is nsv * s(1-) / d^2; ask for
        # far more and the inversion must decline, not clamp
        rec = make_record("hot", "ion-trap", 10e-6, 1.0e6, 1.0)
        fit = fit_zeta(rec, self.NSV)
        assert not fit.converged
        assert fit.zeta is None
        assert any("no root" in f for f in fit.flags)

    def test_validation(self):
        rec = make_record("x", "ion-trap", 40e-6, 1.0e6, 1e-12)
        with pytest.raises(ValueError):
            fit_zeta(rec, 0.0)
        zero = make_record("y", "ion-trap", 40e-6, 1.0e6, 0.0)
        with pytest.raises(ValueError, match="zero density"):
            fit_zeta(zero, self.NSV)


class TestDatasetFit:
    def test_builtin_fit(self):
        res = fit_dataset(builtin_dataset())
        assert res.anchor.source == "cantilever"
        assert res.nsv.value == pytest.approx(3.2e-16, rel=1e-12)
        assert len(res.zeta_fits) == 4
        assert all(f.converged for f in res.zeta_fits)
        assert all(r <= 1e-5 for r in res.residuals)
        lo, hi = res.band
        assert lo.value == pytest.approx(5.370184098058092e-07, rel=1e-6)
        assert hi.value == pytest.approx(9.08325231092217e-06, rel=1e-6)
        # the ion-trap spread: both published 75 um endpoints and the
        # 40 um point land within a factor of a few of one micrometer
        fitted = sorted(f.zeta.value for f in res.zeta_fits)
        assert fitted[0] > 0.1e-6 and fitted[-1] < 10e-6

    def test_iterates_fits(self):
        res = fit_dataset(builtin_dataset())
        assert [f.record.source for f in res] == [
            "seidelin",
            "labaziewicz-low",
            "labaziewicz-high",
            "turchette",
        ]

    def test_requires_anchor(self):
        long_only = [make_record("a", "ion-trap", 40e-6, 1e6, 1e-12)]
        with pytest.raises(ValueError, match="short-range"):
            fit_dataset(long_only)

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="empty"):
            fit_dataset([])


class TestCsv:
    HEADER = "source,kind,d_um,f_MHz,s_e_si\n"

    def test_round_trip(self, tmp_path):
        path = tmp_path / "data.csv"
        rows = [record_to_row(r) for r in builtin_dataset()]
        with open(path, "w") as fh:
            fh.write(self.HEADER)
            for row in rows:
                fh.write(
                    f"{row['source']},{row['kind']},{row['d_um']!r},"
                    f"{row['f_MHz']!r},{row['s_e_si']!r}\n"
                )
        loaded = load_dataset(path)
        for got, want in zip(loaded, builtin_dataset()):
            assert got.source == want.source
            assert got.kind == want.kind
            assert got.d.value == pytest.approx(want.d.value, rel=1e-15)
            assert got.s_e_measured.value == want.s_e_measured.value

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "# measured densities\n\n"
            + self.HEADER
            + "\n# mid-table comment\nseidelin,ion-trap,40,3,9e-12\n"
        )
        recs = load_dataset(path)
        assert len(recs) == 1
        assert recs[0].d.value == pytest.approx(40e-6, rel=1e-15)

    def test_empty_file_is_empty_dataset(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert load_dataset(path) == []

    def test_header_mismatch_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("source,kind,d_m,f_MHz,s_e_si\n")
        with pytest.raises(ValueError, match=r"data\.csv:1"):
            load_dataset(path)

    def test_wrong_field_count_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(self.HEADER + "seidelin,ion-trap,40,3\n")
        with pytest.raises(ValueError, match=":2"):
            load_dataset(path)

    def test_bad_number_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(self.HEADER + "a,ion-trap,1,1,1e-12\nb,ion-trap,oops,1,1e-12\n")
        with pytest.raises(ValueError, match=":3"):
            load_dataset(path)

    def test_bad_kind_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(self.HEADER + "a,resonator,1,1,1e-12\n")
        with pytest.raises(ValueError, match=":2"):
            load_dataset(path)


class TestBuiltinDataset:
    def test_shape(self):
        data = builtin_dataset()
        assert len(data) == 5
        assert [r.source for r in data] == [
            "cantilever",
            "seidelin",
            "labaziewicz-low",
            "labaziewicz-high",
            "turchette",
        ]
        assert data[0].kind == "cantilever"
        assert all(r.kind == "ion-trap" for r in data[1:])

    def test_heights_ascend(self):
        data = builtin_dataset()
        heights = [r.d.value for r in data]
        assert heights == sorted(heights)
        assert heights[0] == pytest.approx(0.02e-6, rel=1e-15)
        assert heights[-1] == pytest.approx(140e-6, rel=1e-15)

    def test_published_range_shares_group(self):
        data = builtin_dataset()
        grouped = [r for r in data if r.group == "labaziewicz"]
        assert len(grouped) == 2
        assert grouped[0].d.value == grouped[1].d.value

    def test_constants(self):
        assert F0_HERTZ == 1.0e6
        assert ZETA0_DEFAULT.value == 1.0e-6
        assert REFERENCE_BAND == (0.6, 4.5)
