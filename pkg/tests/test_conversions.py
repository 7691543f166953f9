"""ADC conversion tests, checked against an exact rational-arithmetic oracle."""

from fractions import Fraction

import pytest

from vtms.conversions import (
    ADC_MAX,
    AdcChannel,
    AdcSample,
    DisplayVoltage,
    battery_voltage_from_adc,
    temperature_from_adc,
)


def oracle_battery(code: int) -> tuple[int, int]:
    """Independent evaluation of the display-voltage arithmetic with Fractions.

    whole is the integer part of code/16; tenths is the integer part of the
    remainder scaled by 10/16. Uses exact rationals, no integer division.
    """
    volts = Fraction(code, 16)
    whole = int(volts)  # truncation toward zero == floor for non-negatives
    tenths = int((volts - whole) * 10)
    return whole, tenths


class TestBatteryVoltage:
    def test_exhaustive_against_rational_oracle(self):
        for code in range(ADC_MAX + 1):
            got = battery_voltage_from_adc(code)
            whole, tenths = oracle_battery(code)
            assert (got.whole, got.tenths) == (whole, tenths), f"code {code}"
            assert got.text == f"{whole}.{tenths}"

    @pytest.mark.parametrize(
        "code,whole,tenths,text",
        [
            (0, 0, 0, "0.0"),
            (768, 48, 0, "48.0"),
            (775, 48, 4, "48.4"),
            (1023, 63, 9, "63.9"),
        ],
    )
    def test_reference_points(self, code, whole, tenths, text):
        assert battery_voltage_from_adc(code) == DisplayVoltage(whole, tenths, text)

    def test_monotonic_over_full_range(self):
        prev = -1
        for code in range(ADC_MAX + 1):
            tt = battery_voltage_from_adc(code).total_tenths
            assert tt >= prev
            prev = tt

    def test_tenths_floor_tightness(self):
        # 0 <= code/16 - displayed value < 0.1, exactly, for every code.
        for code in range(ADC_MAX + 1):
            dv = battery_voltage_from_adc(code)
            err = Fraction(code, 16) - (dv.whole + Fraction(dv.tenths, 10))
            assert 0 <= err < Fraction(1, 10), f"code {code}: err {err}"

    def test_display_never_exceeds_full_scale(self):
        for code in range(ADC_MAX + 1):
            dv = battery_voltage_from_adc(code)
            assert Fraction(dv.total_tenths, 10) <= Fraction(ADC_MAX, 16)
            assert 0 <= dv.whole <= 63
            assert 0 <= dv.tenths <= 9

    @pytest.mark.parametrize("bad", [-1, 1024, 5000])
    def test_out_of_range_raises(self, bad):
        with pytest.raises(ValueError):
            battery_voltage_from_adc(bad)

    def test_pure(self):
        assert battery_voltage_from_adc(775) == battery_voltage_from_adc(775)


class TestTemperature:
    @pytest.mark.parametrize(
        "code,celsius",
        [
            (0, 0),
            (72, 35),    # 72*500/1024 = 35.15 -> 35
            (1023, 150), # 499.5 -> 499, clamped to 150
        ],
    )
    def test_reference_points(self, code, celsius):
        assert temperature_from_adc(code) == celsius

    def test_exhaustive_against_rational_oracle(self):
        for code in range(ADC_MAX + 1):
            raw = int(Fraction(code * 500, 1024))
            expected = min(max(raw, 0), 150)
            assert temperature_from_adc(code) == expected, f"code {code}"

    def test_monotonic_before_clamp(self):
        prev = -1
        for code in range(ADC_MAX + 1):
            raw = (code * 500) // 1024
            assert raw >= prev
            prev = raw

    @pytest.mark.parametrize("bad", [-3, 1030])
    def test_out_of_range_raises(self, bad):
        with pytest.raises(ValueError):
            temperature_from_adc(bad)


def test_adc_sample_carries_channel_tag():
    s = AdcSample(AdcChannel.BATT1, 775)
    assert s.channel is AdcChannel.BATT1
    assert s.code == 775
