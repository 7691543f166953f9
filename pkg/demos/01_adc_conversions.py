"""How raw ADC codes become the displayed battery voltage and temperature.

The controller is 8-bit firmware: all conversion arithmetic is truncating
integer math. The battery channel is calibrated to 16 counts per volt, the
temperature channel reads a 10 mV/degC sensor against a 5.00 V reference.
"""

from vtms.conversions import battery_voltage_from_adc, temperature_from_adc
from vtms.plant import adc_from_battery_voltage, adc_from_temperature

print("Battery channel: code -> displayed volts")
for code in (0, 256, 743, 768, 775, 1000, 1023):
    dv = battery_voltage_from_adc(code)
    print(f"  code {code:4d} -> {dv.text:>5} V   (whole {dv.whole}, tenths {dv.tenths})")

print("\nTemperature channel: code -> degC")
for code in (0, 61, 72, 82, 307, 1023):
    print(f"  code {code:4d} -> {temperature_from_adc(code):3d} C")

print("\nRound trip through the sensor chain at nominal trimmer gain:")
for volts in (42.0, 47.05, 48.0, 50.55, 54.0):
    code = adc_from_battery_voltage(volts, 1.0).code
    print(f"  {volts:5.2f} V -> code {code:4d} -> shows {battery_voltage_from_adc(code).text} V")

print("\nA miscalibrated trimmer (gain 1.05) skews the display:")
code = adc_from_battery_voltage(48.0, 1.05).code
print(f"  true 48.00 V -> code {code} -> shows {battery_voltage_from_adc(code).text} V")

print("\nRoom at 35 C reads back:")
code = adc_from_temperature(35.0).code
print(f"  35.0 C -> code {code} -> shows {temperature_from_adc(code)} C")
