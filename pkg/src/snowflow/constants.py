"""Physical constants and unit conversions.

The model runs in its native field units: inches of water depth, degrees
Fahrenheit for air/pack temperatures (Celsius inside the energy balance),
Langleys (cal/cm^2) for energy, acres for HRU areas.
"""

# Latent heat of fusion expressed per inch of water depth over 1 cm^2:
# 79.7 cal/g * 2.54 g per inch-depth ~= 203.2 cal per inch of melt.
LATENT_HEAT_CAL_PER_INCH = 203.2

# Cold-content coefficient: heat to warm 1 inch of water-equivalent by 1 degC
# at the specific heat of ice (0.5 cal/g/degC * 2.54 g per inch-depth).
COLD_CONTENT_CAL_PER_INCH_DEGC = 1.27

# Black-body emission coefficient for a half-day period, Langleys per K^4.
BLACKBODY_COEF = 5.85e-8
KELVIN_OFFSET_C = 273.16

# Specific heat of ice, cal/(g degC), used in the conduction term.
SPECIFIC_HEAT_ICE = 0.5

# Fraction of pack ice that can be held as free liquid water.
FREE_WATER_CAPACITY_FRACTION = 0.05

# 1 acre-inch/day = 3630 ft^3/day; divide by seconds per day for cfs.
ACRE_INCH_PER_DAY_TO_CFS = 3630.0 / 86400.0

FREEZE_F = 32.0

# Below this water-equivalent (inches) a pack is considered melted out.
SNOW_EPS = 1e-9


def f_to_c(temp_f: float) -> float:
    return (temp_f - FREEZE_F) / 1.8


def c_to_f(temp_c: float) -> float:
    return FREEZE_F + 1.8 * temp_c
