"""Physical constants and boundary unit conversions.

Internally every energy is an angular frequency in rad/s (hbar = 1) and
temperatures are converted to k_B*T/hbar, also in rad/s.
"""

from scipy import constants as _c

HBAR = _c.hbar
KB = _c.k
E_CHARGE = _c.e
PHI0 = _c.h / (2 * _c.e)

#: hbar / e^2 in ohms (~4108 ohm)
RESISTANCE_QUANTUM = HBAR / E_CHARGE**2


def kelvin_to_rad_s(temperature):
    """k_B*T/hbar for a temperature in kelvin."""
    return KB * temperature / HBAR


def rad_s_to_kelvin(omega):
    return HBAR * omega / KB


def ghz_to_rad_s(f_ghz):
    """Angular frequency for an ordinary frequency given in GHz."""
    return 2e9 * _c.pi * f_ghz


def ohm_to_dimensionless(resistance):
    """e^2 R / hbar: resistance in units of hbar/e^2."""
    return resistance / RESISTANCE_QUANTUM
