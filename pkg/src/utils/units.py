"""
Единственная точка перевода единиц: МГц/кГц (значения /2π) <-> рад/мкс
"""
import math

TWO_PI = 2.0 * math.pi


def mhz_to_rad_per_us(value_mhz: float) -> float:
    """
    Перевод частоты X МГц (то есть Ω/2π = X МГц) в угловую частоту рад/мкс
    """
    return TWO_PI * value_mhz


def khz_to_rad_per_us(value_khz: float) -> float:
    """
    Перевод частоты X кГц в угловую частоту рад/мкс
    """
    return TWO_PI * value_khz * 1e-3


def rad_per_us_to_mhz(value: float) -> float:
    """
    Обратный перевод: рад/мкс -> МГц (значение /2π)
    """
    return value / TWO_PI


def rad_per_us_to_khz(value: float) -> float:
    return value / TWO_PI * 1e3


def um_to_m(value_um: float) -> float:
    return value_um * 1e-6


def nm_to_m(value_nm: float) -> float:
    return value_nm * 1e-9
