"""Delay-Doppler link simulator."""

from ._core import (
    InvalidArgument,
    NumericalError,
    ber_snr,
    ber_speed,
    ber_to,
    config_json,
    discrete_hermite,
    dzt,
    effective_pulse,
    idzt,
    isi_energy,
    nmse_snr,
    rc,
    results_csv,
    srrc,
)

__all__ = [
    "InvalidArgument",
    "NumericalError",
    "ber_snr",
    "ber_speed",
    "ber_to",
    "config_json",
    "discrete_hermite",
    "dzt",
    "effective_pulse",
    "idzt",
    "isi_energy",
    "nmse_snr",
    "rc",
    "results_csv",
    "srrc",
]
