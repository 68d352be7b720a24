"""UE transmit chain: PA DC consumption versus radiated EIRP.

EIRP = 10 log10(P_dc * PAE) + P_in - IL + G - PBO, every term after the
first in dB/dBm. With the default ``drive="db"`` the input drive enters as a
plain dB term, which is how the 1253 mW / 2500 mW figures for 20 / 23 dBm
EIRP come out. ``drive="linear"`` instead adds the drive power to the PA
output in milliwatts before converting to dBm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

DRIVE_MODES = ("db", "linear")


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class PaAssumptions:
    pae_fraction: float = 0.4
    pa_input_dbm: float = 0.0
    switch_loss_db: float = 1.0
    antenna_gain_dbi: float = 0.0
    backoff_db: float = 6.0
    drive: str = "db"

    def __post_init__(self):
        if not 0 < self.pae_fraction <= 1:
            raise DomainError(f"PAE must lie in (0, 1], got {self.pae_fraction}")
        if self.switch_loss_db < 0 or self.backoff_db < 0:
            raise DomainError("switch loss and back-off must be >= 0 dB")
        if self.drive not in DRIVE_MODES:
            raise DomainError(f"drive must be one of {DRIVE_MODES}, got {self.drive!r}")

    @property
    def net_gain_db(self) -> float:
        """Gain after the PA output: antenna gain less switch loss and back-off."""
        return self.antenna_gain_dbi - self.switch_loss_db - self.backoff_db


def eirp_dbm(pa_dc_mw: float, a: PaAssumptions = PaAssumptions()) -> float:
    """EIRP in dBm for a PA drawing ``pa_dc_mw`` of DC power."""
    if not pa_dc_mw > 0:
        raise DomainError(f"PA DC power must be positive, got {pa_dc_mw} mW")
    converted = pa_dc_mw * a.pae_fraction
    if a.drive == "linear":
        out_dbm = mw_to_dbm(converted + dbm_to_mw(a.pa_input_dbm))
    else:
        out_dbm = mw_to_dbm(converted) + a.pa_input_dbm
    return out_dbm + a.net_gain_db


def pa_dc_power_mw(target_eirp_dbm: float, a: PaAssumptions = PaAssumptions()) -> float:
    """DC power (mW) the PA needs to reach ``target_eirp_dbm``; inverse of :func:`eirp_dbm`."""
    out_dbm = target_eirp_dbm - a.net_gain_db
    if a.drive == "linear":
        converted = dbm_to_mw(out_dbm) - dbm_to_mw(a.pa_input_dbm)
    else:
        converted = dbm_to_mw(out_dbm - a.pa_input_dbm)
    if not converted > 0:
        raise DomainError(
            f"{target_eirp_dbm} dBm EIRP is at or below what the input drive alone delivers"
        )
    return converted / a.pae_fraction
