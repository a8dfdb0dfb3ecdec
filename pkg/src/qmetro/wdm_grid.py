"""CWDM/DWDM channel arithmetic.

DWDM channels live on the ITU-T G.694.1 grid anchored at 193.1 THz and are
identified by an integer index, so equality and mirroring are exact.  CWDM
channels follow G.694.2 (1270..1610 nm in 20 nm steps).
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from enum import Enum

C_NM_THZ = 299792.458
ANCHOR_GHZ = 193100.0
CWDM_WAVELENGTHS = tuple(range(1270, 1611, 20))


class GridError(ValueError):
    pass


def frequency_of(wavelength_nm: float) -> float:
    """Vacuum wavelength (nm) to frequency (THz)."""
    return C_NM_THZ / wavelength_nm


@dataclass(frozen=True, order=True)
class DwdmChannel:
    index: int
    spacing: float = 100.0  # GHz

    def __post_init__(self):
        if self.spacing <= 0:
            raise GridError(f"grid spacing must be positive, got {self.spacing}")

    @property
    def center_frequency(self) -> float:
        return (ANCHOR_GHZ + self.index * self.spacing) / 1000.0

    @property
    def wavelength(self) -> float:
        return wavelength_of(self)

    @property
    def slot(self) -> tuple[float, float]:
        """Frequency slot (THz) occupied by the channel, one spacing wide."""
        half = self.spacing / 2000.0
        f = self.center_frequency
        return f - half, f + half

    @property
    def passband(self) -> tuple[float, float]:
        lo, hi = self.slot
        return C_NM_THZ / hi, C_NM_THZ / lo

    @property
    def label(self) -> str:
        return f"D{self.wavelength:.2f}"

    def __str__(self):
        return f"{self.label}[{self.index:+d}]"


def wavelength_of(ch: DwdmChannel) -> float:
    return C_NM_THZ / ch.center_frequency


def channel_at(frequency_thz: float, spacing: float = 100.0) -> DwdmChannel:
    """Nearest grid channel to a frequency."""
    return DwdmChannel(round((frequency_thz * 1000.0 - ANCHOR_GHZ) / spacing), spacing)


@dataclass(frozen=True, order=True)
class CwdmChannel:
    nominal_wavelength: int
    passband_width: float = 13.0

    def __post_init__(self):
        if self.nominal_wavelength not in CWDM_WAVELENGTHS:
            raise GridError(f"{self.nominal_wavelength} nm is not a CWDM grid wavelength")
        if not 0 < self.passband_width < 20:
            raise GridError("CWDM passband must be positive and narrower than the 20 nm spacing")

    @classmethod
    def parse(cls, text: str | int, passband_width: float = 13.0) -> "CwdmChannel":
        """Accept ``"C1550"``, ``"1550"`` or ``1550``."""
        s = str(text).strip().upper().lstrip("C")
        try:
            return cls(int(s), passband_width)
        except ValueError as exc:
            raise GridError(f"not a CWDM channel: {text!r}") from exc

    @property
    def label(self) -> str:
        return f"C{self.nominal_wavelength}"

    @property
    def passband(self) -> tuple[float, float]:
        h = self.passband_width / 2
        return self.nominal_wavelength - h, self.nominal_wavelength + h

    @property
    def frequency_range(self) -> tuple[float, float]:
        lo, hi = self.passband
        return C_NM_THZ / hi, C_NM_THZ / lo

    @property
    def center_frequency(self) -> float:
        return C_NM_THZ / self.nominal_wavelength

    @property
    def band(self) -> "Band | None":
        return band_of(self)

    def __str__(self):
        return self.label


class Band(Enum):
    O_CONVENTIONAL = ("O_conventional", 1260.0, 1360.0, 1310)
    C_QUANTUM = ("C_quantum", 1500.0, 1600.0, 1550)

    def __init__(self, key, lo, hi, fiber_window):
        self.key = key
        self.lo = lo
        self.hi = hi
        # fiber attenuation row used for signals in this band
        self.fiber_window = fiber_window

    @property
    def range(self) -> tuple[float, float]:
        return self.lo, self.hi

    def contains(self, lo: float, hi: float | None = None) -> bool:
        hi = lo if hi is None else hi
        return self.lo <= lo and hi <= self.hi

    def cwdm_channels(self, passband_width: float = 13.0) -> list[CwdmChannel]:
        out = [CwdmChannel(w, passband_width) for w in CWDM_WAVELENGTHS]
        return [c for c in out if self.contains(*c.passband)]

    @property
    def operating_span(self) -> tuple[float, float]:
        """Span of CWDM nominal wavelengths inside the band.

        Used for component range checks, which are stated on nominal CWDM
        wavelengths rather than on passband edges.
        """
        chans = self.cwdm_channels()
        return chans[0].nominal_wavelength, chans[-1].nominal_wavelength

    @classmethod
    def from_key(cls, key: str) -> "Band":
        for b in cls:
            if key in (b.key, b.name):
                return b
        raise GridError(f"unknown band {key!r}")


def band_of(c: CwdmChannel) -> Band | None:
    for b in Band:
        if b.contains(*c.passband):
            return b
    return None


def dwdm_channels_in(c: CwdmChannel, grid_spacing: float = 100.0) -> list[DwdmChannel]:
    """DWDM channels carried by one CWDM channel.

    The count is ``floor(passband / spacing)`` measured in frequency, i.e. the
    ``floor(13 / 0.8) = 16`` rule near 1550 nm.  The returned block is that
    many consecutive grid channels centred on the CWDM passband.  The ITU grid
    is not aligned to CWDM edges, so the outermost slots may overhang the
    passband by less than one spacing.
    """
    if grid_spacing <= 0:
        raise GridError("grid spacing must be positive")
    return list(_block(c, float(grid_spacing)))


@lru_cache(maxsize=4096)
def _block(c: CwdmChannel, grid_spacing: float) -> tuple[DwdmChannel, ...]:
    flo, fhi = c.frequency_range
    width_ghz = (fhi - flo) * 1000.0
    n = math.floor(width_ghz / grid_spacing + 1e-9)
    if n <= 0:
        return ()
    center_idx = ((flo + fhi) / 2 * 1000.0 - ANCHOR_GHZ) / grid_spacing
    start = math.floor(center_idx - (n - 1) / 2 + 0.5)
    return tuple(DwdmChannel(start + k, grid_spacing) for k in range(n))


def cwdm_parent(ch: DwdmChannel, candidates, grid_spacing: float | None = None) -> CwdmChannel | None:
    """The CWDM channel among ``candidates`` whose DWDM block contains ``ch``."""
    for c in candidates:
        if ch in dwdm_channels_in(c, grid_spacing or ch.spacing):
            return c
    return None


def center_half_index(source_center: float, spacing: float = 100.0) -> int:
    """Source centre (THz) as an integer count of half grid steps from the anchor."""
    h = 2.0 * (source_center * 1000.0 - ANCHOR_GHZ) / spacing
    r = round(h)
    if abs(h - r) > 1e-6:
        raise GridError("pairing not grid-aligned")
    return r


def half_index_frequency(half_index: int, spacing: float = 100.0) -> float:
    return (ANCHOR_GHZ + half_index * spacing / 2.0) / 1000.0


def partner_index(index: int, half_index: int) -> int:
    return half_index - index


def entangled_partner(ch: DwdmChannel, source_center: float, source=None) -> DwdmChannel:
    """Frequency-mirrored partner of ``ch`` about the source centre (THz).

    ``source`` may be anything with a ``covers(channel)`` method; when given,
    the partner must lie inside its spectrum.
    """
    h = center_half_index(source_center, ch.spacing)
    partner = DwdmChannel(partner_index(ch.index, h), ch.spacing)
    if source is not None and not (source.covers(ch) and source.covers(partner)):
        raise GridError("partner outside source spectrum")
    return partner
