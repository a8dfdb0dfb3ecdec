"""Broadband SPDC pair sources: spectrum, pair rates, planning and connection schemes."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from enum import Enum

from .wdm_grid import (
    ANCHOR_GHZ, C_NM_THZ, CwdmChannel, DwdmChannel, GridError, dwdm_channels_in,
    half_index_frequency, partner_index,
)

DEFAULT_WIDTH_NM = 70.0
DEFAULT_PAIR_RATE_DENSITY = 4.5e5  # pairs/s/mW/GHz
MULTI_PAIR_POWER_MW = 1.0
PUMP_RANGE_NM = (770.0, 780.0)


class MultiPairWarning(UserWarning):
    """Pump power above the level where multi-pair emission starts to matter."""


class SourceError(ValueError):
    pass


@dataclass(frozen=True)
class EntangledSourceSpec:
    """A broadband pair source centred on a grid half-step.

    ``center_half_index`` counts half grid steps from 193.1 THz, which keeps
    the centre exactly on (or midway between) grid channels so that partner
    channels land on the grid.
    """
    name: str
    center_half_index: int
    spacing: float = 100.0
    spectral_width: float = DEFAULT_WIDTH_NM
    pair_rate_density: float = DEFAULT_PAIR_RATE_DENSITY
    pump_power: float = 1.0
    connected_channels: frozenset = frozenset()
    targets: tuple = ()  # CWDM channels the source was planned for
    nominal_center_nm: float | None = None
    center_shift_ghz: float = 0.0  # snapped centre minus the exact midpoint

    def __post_init__(self):
        if self.spectral_width <= 0:
            raise SourceError("spectral width must be positive")
        if self.pump_power < 0:
            raise SourceError("pump power must be non-negative")
        for ch in self.connected_channels:
            if ch.spacing != self.spacing:
                raise SourceError(f"{ch} is not on the source's {self.spacing} GHz grid")
            if self.partner(ch) not in self.connected_channels:
                raise SourceError(f"connected channels of {self.name} are not closed under pairing ({ch})")
        if self.pump_power > MULTI_PAIR_POWER_MW:
            warnings.warn(f"{self.name}: {self.pump_power} mW pump exceeds {MULTI_PAIR_POWER_MW} mW; "
                          "multi-pair emission degrades the pairs", MultiPairWarning, stacklevel=3)

    @classmethod
    def centered_at(cls, name: str, wavelength_nm: float, spacing: float = 100.0, **kw) -> "EntangledSourceSpec":
        """Snap a requested centre wavelength to the nearest half grid step."""
        h = round(2 * (C_NM_THZ / wavelength_nm * 1000.0 - ANCHOR_GHZ) / spacing)
        kw.setdefault("nominal_center_nm", wavelength_nm)
        return cls(name, h, spacing, **kw)

    @classmethod
    def from_pump(cls, name: str, pump_wavelength_nm: float, spacing: float = 100.0, **kw):
        return cls.centered_at(name, 2 * pump_wavelength_nm, spacing, **kw)

    @property
    def center_frequency(self) -> float:
        return half_index_frequency(self.center_half_index, self.spacing)

    @property
    def center_wavelength(self) -> float:
        return C_NM_THZ / self.center_frequency

    @property
    def pump_wavelength(self) -> float:
        return self.center_wavelength / 2

    @property
    def pump_in_range(self) -> bool:
        lo, hi = PUMP_RANGE_NM
        return lo <= self.pump_wavelength <= hi

    def partner(self, ch: DwdmChannel) -> DwdmChannel:
        if ch.spacing != self.spacing:
            raise GridError("pairing not grid-aligned")
        return DwdmChannel(partner_index(ch.index, self.center_half_index), ch.spacing)

    def coverage(self) -> tuple[float, float]:
        return coverage(self)

    def covers(self, ch: DwdmChannel | CwdmChannel) -> bool:
        lo, hi = coverage(self)
        a, b = ch.passband
        return lo - 1e-9 <= a and b <= hi + 1e-9

    @property
    def label(self) -> str:
        nominal = self.nominal_center_nm
        return f"{self.name} (center {nominal if nominal is not None else round(self.center_wavelength, 2)} nm)"


def coverage(src: EntangledSourceSpec) -> tuple[float, float]:
    """Wavelength span (nm) of the flat pair spectrum."""
    h = src.spectral_width / 2
    return src.center_wavelength - h, src.center_wavelength + h


def pair_rate_per_channel(src: EntangledSourceSpec, ch: DwdmChannel) -> float:
    """Pairs/s delivered into ``ch`` (and its partner) by a flat-spectrum source."""
    if not (src.covers(ch) and src.covers(src.partner(ch))):
        raise SourceError(f"{ch} or its partner lies outside the spectrum of {src.name}")
    return src.pair_rate_density * src.pump_power * ch.spacing


def required_width(a: CwdmChannel, b: CwdmChannel, center_wavelength: float) -> float:
    """Full width a source centred at ``center_wavelength`` needs to cover both passbands."""
    lo = min(a.passband[0], b.passband[0])
    hi = max(a.passband[1], b.passband[1])
    return 2 * max(center_wavelength - lo, hi - center_wavelength)


def midpoint_source(name: str, a: CwdmChannel, b: CwdmChannel, spacing: float = 100.0,
                    width: float = DEFAULT_WIDTH_NM, pump_power: float = 1.0) -> EntangledSourceSpec:
    """Source centred on the frequency midpoint of two CWDM channels, snapped to a half grid step."""
    f_mid = (a.center_frequency + b.center_frequency) / 2
    exact = 2 * (f_mid * 1000.0 - ANCHOR_GHZ) / spacing
    h = round(exact)
    shift = (h - exact) * spacing / 2
    return EntangledSourceSpec(
        name, h, spacing, width, pump_power=pump_power, targets=(a, b),
        nominal_center_nm=(a.nominal_wavelength + b.nominal_wavelength) / 2,
        center_shift_ghz=round(shift, 6),
    )


def serving_pairs(src: EntangledSourceSpec, a: CwdmChannel, b: CwdmChannel) -> list[tuple[DwdmChannel, DwdmChannel]]:
    """DWDM pairs (x in a, partner in b) the source can put on the two CWDM channels."""
    block_a = dwdm_channels_in(a, src.spacing)
    block_b = set(dwdm_channels_in(b, src.spacing))
    out = []
    for ch in block_a:
        p = src.partner(ch)
        if p == ch or p not in block_b:
            continue
        if a == b and p < ch:
            continue
        if src.covers(ch) and src.covers(p):
            out.append((ch, p))
    return out


def serves(src: EntangledSourceSpec, a: CwdmChannel, b: CwdmChannel) -> bool:
    return bool(serving_pairs(src, a, b))


@dataclass(frozen=True)
class Infeasibility:
    pair: tuple[CwdmChannel, CwdmChannel]
    required_width: float
    max_width: float

    def __str__(self):
        a, b = self.pair
        return (f"({a}, {b}) needs {self.required_width:.1f} nm of source spectrum, "
                f"more than {self.max_width:.1f} nm")


@dataclass
class SourcePlan:
    sources: list[EntangledSourceSpec]
    infeasible: list[Infeasibility] = field(default_factory=list)
    served_by: dict = field(default_factory=dict)  # (a, b) -> source names

    @property
    def feasible(self) -> bool:
        return not self.infeasible

    def __iter__(self):
        return iter(self.sources)

    def __len__(self):
        return len(self.sources)


def an_pairs(channels):
    """Unordered pairs including self pairs, in order (1,1), (1,2), ..."""
    return list(itertools.combinations_with_replacement(channels, 2))


def plan_sources_for_pairs(an_channels, max_width: float = DEFAULT_WIDTH_NM, *,
                           spacing: float = 100.0, overlap: bool = False,
                           pump_power: float = 1.0) -> SourcePlan:
    """One source per access-network pair, centred on the pair's frequency midpoint.

    With ``overlap`` a greedy cover keeps only as many sources as needed,
    letting a source for (i, j) also serve other pairs mirrored about its
    centre, e.g. the self pair of a channel lying midway between i and j.
    """
    chans = [c if isinstance(c, CwdmChannel) else CwdmChannel.parse(c) for c in an_channels]
    if len(set(chans)) != len(chans):
        raise SourceError("access-network channels must be distinct")
    pairs = an_pairs(chans)
    candidates, infeasible = [], []
    for k, (a, b) in enumerate(pairs, 1):
        src = midpoint_source(f"S{k}", a, b, spacing, max_width, pump_power)
        need = required_width(a, b, src.center_wavelength)
        if need > max_width + 1e-9 or not serves(src, a, b):
            infeasible.append(Infeasibility((a, b), need, max_width))
            continue
        candidates.append(src)

    coverable = {p: [s for s in candidates if serves(s, *p)] for p in pairs}
    if not overlap:
        chosen = candidates
    else:
        chosen, open_pairs = [], {p for p in pairs if coverable[p]}
        while open_pairs:
            best = max(candidates, key=lambda s: (sum(1 for p in open_pairs if s in coverable[p]),
                                                  -candidates.index(s)))
            gained = {p for p in open_pairs if best in coverable[p]}
            if not gained:
                break
            chosen.append(best)
            open_pairs -= gained
        chosen.sort(key=candidates.index)
        chosen = [_rename(s, f"S{i}") for i, s in enumerate(chosen, 1)]
    served_by = {p: [s.name for s in chosen if serves(s, *p)] for p in pairs}
    return SourcePlan(chosen, infeasible, served_by)


def _rename(src: EntangledSourceSpec, name: str) -> EntangledSourceSpec:
    from dataclasses import replace
    return replace(src, name=name)


class ConnectionScheme(Enum):
    SWITCHED_CWDM = "switched_cwdm"
    SWITCHED_DWDM = "switched_dwdm"
    FIXED_SPLIT = "fixed_split"


@dataclass(frozen=True)
class SourceConnection:
    """Which DWDM channels each source drives under a connection scheme.

    ``allocation`` maps source name to a set of DWDM channels.  For the
    switched schemes it is the state at one instant.
    """
    scheme: ConnectionScheme
    allocation: dict

    def violations(self, cwdm_of=None) -> list[str]:
        out = []
        names = sorted(self.allocation)
        if self.scheme in (ConnectionScheme.FIXED_SPLIT, ConnectionScheme.SWITCHED_DWDM):
            for x, y in itertools.combinations(names, 2):
                common = set(self.allocation[x]) & set(self.allocation[y])
                if common:
                    out.append(f"{x} and {y} share DWDM channels {sorted(str(c) for c in common)}")
        if self.scheme is ConnectionScheme.SWITCHED_CWDM:
            if cwdm_of is None:
                raise SourceError("switched_cwdm check needs a DWDM->CWDM mapping")
            owner = {}
            for name in names:
                for ch in self.allocation[name]:
                    c = cwdm_of(ch)
                    if owner.setdefault(c, name) != name:
                        out.append(f"{c} driven by both {owner[c]} and {name}")
        return out
