"""Longest-prefix IP lookup table for ASN / country / region enrichment.

Entirely offline: the table is a delimited text file with lines
``cidr-prefix, asn, country, region``. No live geolocation service is
ever consulted.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass


@dataclass(frozen=True)
class PrefixEntry:
    network: str
    asn: str
    country: str
    region: str


class PrefixTable:
    """CIDR prefix table with longest-prefix-match lookups."""

    def __init__(self, entries=()):
        # (ip version, prefix length) -> {network int prefix: entry}
        self._buckets: dict[tuple[int, int], dict[int, PrefixEntry]] = {}
        self._entries: list[PrefixEntry] = []
        for entry in entries:
            self.add(entry.network, entry.asn, entry.country, entry.region)

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> list[PrefixEntry]:
        return list(self._entries)

    def add(self, cidr: str, asn: str, country: str, region: str) -> None:
        network = ipaddress.ip_network(cidr, strict=False)
        entry = PrefixEntry(network=str(network), asn=str(asn),
                            country=country, region=region)
        key = (network.version, network.prefixlen)
        shift = network.max_prefixlen - network.prefixlen
        self._buckets.setdefault(key, {})[int(network.network_address) >> shift] = entry
        self._entries.append(entry)

    def lookup(self, ip: str) -> PrefixEntry | None:
        """Most specific entry covering the address, or None."""
        try:
            addr = ipaddress.ip_address(ip)
        except ValueError:
            return None
        value = int(addr)
        for version, prefixlen in sorted(self._buckets, key=lambda k: -k[1]):
            if version != addr.version:
                continue
            shift = addr.max_prefixlen - prefixlen
            entry = self._buckets[(version, prefixlen)].get(value >> shift)
            if entry is not None:
                return entry
        return None

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# cidr,asn,country,region\n")
            for entry in self._entries:
                fh.write(f"{entry.network},{entry.asn},"
                         f"{entry.country},{entry.region}\n")

    @classmethod
    def load(cls, path) -> "PrefixTable":
        table = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = [part.strip() for part in line.split(",")]
                if len(parts) != 4:
                    raise ValueError(
                        f"{path}:{lineno}: expected cidr,asn,country,region")
                table.add(*parts)
        return table
