"""Feature descriptors and the built-in catalog.

Feature *values* live in event feature maps under plain names (``ip``,
``ua_browser``, ``hour``, ...). Catalog *descriptors* name scoreable
features; a descriptor is either a single value taken at weight 1.0 or a
weighted mixture over several values (the ``*_weighted`` entries).
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Raw feature names expected in ingested datasets.
F_IP = "ip"
F_UA = "ua"
F_COOKIE = "cookie"
F_CLIENT_FP = "client_fp"
F_RTT_MEASUREMENTS = "rtt_measurements"

# Derived feature names.
F_IP_ASN = "ip_asn"
F_IP_COUNTRY = "ip_country"
F_IP_REGION = "ip_region"
F_UA_BROWSER = "ua_browser"
F_UA_OS = "ua_os"
F_UA_DEVICE = "ua_device_type"
F_HOUR = "hour"
F_WEEKDAY = "weekday"
F_WEEKDAY_HOUR = "weekday_hour"
F_RTT_RAW = "rtt_raw"
F_RTT_MS = "rtt_ms"
F_RTT_5MS = "rtt_5ms"
F_RTT_10MS = "rtt_10ms"
F_CONST = "const"

# Pseudo-feature for the SIMPLE model: matched against login recency,
# not against a stored value.
F_LAST_LOGIN = "last_login"

DEVICE_DESKTOP = "desktop"
DEVICE_MOBILE = "mobile"

WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FeatureDescriptor:
    """A scoreable feature: identity, derivation, weights, reliability."""

    name: str
    kind: str = "raw"  # "raw" | "derived"
    derivation: str | None = None
    subfeatures: tuple[tuple[str, float], ...] = ()
    server_side: bool = False
    script_free: bool = False

    def __post_init__(self):
        if self.subfeatures:
            total = sum(w for _, w in self.subfeatures)
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise ValueError(
                    f"{self.name}: subfeature weights sum to {total}, not 1")
            if any(w < 0 or w > 1 for _, w in self.subfeatures):
                raise ValueError(f"{self.name}: weights must lie in [0, 1]")

    def effective_subfeatures(self) -> tuple[tuple[str, float], ...]:
        """Subfeature list; a bare descriptor is itself at weight 1.0."""
        if self.subfeatures:
            return self.subfeatures
        return ((self.name, 1.0),)


def _single(name: str, *, derivation: str | None = None, server: bool,
            script_free: bool) -> FeatureDescriptor:
    kind = "derived" if derivation else "raw"
    return FeatureDescriptor(name=name, kind=kind, derivation=derivation,
                             server_side=server, script_free=script_free)


@dataclass
class FeatureCatalog:
    """Named descriptors plus the derivation rules to run at ingest."""

    descriptors: dict[str, FeatureDescriptor] = field(default_factory=dict)
    rules: tuple[str, ...] = ()

    def __contains__(self, name: str) -> bool:
        return name in self.descriptors

    def get(self, name: str) -> FeatureDescriptor:
        return self.descriptors[name]

    def names(self) -> list[str]:
        return list(self.descriptors)

    def add(self, descriptor: FeatureDescriptor) -> None:
        self.descriptors[descriptor.name] = descriptor

    def with_overrides(self, overrides: dict) -> "FeatureCatalog":
        """Copy with per-descriptor weight/label overrides from config.

        ``overrides`` maps descriptor name to a mapping with any of
        ``weights`` (subfeature name -> weight), ``serverSide``,
        ``scriptFree``.
        """
        out = FeatureCatalog(descriptors=dict(self.descriptors),
                             rules=self.rules)
        for name, spec in overrides.items():
            base = out.descriptors.get(name)
            if base is None:
                raise KeyError(f"unknown feature {name!r} in overrides")
            subs = base.subfeatures
            if "weights" in spec:
                weights = spec["weights"]
                subs = tuple((sub, float(weights.get(sub, w)))
                             for sub, w in base.effective_subfeatures())
            out.descriptors[name] = FeatureDescriptor(
                name=base.name, kind=base.kind, derivation=base.derivation,
                subfeatures=subs,
                server_side=bool(spec.get("serverSide", base.server_side)),
                script_free=bool(spec.get("scriptFree", base.script_free)))
        return out


def builtin_catalog() -> FeatureCatalog:
    """Default catalog: network, user-agent, timing, RTT, and client features.

    The weighted IP and UA mixtures carry the default subfeature weights
    (IP address 0.6 / ASN 0.3 / country 0.1; UA full string 0.53 /
    browser 0.27 / OS 0.19 / device type 0.01); both are overridable via
    the run configuration.
    """
    catalog = FeatureCatalog(rules=("ip", "ua", "timestamp", "rtt", "const"))

    catalog.add(_single(F_IP, server=True, script_free=True))
    catalog.add(FeatureDescriptor(
        name="ip_weighted", kind="derived", derivation="ip",
        subfeatures=((F_IP, 0.6), (F_IP_ASN, 0.3), (F_IP_COUNTRY, 0.1)),
        server_side=True, script_free=True))
    catalog.add(_single(F_IP_ASN, derivation="ip", server=True,
                        script_free=True))
    catalog.add(_single(F_IP_COUNTRY, derivation="ip", server=True,
                        script_free=True))
    catalog.add(_single(F_IP_REGION, derivation="ip", server=True,
                        script_free=True))

    catalog.add(_single(F_UA, server=False, script_free=True))
    catalog.add(FeatureDescriptor(
        name="ua_weighted", kind="derived", derivation="ua",
        subfeatures=((F_UA, 0.53), (F_UA_BROWSER, 0.27), (F_UA_OS, 0.19),
                     (F_UA_DEVICE, 0.01)),
        server_side=False, script_free=True))
    catalog.add(_single(F_UA_BROWSER, derivation="ua", server=False,
                        script_free=True))
    catalog.add(_single(F_UA_OS, derivation="ua", server=False,
                        script_free=True))
    catalog.add(_single(F_UA_DEVICE, derivation="ua", server=False,
                        script_free=True))

    catalog.add(_single(F_HOUR, derivation="timestamp", server=True,
                        script_free=True))
    catalog.add(_single(F_WEEKDAY, derivation="timestamp", server=True,
                        script_free=True))
    catalog.add(_single(F_WEEKDAY_HOUR, derivation="timestamp", server=True,
                        script_free=True))

    # RTT is measured server side over a web socket, so JavaScript is
    # required on the client even though the value itself is trustworthy.
    catalog.add(_single(F_RTT_RAW, derivation="rtt", server=True,
                        script_free=False))
    catalog.add(_single(F_RTT_MS, derivation="rtt", server=True,
                        script_free=False))
    catalog.add(_single(F_RTT_5MS, derivation="rtt", server=True,
                        script_free=False))
    catalog.add(_single(F_RTT_10MS, derivation="rtt", server=True,
                        script_free=False))

    catalog.add(_single(F_COOKIE, server=False, script_free=True))
    catalog.add(_single(F_CLIENT_FP, server=False, script_free=False))

    # Zero-entropy baseline used by the feature benchmark.
    catalog.add(_single(F_CONST, derivation="const", server=True,
                        script_free=True))
    return catalog
