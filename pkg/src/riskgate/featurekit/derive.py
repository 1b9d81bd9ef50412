"""Subfeature derivation: IP enrichment, UA parsing, timing, and RTT buckets.

Derivation is a pure function of (event, catalog, lookup table); datasets
that already ship pre-extracted subfeature columns keep them, and the
rules only fill slots that are still missing.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone

from riskgate.core import MISSING, LoginEvent, RiskgateError
from riskgate.featurekit import catalog as cat
from riskgate.featurekit.catalog import FeatureCatalog
from riskgate.featurekit.iplookup import PrefixTable
from riskgate.featurekit.uaparse import parse_user_agent


class UnknownDerivationRule(RiskgateError):
    """A catalog references a derivation rule this build does not provide."""


class LookupTableMissing(RiskgateError):
    """IP derivation was requested without a prefix lookup table."""


def round_to_nearest(value: float, step: float) -> float:
    """Round half away from zero to the nearest multiple of ``step``."""
    return math.floor(abs(value) / step + 0.5) * step * (1 if value >= 0 else -1)


def _format_ms(value: float) -> str:
    """Milliseconds with microsecond precision, no trailing zeros."""
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    return text if text else "0"


def _rule_ip(event: LoginEvent, features: dict[str, str],
             lookup: PrefixTable | None) -> dict[str, str]:
    ip = features.get(cat.F_IP, MISSING)
    targets = (cat.F_IP_ASN, cat.F_IP_COUNTRY, cat.F_IP_REGION)
    if all(features.get(t, MISSING) != MISSING for t in targets):
        return {}
    if ip == MISSING:
        return {t: MISSING for t in targets}
    if lookup is None:
        raise LookupTableMissing(
            "ip derivation requires a prefix lookup table")
    entry = lookup.lookup(ip)
    if entry is None:
        return {t: MISSING for t in targets}
    return {cat.F_IP_ASN: entry.asn, cat.F_IP_COUNTRY: entry.country,
            cat.F_IP_REGION: entry.region}


def _rule_ua(event: LoginEvent, features: dict[str, str],
             lookup: PrefixTable | None) -> dict[str, str]:
    ua = features.get(cat.F_UA, MISSING)
    targets = (cat.F_UA_BROWSER, cat.F_UA_OS, cat.F_UA_DEVICE)
    if all(features.get(t, MISSING) != MISSING for t in targets):
        return {}
    if ua == MISSING:
        return {t: MISSING for t in targets}
    browser, os_name, device = parse_user_agent(ua)
    return {cat.F_UA_BROWSER: browser, cat.F_UA_OS: os_name,
            cat.F_UA_DEVICE: device}


def _rule_timestamp(event: LoginEvent, features: dict[str, str],
                    lookup: PrefixTable | None) -> dict[str, str]:
    moment = datetime.fromtimestamp(event.timestamp, tz=timezone.utc)
    weekday = moment.weekday()  # Monday = 0
    hour = moment.hour
    return {
        cat.F_HOUR: str(hour),
        cat.F_WEEKDAY: str(weekday),
        cat.F_WEEKDAY_HOUR: str(weekday * 100 + hour),
    }


def _rule_rtt(event: LoginEvent, features: dict[str, str],
              lookup: PrefixTable | None) -> dict[str, str]:
    raw = features.get(cat.F_RTT_MEASUREMENTS, MISSING)
    targets = (cat.F_RTT_RAW, cat.F_RTT_MS, cat.F_RTT_5MS, cat.F_RTT_10MS)
    if raw == MISSING:
        return {t: MISSING for t in targets}
    try:
        samples = [float(tok) for tok in raw.split(";") if tok.strip()]
    except ValueError:
        samples = []
    if not samples:
        return {t: MISSING for t in targets}
    best = min(samples)  # smallest probe mitigates connectivity spikes
    return {
        cat.F_RTT_RAW: _format_ms(best),
        cat.F_RTT_MS: str(int(round_to_nearest(best, 1))),
        cat.F_RTT_5MS: str(int(round_to_nearest(best, 5))),
        cat.F_RTT_10MS: str(int(round_to_nearest(best, 10))),
    }


def _rule_const(event: LoginEvent, features: dict[str, str],
                lookup: PrefixTable | None) -> dict[str, str]:
    return {cat.F_CONST: "1"}


_RULES = {
    "ip": _rule_ip,
    "ua": _rule_ua,
    "timestamp": _rule_timestamp,
    "rtt": _rule_rtt,
    "const": _rule_const,
}


def derive_subfeatures(event: LoginEvent, catalog: FeatureCatalog,
                       lookup: PrefixTable | None = None) -> dict[str, str]:
    """Feature map enriched with every derived value the catalog declares.

    Pre-extracted columns win over derivation; underivable values come back
    as :data:`MISSING`.
    """
    features = dict(event.features)
    for rule in catalog.rules:
        fn = _RULES.get(rule)
        if fn is None:
            raise UnknownDerivationRule(rule)
        for name, value in fn(event, features, lookup).items():
            if features.get(name, MISSING) == MISSING:
                features[name] = value
    return features


def enrich_event(event: LoginEvent, catalog: FeatureCatalog,
                 lookup: PrefixTable | None = None) -> LoginEvent:
    return LoginEvent(user=event.user, timestamp=event.timestamp,
                      features=derive_subfeatures(event, catalog, lookup),
                      label=event.label, event_id=event.event_id)


def enrich_dataset(events, catalog: FeatureCatalog,
                   lookup: PrefixTable | None = None) -> list[LoginEvent]:
    return [enrich_event(event, catalog, lookup) for event in events]
