"""Synthetic login population and the three attacker models.

The generator builds a small world first: regions with one residential ISP
each, a dominant home region (users mostly share a city), foreign ISP
prefixes for naive attackers, and VPN exit prefixes per country. The
prefix lookup table covers all of it, and the attacker pool is disjoint
from every home prefix by construction.

Generation is single-threaded per seed stream; parallel generation must
use independent seeds.
"""

from __future__ import annotations

import ipaddress
import random
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from riskgate.core import (
    MISSING,
    HistoryView,
    LoginEvent,
    RiskgateError,
    attack_label,
)
from riskgate.featurekit import catalog as cat
from riskgate.featurekit.catalog import FeatureCatalog, builtin_catalog
from riskgate.featurekit.derive import enrich_event
from riskgate.featurekit.iplookup import PrefixTable

ATTACKER_MODELS = ("naive", "vpn", "targeted")

RAW_FEATURES = (cat.F_IP, cat.F_UA, cat.F_COOKIE, cat.F_CLIENT_FP,
                cat.F_RTT_MEASUREMENTS)


class InvalidConfig(RiskgateError):
    """Population configuration violates a generator precondition."""


class NoPoolEntryForCountry(RiskgateError):
    """The attacker pool lacks an entry for the victim's country."""


@dataclass(frozen=True)
class PopulationConfig:
    """Shape of the synthetic population; the seed is mandatory."""

    user_count: int
    seed: int
    mean_logins_per_user: float = 12.25
    login_dispersion: float = 0.785  # lognormal sigma around the mean
    max_logins_per_user: int = 83
    desktop_fraction: float = 0.811
    os_desktop_weights: dict[str, float] = field(default_factory=lambda: {
        "windows": 0.625, "macos": 0.372, "linux": 0.003})
    os_mobile_weights: dict[str, float] = field(default_factory=lambda: {
        "ios": 0.752, "android": 0.248})
    browser_weights: dict[str, float] = field(default_factory=lambda: {
        "safari": 0.404, "chrome": 0.290, "firefox": 0.261, "edge": 0.033})
    region_concentration: float = 0.6  # user share of the primary region
    region_count: int = 12
    travel_probability: float = 0.05
    start_ts: int = 1533081600  # 2018-08-01T00:00:00Z
    duration_days: int = 600

    def __post_init__(self):
        if self.user_count < 1:
            raise InvalidConfig("user_count must be >= 1")
        fractions = [self.desktop_fraction, self.region_concentration,
                     self.travel_probability]
        if any(f < 0 or f > 1 for f in fractions):
            raise InvalidConfig("fractions must lie in [0, 1]")
        if self.mean_logins_per_user < 1:
            raise InvalidConfig("mean_logins_per_user must be >= 1")
        if self.region_count < 2:
            raise InvalidConfig("need at least two regions")
        if self.user_count > 10000 * self.region_count:
            raise InvalidConfig("user_count exceeds address space of the world")


@dataclass(frozen=True)
class PoolEntry:
    """One attacker-reachable prefix with an optional country tag."""

    cidr: str
    country: str | None = None


@dataclass
class World:
    """Generated dataset plus the artifacts that make it scoreable."""

    events: list[LoginEvent]
    lookup: PrefixTable
    pool: list[PoolEntry]


# -- UA string composition ----------------------------------------------------

_UA_TEMPLATES: dict[tuple[str, str], list[str]] = {
    ("windows", "chrome"): [
        "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
        "(KHTML, like Gecko) Chrome/{v}.0.4472.124 Safari/537.36",
    ],
    ("windows", "firefox"): [
        "Mozilla/5.0 (Windows NT 10.0; Win64; x64; rv:{v}.0) "
        "Gecko/20100101 Firefox/{v}.0",
    ],
    ("windows", "edge"): [
        "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
        "(KHTML, like Gecko) Chrome/{v}.0.4472.124 Safari/537.36 "
        "Edg/{v}.0.864.59",
    ],
    ("macos", "safari"): [
        "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) "
        "AppleWebKit/605.1.15 (KHTML, like Gecko) Version/{v}.1.1 "
        "Safari/605.1.15",
    ],
    ("macos", "chrome"): [
        "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) "
        "AppleWebKit/537.36 (KHTML, like Gecko) Chrome/{v}.0.4472.114 "
        "Safari/537.36",
    ],
    ("macos", "firefox"): [
        "Mozilla/5.0 (Macintosh; Intel Mac OS X 10.15; rv:{v}.0) "
        "Gecko/20100101 Firefox/{v}.0",
    ],
    ("linux", "firefox"): [
        "Mozilla/5.0 (X11; Linux x86_64; rv:{v}.0) Gecko/20100101 "
        "Firefox/{v}.0",
    ],
    ("linux", "chrome"): [
        "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 "
        "(KHTML, like Gecko) Chrome/{v}.0.4472.124 Safari/537.36",
    ],
    ("ios", "safari"): [
        "Mozilla/5.0 (iPhone; CPU iPhone OS 14_{v} like Mac OS X) "
        "AppleWebKit/605.1.15 (KHTML, like Gecko) Version/14.{v} "
        "Mobile/15E148 Safari/604.1",
    ],
    ("ios", "chrome"): [
        "Mozilla/5.0 (iPhone; CPU iPhone OS 14_{v} like Mac OS X) "
        "AppleWebKit/605.1.15 (KHTML, like Gecko) CriOS/{v}.0.4472.80 "
        "Mobile/15E148 Safari/604.1",
    ],
    ("android", "chrome"): [
        "Mozilla/5.0 (Linux; Android 11; SM-G99{v}B) AppleWebKit/537.36 "
        "(KHTML, like Gecko) Chrome/{v}.0.4472.120 Mobile Safari/537.36",
    ],
    ("android", "firefox"): [
        "Mozilla/5.0 (Android 11; Mobile; rv:{v}.0) Gecko/{v}.0 "
        "Firefox/{v}.0",
    ],
}

_BROWSERS_BY_OS = {
    "windows": ("chrome", "firefox", "edge"),
    "macos": ("safari", "chrome", "firefox"),
    "linux": ("firefox", "chrome"),
    "ios": ("safari", "chrome"),
    "android": ("chrome", "firefox"),
}

_UA_VERSIONS = (87, 88, 89, 90, 91)

MOBILE_OSES = ("ios", "android")


def _compose_ua(os_family: str, browser: str, rng: random.Random) -> str:
    template = rng.choice(_UA_TEMPLATES[(os_family, browser)])
    return template.format(v=rng.choice(_UA_VERSIONS))


# -- world layout -------------------------------------------------------------

def _region_country(region: int, region_count: int) -> str:
    # Single-country user base: the service's users live in one country
    # spread over regions, with one city dominating.
    return "C0"


def _build_world_table(cfg: PopulationConfig) -> tuple[PrefixTable, list[PoolEntry]]:
    table = PrefixTable()
    pool: list[PoolEntry] = []
    countries = sorted({_region_country(r, cfg.region_count)
                        for r in range(cfg.region_count)})
    for r in range(cfg.region_count):
        table.add(f"10.{r}.0.0/16", f"AS{64500 + r}",
                  _region_country(r, cfg.region_count), f"R{r}")
    # Foreign ISPs for the naive attacker: unrelated countries and regions.
    for k in range(24):
        cidr = f"10.{100 + k}.0.0/16"
        table.add(cidr, f"AS{65000 + k}", f"CX{k}", f"RX{k}")
        pool.append(PoolEntry(cidr=cidr, country=f"CX{k}"))
    # VPN exits: right country, foreign city, provider-owned ASN.
    for j, country in enumerate(countries):
        for dup in range(2):
            idx = j * 2 + dup
            cidr = f"10.{200 + idx}.0.0/16"
            table.add(cidr, f"AS{66000 + idx}", country, f"RV{idx}")
            pool.append(PoolEntry(cidr=cidr, country=country))
    return table, pool


@dataclass
class _Device:
    ua: str
    mobile: bool
    client_fp: str
    cookie: str
    rtt_offset: float


@dataclass
class _UserProfile:
    user: str
    region: int
    home_ips: list[str]
    mobile_ip: str
    devices: list[_Device]
    device_weights: list[float]
    hours: list[int]
    hour_weights: list[float]
    weekday_weights: list[float]
    login_count: int


def _weighted_choice(rng: random.Random, weights: dict[str, float]) -> str:
    names = list(weights)
    return rng.choices(names, weights=[weights[n] for n in names], k=1)[0]


def _pick_browser(rng: random.Random, os_family: str,
                  browser_weights: dict[str, float]) -> str:
    allowed = _BROWSERS_BY_OS[os_family]
    weights = [browser_weights.get(b, 0.01) for b in allowed]
    return rng.choices(list(allowed), weights=weights, k=1)[0]


def _new_token(rng: random.Random) -> str:
    return f"{rng.getrandbits(64):016x}"


def _make_profile(idx: int, slot: int, region: int, cfg: PopulationConfig,
                  rng: random.Random) -> _UserProfile:
    block, host = 1 + slot // 100, 10 + 2 * (slot % 100)
    home_ips = [f"10.{region}.{block}.{host}"]
    if rng.random() < 0.5:
        home_ips.append(f"10.{region}.{block}.{host + 1}")
    mobile_ip = f"10.{region}.{200 + slot // 200}.{10 + slot % 200}"

    devices: list[_Device] = []
    device_count = rng.choices((1, 2, 3), weights=(0.45, 0.4, 0.15), k=1)[0]
    for _ in range(device_count):
        mobile = rng.random() >= cfg.desktop_fraction
        os_weights = cfg.os_mobile_weights if mobile else cfg.os_desktop_weights
        os_family = _weighted_choice(rng, os_weights)
        browser = _pick_browser(rng, os_family, cfg.browser_weights)
        devices.append(_Device(
            ua=_compose_ua(os_family, browser, rng),
            mobile=os_family in MOBILE_OSES,
            client_fp=_new_token(rng),
            cookie=_new_token(rng),
            rtt_offset=rng.uniform(0.0, 2.0)))
    device_weights = [0.7, 0.2, 0.1][:device_count]

    hour_count = rng.randint(4, 7)
    hours = rng.sample(range(7, 24), hour_count)
    hour_weights = [rng.uniform(1.0, 2.5) for _ in hours]
    weekday_weights = [rng.uniform(0.8, 1.6) for _ in range(5)] + \
        [rng.uniform(0.3, 0.9) for _ in range(2)]

    sigma = cfg.login_dispersion
    mu = _lognormal_mu(cfg.mean_logins_per_user, sigma)
    count = int(round(rng.lognormvariate(mu, sigma)))
    count = max(1, min(cfg.max_logins_per_user, count))

    return _UserProfile(user=f"u{idx:05d}", region=region, home_ips=home_ips,
                        mobile_ip=mobile_ip, devices=devices,
                        device_weights=device_weights, hours=hours,
                        hour_weights=hour_weights,
                        weekday_weights=weekday_weights, login_count=count)


def _lognormal_mu(mean: float, sigma: float) -> float:
    import math
    return math.log(mean) - sigma * sigma / 2.0


def _region_base_rtt(region: int) -> float:
    return 12.0 + 7.0 * region


def _rtt_measurements(base: float, rng: random.Random) -> str:
    samples = []
    for _ in range(5):
        value = base + abs(rng.gauss(0.0, 2.5))
        if rng.random() < 0.25:
            value += rng.uniform(3.0, 30.0)  # connectivity spike
        samples.append(f"{value:.3f}")
    return ";".join(samples)


def _login_ts(profile: _UserProfile, cfg: PopulationConfig,
              rng: random.Random) -> int:
    day = rng.randrange(cfg.duration_days)
    base = datetime.fromtimestamp(cfg.start_ts, tz=timezone.utc) + \
        timedelta(days=day)
    weekday = rng.choices(range(7), weights=profile.weekday_weights, k=1)[0]
    base += timedelta(days=(weekday - base.weekday()) % 7)
    hour = rng.choices(profile.hours, weights=profile.hour_weights, k=1)[0]
    moment = base.replace(hour=hour, minute=rng.randrange(60),
                          second=rng.randrange(60))
    return int(moment.timestamp())


def generate_world(cfg: PopulationConfig) -> World:
    """Population, lookup table, and attacker pool under one seed."""
    rng = random.Random(cfg.seed)
    table, pool = _build_world_table(cfg)

    slots = [0] * cfg.region_count
    events: list[LoginEvent] = []
    for idx in range(cfg.user_count):
        if rng.random() < cfg.region_concentration:
            region = 0
        else:
            region = rng.randrange(1, cfg.region_count)
        profile = _make_profile(idx, slots[region], region, cfg, rng)
        slots[region] += 1
        events.extend(_user_events(profile, cfg, rng))

    events.sort(key=lambda e: e.timestamp)
    return World(events=events, lookup=table, pool=pool)


def _user_events(profile: _UserProfile, cfg: PopulationConfig,
                 rng: random.Random) -> list[LoginEvent]:
    events = []
    for _ in range(profile.login_count):
        device_idx = rng.choices(range(len(profile.devices)),
                                 weights=profile.device_weights, k=1)[0]
        device = profile.devices[device_idx]
        travelling = rng.random() < cfg.travel_probability
        if travelling:
            away = rng.randrange(cfg.region_count)
            ip = f"10.{away}.250.{1 + rng.randrange(200)}"
            rtt_base = _region_base_rtt(away)
        elif device.mobile:
            ip = profile.mobile_ip
            rtt_base = _region_base_rtt(profile.region) + 22.0
        else:
            ip = rng.choice(profile.home_ips)
            rtt_base = _region_base_rtt(profile.region)
        if rng.random() < 0.1:
            device.cookie = _new_token(rng)  # session cookie rotation
        features = {
            cat.F_IP: ip,
            cat.F_UA: device.ua,
            cat.F_COOKIE: device.cookie,
            cat.F_CLIENT_FP: device.client_fp,
            cat.F_RTT_MEASUREMENTS: _rtt_measurements(
                rtt_base + device.rtt_offset, rng),
        }
        events.append(LoginEvent(user=profile.user,
                                 timestamp=_login_ts(profile, cfg, rng),
                                 features=features))
    return events


def generate_population(cfg: PopulationConfig) -> list[LoginEvent]:
    """Chronological legitimate logins (see generate_world for artifacts)."""
    return generate_world(cfg).events


# -- attacker models ----------------------------------------------------------

def _host_in(cidr: str, rng: random.Random) -> str:
    network = ipaddress.ip_network(cidr)
    span = min(network.num_addresses - 2, 60000)
    return str(network.network_address + 1 + rng.randrange(max(1, span)))


def _sample_counter(counter, rng: random.Random) -> str:
    if not counter:
        return MISSING
    values = sorted(counter)
    weights = [counter[v] for v in values]
    return rng.choices(values, weights=weights, k=1)[0]


def _popular_values(view: HistoryView, feature: str, k: int) -> list[str]:
    counts = view.global_values(feature)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [value for value, _ in ranked[:k] if value != MISSING]


def _modal_user_value(view: HistoryView, user: str, feature: str) -> str | None:
    counts = view.user_values(user, feature)
    if not counts:
        return None
    return max(sorted(counts), key=lambda v: counts[v])


def _attack_ts(view: HistoryView, rng: random.Random) -> int:
    last = view.events[-1].timestamp if view.events else 1
    return last + rng.randrange(3600, 7 * 86400)


def _ua_family(features: dict[str, str]) -> tuple[str, str]:
    """Coarse (browser, os) family of an enriched event's user agent."""
    browser = features.get(cat.F_UA_BROWSER, MISSING).split(" ")[0]
    os_name = features.get(cat.F_UA_OS, MISSING).split(" ")[0]
    return browser, os_name


class _Dist:
    """Sorted categorical distribution with O(log n) weighted sampling."""

    __slots__ = ("values", "cum")

    def __init__(self, counter):
        self.values = sorted(counter)
        self.cum = []
        total = 0
        for value in self.values:
            total += counter[value]
            self.cum.append(total)

    def sample(self, rng: random.Random) -> str:
        if not self.values:
            return MISSING
        return rng.choices(self.values, cum_weights=self.cum, k=1)[0]


class AttackSampler:
    """Attack generator over one immutable view, with shared caches.

    Per-region value distributions are merged once; a targeted attacker's
    sampling pool for a victim is the region distribution minus the
    victim's own counts, so no value pair that exists only in the victim's
    history can ever be drawn.
    """

    def __init__(self, view: HistoryView, pool: list[PoolEntry], *,
                 catalog: FeatureCatalog | None = None,
                 lookup: PrefixTable | None = None, popular_k: int = 10):
        self.view = view
        self.pool = list(pool)
        self.catalog = catalog or builtin_catalog()
        self.lookup = lookup
        self.popular_uas = _popular_values(view, cat.F_UA, popular_k)
        self._users = sorted(view.users())
        self._modal_region = {u: _modal_user_value(view, u, cat.F_IP_REGION)
                              for u in self._users}
        self._modal_country = {u: _modal_user_value(view, u, cat.F_IP_COUNTRY)
                               for u in self._users}
        self._pool_by_country: dict[str | None, list[PoolEntry]] = {}
        for entry in self.pool:
            self._pool_by_country.setdefault(entry.country, []).append(entry)
        self._sampled_features = RAW_FEATURES + (cat.F_WEEKDAY_HOUR,)
        # Event-level counts keyed by the login's own region: the targeted
        # attacker operates from inside the victim's location, so values
        # observed elsewhere (e.g. peers travelling) are out of reach.
        # UA strings are additionally bucketed by browser/OS family, since
        # the targeted attacker knows the victim's user agents and picks
        # other users' strings from the same families.
        self._regional_counts: dict[str, dict[str, Counter]] = {}
        self._user_regional: dict[tuple[str, str], dict[str, Counter]] = {}
        self._regional_ua_family: dict[str, dict[tuple[str, str], Counter]] = {}
        self._user_families: dict[str, set[tuple[str, str]]] = {}
        for event in view.events:
            if not event.is_legitimate:
                continue
            region = event.features.get(cat.F_IP_REGION, MISSING)
            shared = self._regional_counts.setdefault(
                region, {f: Counter() for f in self._sampled_features})
            mine = self._user_regional.setdefault(
                (region, event.user),
                {f: Counter() for f in self._sampled_features})
            for feature in self._sampled_features:
                value = event.features.get(feature, MISSING)
                shared[feature][value] += 1
                mine[feature][value] += 1
            family = _ua_family(event.features)
            ua = event.features.get(cat.F_UA, MISSING)
            if ua != MISSING:
                self._regional_ua_family.setdefault(region, {}) \
                    .setdefault(family, Counter())[ua] += 1
            self._user_families.setdefault(event.user, set()).add(family)
        self._global_dists = {
            feature: _Dist(view.global_values(feature))
            for feature in (cat.F_COOKIE, cat.F_CLIENT_FP,
                            cat.F_RTT_MEASUREMENTS)}
        self._victim_dists: dict[str, dict[str, _Dist]] = {}

    def sample(self, model: str, victim: str, rng: random.Random) -> LoginEvent:
        if model not in ATTACKER_MODELS:
            raise ValueError(f"unknown attacker model {model!r}")
        if model == "targeted":
            event = self._targeted(victim, rng)
        else:
            event = self._pool_based(model, victim, rng)
        return enrich_event(event, self.catalog, self.lookup)

    def _pool_based(self, model: str, victim: str,
                    rng: random.Random) -> LoginEvent:
        if not self.pool:
            raise ValueError("attacker pool must be non-empty")
        if model == "vpn":
            country = self._modal_country.get(victim) or \
                _modal_user_value(self.view, victim, cat.F_IP_COUNTRY)
            entries = self._pool_by_country.get(country, [])
            if not entries:
                raise NoPoolEntryForCountry(str(country))
        else:
            entries = self.pool
        features = {
            cat.F_IP: _host_in(rng.choice(entries).cidr, rng),
            cat.F_UA: rng.choice(self.popular_uas) if self.popular_uas
            else MISSING,
        }
        for feature in (cat.F_COOKIE, cat.F_CLIENT_FP,
                        cat.F_RTT_MEASUREMENTS):
            features[feature] = self._global_dists[feature].sample(rng)
        return LoginEvent(user=victim, timestamp=_attack_ts(self.view, rng),
                          features=features, label=attack_label(model))

    def _targeted(self, victim: str, rng: random.Random) -> LoginEvent:
        view = self.view
        if view.user_count < 2:
            raise ValueError(
                "targeted attacks need at least two users in view")
        pools = self._victim_dists.get(victim)
        if pools is None:
            pools = self._build_victim_dists(victim)
            self._victim_dists[victim] = pools

        features = {f: pools[f].sample(rng) for f in RAW_FEATURES}
        ts = _attack_ts(view, rng)
        token = pools[cat.F_WEEKDAY_HOUR].sample(rng)
        if token != MISSING:
            weekday, hour = int(token) // 100, int(token) % 100
            moment = datetime.fromtimestamp(ts, tz=timezone.utc)
            moment += timedelta(days=(weekday - moment.weekday()) % 7)
            moment = moment.replace(hour=hour, minute=rng.randrange(60),
                                    second=rng.randrange(60))
            ts = int(moment.timestamp())
        return LoginEvent(user=victim, timestamp=ts, features=features,
                          label=attack_label("targeted"))

    def _build_victim_dists(self, victim: str) -> dict[str, _Dist]:
        """In-region value distributions excluding the victim's own logins."""
        region = self._modal_region.get(victim) or \
            _modal_user_value(self.view, victim, cat.F_IP_REGION)
        region_counts = self._regional_counts.get(region)
        own = self._user_regional.get((region, victim))
        pools: dict[str, _Dist] = {}
        for feature in self._sampled_features:
            merged = Counter() if region_counts is None \
                else region_counts[feature].copy()
            if own is not None:
                merged.subtract(own[feature])
                merged = +merged  # drop zero and negative entries
            if not merged:
                # no regional peers: fall back to everyone but the victim
                merged = self.view.global_values(feature).copy()
                merged.subtract(self.view.user_values(victim, feature))
                merged = +merged
            pools[feature] = _Dist(merged)

        family_pool = Counter()
        for family in self._user_families.get(victim, set()):
            family_pool.update(
                self._regional_ua_family.get(region, {}).get(family, ()))
        if own is not None:
            family_pool.subtract(own[cat.F_UA])
            family_pool = +family_pool
        if family_pool:
            pools[cat.F_UA] = _Dist(family_pool)
        return pools


def sample_attack(model: str, victim: str, view: HistoryView,
                  pool: list[PoolEntry], rng: random.Random, *,
                  catalog: FeatureCatalog | None = None,
                  lookup: PrefixTable | None = None,
                  popular_k: int = 10) -> LoginEvent:
    """One attack login against the victim, labeled with the model tag.

    naive: any pool IP, popular UA, everything else from the global
    distribution. vpn: pool IP restricted to the victim's modal country.
    targeted: every feature value sampled from other users in the victim's
    region, including habitual login times. The view is never mutated.
    """
    sampler = AttackSampler(view, pool, catalog=catalog, lookup=lookup,
                            popular_k=popular_k)
    return sampler.sample(model, victim, rng)


def sample_attacks(view: HistoryView, pool: list[PoolEntry], *,
                   models=ATTACKER_MODELS, attacks_per_user: int = 25,
                   seed: int, catalog: FeatureCatalog | None = None,
                   lookup: PrefixTable | None = None) -> dict[str, list[LoginEvent]]:
    """Batch of attacks per model, deterministic under the seed."""
    rng = random.Random(seed)
    sampler = AttackSampler(view, pool, catalog=catalog, lookup=lookup)
    victims = sorted(view.users())
    out: dict[str, list[LoginEvent]] = {}
    for model in models:
        out[model] = [sampler.sample(model, victim, rng)
                      for victim in victims
                      for _ in range(attacks_per_user)]
    return out
