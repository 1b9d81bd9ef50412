"""Minimal pattern-based user agent parser.

Covers the browser and OS families that dominate real login traffic
(Safari, Chrome, Firefox, Edge; Windows, macOS, Linux, iOS, Android) plus
a binary mobile/desktop device type. Datasets may instead ship
pre-extracted subfeature columns, which always take precedence over this
parser.
"""

from __future__ import annotations

import re
from functools import lru_cache

_EDGE = re.compile(r"(?:Edge|Edg|EdgiOS|EdgA)/(\d+)")
_FIREFOX = re.compile(r"(?:Firefox|FxiOS)/(\d+)")
_CHROME = re.compile(r"(?:Chrome|CriOS)/(\d+)")
_SAFARI_VERSION = re.compile(r"Version/(\d+)")
_WINDOWS_NT = re.compile(r"Windows NT (\d+(?:\.\d+)?)")
_MACOS = re.compile(r"Mac OS X (\d+)[_.](\d+)")
_IOS = re.compile(r"(?:iPhone|CPU) OS (\d+)[_.](\d+)")
_ANDROID = re.compile(r"Android (\d+)")

_WINDOWS_NAMES = {
    "10.0": "Windows 10",
    "6.3": "Windows 8.1",
    "6.2": "Windows 8",
    "6.1": "Windows 7",
}


@lru_cache(maxsize=4096)
def parse_user_agent(ua: str) -> tuple[str, str, str]:
    """Parse a UA string into (browser, os, device type).

    Browser and OS include the major version where one is present,
    e.g. ``("Chrome 91", "Windows 10", "desktop")``. Unknown families
    degrade to ``"Other"`` rather than failing.
    """
    browser = _parse_browser(ua)
    os_name = _parse_os(ua)
    device = _parse_device(ua)
    return browser, os_name, device


def _parse_browser(ua: str) -> str:
    m = _EDGE.search(ua)
    if m:
        return f"Edge {m.group(1)}"
    m = _FIREFOX.search(ua)
    if m:
        return f"Firefox {m.group(1)}"
    m = _CHROME.search(ua)
    if m:
        return f"Chrome {m.group(1)}"
    if "Safari" in ua:
        m = _SAFARI_VERSION.search(ua)
        return f"Safari {m.group(1)}" if m else "Safari"
    return "Other"


def _parse_os(ua: str) -> str:
    m = _IOS.search(ua)
    if m and ("iPhone" in ua or "iPad" in ua):
        return f"iOS {m.group(1)}.{m.group(2)}"
    m = _ANDROID.search(ua)
    if m:
        return f"Android {m.group(1)}"
    m = _WINDOWS_NT.search(ua)
    if m:
        return _WINDOWS_NAMES.get(m.group(1), "Windows")
    m = _MACOS.search(ua)
    if m:
        return f"macOS {m.group(1)}.{m.group(2)}"
    if "Macintosh" in ua:
        return "macOS"
    if "Linux" in ua or "X11" in ua:
        return "Linux"
    return "Other"


def _parse_device(ua: str) -> str:
    if "iPhone" in ua or "iPad" in ua or "Mobile" in ua or "Android" in ua:
        return "mobile"
    return "desktop"
