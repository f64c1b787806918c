"""Claims, veracity labels and the claim descriptor text fed to every prompt."""

from __future__ import annotations

import datetime as dt
import enum
import re
import hashlib
from dataclasses import dataclass
from typing import Optional
from urllib.parse import urlsplit


class Veracity(str, enum.Enum):
    REAL = "real"
    FAKE = "fake"

    def __str__(self) -> str:
        return self.value


class Source(str, enum.Enum):
    POLITIFACT = "politifact"
    GOSSIPCOP = "gossipcop"
    SNOPES = "snopes"
    OTHER = "other"


class UnknownLabelError(ValueError):
    def __init__(self, raw: str):
        super().__init__(f"unknown veracity label: {raw!r}")
        self.raw = raw


class DateParseError(ValueError):
    def __init__(self, raw: str, position: int, reason: str):
        super().__init__(f"cannot parse date {raw!r} at position {position}: {reason}")
        self.raw = raw
        self.position = position
        self.reason = reason


_FAKE_LABELS = {"pants-fire", "pants-on-fire", "barely-true", "false", "fake"}
_REAL_LABELS = {"half-true", "mostly-true", "true", "real"}


def normalize_label(raw: str) -> Veracity:
    """Map a PolitiFact-style six-way label (or true/false/real/fake) onto the binary label space.

    Matching ignores case, surrounding whitespace, and treats ``_`` and spaces
    as hyphens, so ``"Pants_Fire"`` and ``"mostly true"`` are accepted.
    """
    if isinstance(raw, Veracity):
        return raw
    key = re.sub(r"[\s_]+", "-", str(raw).strip().lower())
    if key in _FAKE_LABELS:
        return Veracity.FAKE
    if key in _REAL_LABELS:
        return Veracity.REAL
    raise UnknownLabelError(str(raw))


_US_SHAPE = "NN/NN/NNNN"
_ISO_SHAPE = "NNNN-NN-NN"


def _shape_mismatch(raw: str, shape: str) -> int:
    for i, (ch, want) in enumerate(zip(raw, shape)):
        if want == "N" and not ch.isdigit():
            return i
        if want != "N" and ch != want:
            return i
    return min(len(raw), len(shape))


def parse_publish_date(raw: str) -> dt.date:
    """Parse ``MM/DD/YYYY`` or ``YYYY-MM-DD`` into a date.

    Raises DateParseError with the character offset of the first problem.
    """
    text = raw.strip()
    offset = len(raw) - len(raw.lstrip())
    if re.fullmatch(r"\d{2}/\d{2}/\d{4}", text):
        parts = {"month": (int(text[0:2]), 0), "day": (int(text[3:5]), 3), "year": (int(text[6:10]), 6)}
    elif re.fullmatch(r"\d{4}-\d{2}-\d{2}", text):
        parts = {"year": (int(text[0:4]), 0), "month": (int(text[5:7]), 5), "day": (int(text[8:10]), 8)}
    else:
        shape = _ISO_SHAPE if len(text) > 4 and text[4] == "-" else _US_SHAPE
        expected = "YYYY-MM-DD" if shape == _ISO_SHAPE else "MM/DD/YYYY"
        raise DateParseError(raw, offset + _shape_mismatch(text, shape), f"expected {expected}")

    month, mpos = parts["month"]
    day, dpos = parts["day"]
    year, _ = parts["year"]
    if not 1 <= month <= 12:
        raise DateParseError(raw, offset + mpos, f"month {month} out of range")
    try:
        return dt.date(year, month, day)
    except ValueError as exc:
        raise DateParseError(raw, offset + dpos, str(exc)) from None


def format_publish_date(date: dt.date) -> str:
    return f"{date.month:02d}/{date.day:02d}/{date.year:04d}"


def normalize_domain(raw: str) -> str:
    """Reduce a URL or hostname to a lower-case hostname without ``www.``."""
    text = raw.strip()
    if not text:
        raise ValueError("empty domain")
    if "://" not in text:
        text = "//" + text
    host = urlsplit(text).hostname or ""
    host = host.strip(".").lower()
    if host.startswith("www."):
        host = host[4:]
    if not host:
        raise ValueError(f"no hostname in {raw!r}")
    return host


@dataclass(frozen=True)
class NewsClaim:
    """One news item: a title plus the optional source domain and publish date."""

    title: str
    domain_url: Optional[str] = None
    publish_date: Optional[dt.date] = None
    claim_id: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.title, str) or not self.title.strip():
            raise ValueError("claim title must be non-empty")
        if self.domain_url is not None:
            if "://" in self.domain_url or "/" in self.domain_url:
                raise ValueError(f"domain_url must be a bare hostname, got {self.domain_url!r}")
            if not self.domain_url.strip():
                raise ValueError("domain_url must be non-empty when given")
        if self.publish_date is not None and not isinstance(self.publish_date, dt.date):
            raise TypeError("publish_date must be a datetime.date")
        if not self.claim_id:
            digest = hashlib.sha1(render_descriptor(self).encode("utf-8")).hexdigest()[:12]
            object.__setattr__(self, "claim_id", digest)

    @classmethod
    def create(
        cls,
        title: str,
        url: Optional[str] = None,
        date: "str | dt.date | None" = None,
        claim_id: Optional[str] = None,
    ) -> "NewsClaim":
        """Build a claim from loose inputs: full URLs are cut to their host, date strings parsed."""
        domain = normalize_domain(url) if url else None
        if isinstance(date, str):
            date = parse_publish_date(date) if date.strip() else None
        kwargs = {} if claim_id is None else {"claim_id": claim_id}
        return cls(title=title.strip(), domain_url=domain, publish_date=date, **kwargs)


def render_descriptor(claim: NewsClaim) -> str:
    parts = [f"Title: {claim.title}"]
    if claim.domain_url:
        parts.append(f"Domain URL: {claim.domain_url}")
    if claim.publish_date:
        parts.append(f"Publish Date: {format_publish_date(claim.publish_date)}")
    return ", ".join(parts)


@dataclass(frozen=True)
class DatasetRecord:
    claim: NewsClaim
    gold_label: Veracity
    source: Source = Source.OTHER
