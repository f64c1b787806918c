"""
Claims, labels and descriptors
==============================

A claim is a headline with an optional source domain and publish date.
Dataset labels from several rating scales collapse onto real or fake.
"""

from factagent import NewsClaim, normalize_label, parse_publish_date, render_descriptor
from factagent.claims import DateParseError

# loose inputs: full URLs are reduced to the host, dates accept two layouts
claim = NewsClaim.create(
    "Riverdale Set to Recast a Major Character Ahead of Season 2",
    url="https://www.tvline.com/2017/04/25/riverdale-recast",
    date="2017-04-25",
)
print(claim.domain_url, claim.publish_date, claim.claim_id)

# this line is what every prompt sees
print(render_descriptor(claim))

# a claim without domain or date simply drops those segments
print(render_descriptor(NewsClaim.create("Shark swims down flooded highway")))

# rating scales from different fact-checkers
for raw in ["true", "Mostly True", "half_true", "barely-true", "pants on fire", "fake"]:
    print(f"{raw!r:18} -> {normalize_label(raw)}")

# bad dates point at the offending field
try:
    parse_publish_date("04/31/2017")
except DateParseError as exc:
    print(exc)
