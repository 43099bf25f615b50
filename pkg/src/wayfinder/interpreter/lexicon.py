"""Signage keyword lexicon and text classification.

The keyword table ships as a data file (one `keyword<TAB>class` per line)
rather than code so new languages mean a new file, not a release. Matching
is exact after casefold+strip, with a one-typo tolerance at reduced
confidence.
"""

from __future__ import annotations

from enum import Enum
from importlib import resources
from pathlib import Path

from wayfinder.errors import ConfigError

CONFIDENCE_EXACT = 1.0
CONFIDENCE_NEAR = 0.7  # edit distance 1


class SignClass(Enum):
    EXIT_DOOR = "EXIT_DOOR"
    STAIRS = "STAIRS"
    ELEVATOR = "ELEVATOR"
    RESTROOM = "RESTROOM"
    DOOR = "DOOR"
    OBSTACLE = "OBSTACLE"
    UNKNOWN_SIGN = "UNKNOWN_SIGN"


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def parse_lexicon(raw: str, source: str = "lexicon") -> dict[str, SignClass]:
    """Keyword -> class, keywords casefolded; preserves file order.

    Blank lines and lines starting with '#' are skipped. A keyword mapped
    twice, an empty keyword, or an unknown class name is a ConfigError.
    """
    table: dict[str, SignClass] = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "\t" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected keyword<TAB>class")
        keyword, _, class_name = stripped.partition("\t")
        keyword = keyword.strip().casefold()
        class_name = class_name.strip()
        if not keyword:
            raise ConfigError(f"{source}:{lineno}: empty keyword")
        try:
            sign_class = SignClass(class_name)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: unknown class {class_name!r}") from None
        if keyword in table:
            raise ConfigError(f"{source}:{lineno}: duplicate keyword {keyword!r}")
        table[keyword] = sign_class
    return table


def load_lexicon(path: str | Path | None = None) -> dict[str, SignClass]:
    """Load a lexicon file, or the packaged default when no path is given."""
    if path is None:
        raw = (
            resources.files("wayfinder.interpreter")
            .joinpath("data/lexicon.tsv")
            .read_text(encoding="utf-8")
        )
        return parse_lexicon(raw, source="builtin lexicon")
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"lexicon {path}: {exc}") from exc
    return parse_lexicon(raw, source=str(path))


def classify_signage(
    text: str, lexicon: dict[str, SignClass]
) -> tuple[SignClass, float]:
    """Map sign text to a class with a confidence.

    Exact (casefolded, trimmed) lexicon hit -> 1.0; a single-typo hit
    (edit distance 1) -> 0.7, first matching lexicon entry wins; anything
    else -> (UNKNOWN_SIGN, 0.0).
    """
    needle = text.casefold().strip()
    if not needle:
        return (SignClass.UNKNOWN_SIGN, 0.0)
    hit = lexicon.get(needle)
    if hit is not None:
        return (hit, CONFIDENCE_EXACT)
    for keyword, sign_class in lexicon.items():
        if abs(len(keyword) - len(needle)) <= 1 and levenshtein(needle, keyword) == 1:
            return (sign_class, CONFIDENCE_NEAR)
    return (SignClass.UNKNOWN_SIGN, 0.0)
