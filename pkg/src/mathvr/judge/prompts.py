"""Prompt template loading and placeholder substitution.

Templates are shipped as verbatim text assets containing ``{placeholder}``
spans. Only declared placeholders are substituted; every other byte of the
template, including its many literal braces, must reach the judge unchanged.
That property is what the template-fidelity tests pin down.
"""

from __future__ import annotations

import hashlib
import re
from importlib import resources

META_TEMPLATE = "meta_extraction.prompt"
GRADING_TEMPLATE = "grading.prompt"

META_PLACEHOLDERS = ("idd", "question")
GRADING_PLACEHOLDERS = (
    "question",
    "question_id",
    "model_response",
    "correct_answer",
    "max_score",
    "scoring_points",
    "point_values",
)


def load_template(name: str) -> str:
    return resources.files("mathvr.judge").joinpath("assets", name).read_text(encoding="utf-8")


def template_sha(template: str) -> str:
    return hashlib.sha256(template.encode("utf-8")).hexdigest()


def fill_template(template: str, values: dict[str, str], declared: tuple[str, ...]) -> str:
    """Substitute exactly the declared placeholders, nothing else."""
    unknown = set(values) - set(declared)
    if unknown:
        raise KeyError(f"undeclared placeholders: {sorted(unknown)}")
    out = template
    for key in declared:
        token = "{" + key + "}"
        if token not in out:
            raise KeyError(f"template lacks placeholder {token}")
        out = out.replace(token, str(values[key]))
    return out


def literal_segments(template: str, declared: tuple[str, ...]) -> list[str]:
    """The template split around its placeholder spans.

    A filled prompt is faithful iff these segments occur in order, abutting
    only substituted spans. Used by fidelity checks.
    """
    pattern = "|".join(re.escape("{" + key + "}") for key in declared)
    return re.split(pattern, template)


def is_faithful_fill(template: str, filled: str, declared: tuple[str, ...]) -> bool:
    """True iff ``filled`` equals the template outside placeholder spans.

    Equivalent to matching the template as a regex whose placeholder spans
    are wildcards; backtracking copes with substituted values that happen to
    contain template text.
    """
    segments = literal_segments(template, declared)
    pattern = "(?s)^" + "(.*?)".join(re.escape(seg) for seg in segments) + "$"
    return re.match(pattern, filled) is not None
