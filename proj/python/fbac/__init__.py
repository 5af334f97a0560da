"""Function-based access control: tensor policies, projections, atomic documents, guarded functions."""

from ._fbac import (
    AccessTensor,
    FbacError,
    Monitor,
    Principal,
    canonical_serialize,
    compile_lattice,
    decimal_at_most,
    import_plain_text,
    normalize_adoc,
    parse_policy,
    project,
    questionnaire_defaults,
    regex_full_match,
    serialize_policy,
    validate_adoc,
)

__all__ = [
    "AccessTensor",
    "FbacError",
    "Monitor",
    "Principal",
    "canonical_serialize",
    "compile_lattice",
    "decimal_at_most",
    "import_plain_text",
    "normalize_adoc",
    "parse_policy",
    "project",
    "questionnaire_defaults",
    "regex_full_match",
    "serialize_policy",
    "validate_adoc",
]
