import hashlib
import json

from marshmallow import ValidationError

SCHEMA_VERSION = 1


def load_document(path, kind=None):
    """
    Read a versioned LLPM JSON document.

    Raises:
        OSError: the file cannot be read
        marshmallow.ValidationError: not JSON, unknown major version or wrong kind
    """
    with open(path) as stream:
        try:
            document = json.load(stream)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: not valid JSON ({e})") from e
    check_header(document, kind)
    return document


def check_header(document, kind=None):
    if not isinstance(document, dict):
        raise ValidationError("Document must be a JSON object.")
    version = document.get("llpm_schema")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"Unsupported llpm_schema {version!r}; this version reads {SCHEMA_VERSION}.", "llpm_schema")
    if kind is not None and document.get("kind", kind) != kind:
        raise ValidationError(f"Expected a '{kind}' document, got '{document.get('kind')}'.", "kind")


def canonical_json(document):
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


def hash_int_from_string(input_string):
    return int.from_bytes(hashlib.sha256(input_string.encode()).digest()[:4], "little")


def checksum(document):
    """First four bytes of SHA-256 over the canonical JSON form, as an int."""
    return hash_int_from_string(canonical_json(document))
