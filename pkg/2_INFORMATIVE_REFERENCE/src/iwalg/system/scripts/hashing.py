import hashlib
import json
from typing import Any, Dict


def get_deterministic_json_hash(data: Any) -> str:
    """
    Generates a SHA-256 hash of a JSON-serializable object.
    Ensures determinism by sorting keys.
    """
    # separators=(',', ':') removes whitespace to ensure compact representation
    canonical_str = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical_str.encode("utf-8")).hexdigest()


def report_digest(body: Dict[str, Any]) -> str:
    """Digest of an ordered report body; values are rendered to strings first."""
    return get_deterministic_json_hash({k: str(v) for k, v in body.items()})


def audit_entry(operation: str, inputs: Dict[str, Any], verdict: Any) -> str:
    """One JSON line for the iwalg.audit verdict trail."""
    payload = {
        "operation": operation,
        "inputs": {k: str(v) for k, v in inputs.items()},
        "verdict": str(getattr(verdict, "value", verdict)),
    }
    payload["digest"] = get_deterministic_json_hash(payload)
    return json.dumps(payload, sort_keys=True)
