"""Operator-authored drawing spec files (JSON).

Single draw:

    {
      "did": "123.456-7#0",
      "info": "judge assignment",
      "stakeholders": [{"name": "defense", "public_key": "<b64url>"}, ...],
      "candidates": ["judge-a", "judge-b"]        // uniform
      // or "weights": {"judge-a": "1/6", ...}    // fractions, or decimals
    }

Chains put the shared "stakeholders" at top level and one object per draw
under "draws".  Fraction strings ("1/6") and decimal strings ("0.25") pick
the construction; one style per list.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from . import crypto
from .errors import FormatError, SpecError
from .model import DrawList, DrawSpec, StakeholderId, parse_draw_id
from .weights import CandidateId, from_decimal, from_fractions, uniform_list
from .wire import unb64


def _parse_stakeholders(items) -> tuple[tuple[StakeholderId, ...], dict[bytes, bytes]]:
    keys: dict[bytes, bytes] = {}
    roster = []
    for item in items:
        pk = unb64(item["public_key"])
        fp = crypto.fingerprint(pk)
        roster.append(StakeholderId(fp, item.get("name", "")))
        keys[fp] = pk
    roster.sort(key=lambda s: s.fingerprint)
    return tuple(roster), keys


def _parse_eligible(obj: dict):
    if "candidates" in obj and "weights" in obj:
        raise SpecError("give either 'candidates' or 'weights', not both")
    if "candidates" in obj:
        return uniform_list([CandidateId(c) for c in obj["candidates"]])
    if "weights" not in obj:
        raise SpecError("draw needs a 'candidates' or 'weights' field")
    weights = obj["weights"]
    values = [str(v) for v in weights.values()]
    fractional = ["/" in v for v in values]
    if all(fractional):
        return from_fractions(
            [(CandidateId(c), Fraction(str(v))) for c, v in weights.items()]
        )
    if any(fractional):
        raise SpecError("mixed fraction and decimal weights in one list")
    return from_decimal([(CandidateId(c), str(v)) for c, v in weights.items()])


def _parse_draw(obj: dict, roster) -> DrawSpec:
    return DrawSpec(
        did=parse_draw_id(obj["did"]),
        stakeholders=roster,
        eligible=_parse_eligible(obj),
        info=obj.get("info", "") or "",
    )


def parse_spec_file(path) -> tuple[DrawSpec | DrawList, dict[bytes, bytes]]:
    """Returns the draw spec (single draw or chain) and the stakeholder key map."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc.msg}", offset=exc.pos) from exc
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        roster, keys = _parse_stakeholders(obj["stakeholders"])
        if "draws" in obj:
            draws = sorted(
                (_parse_draw(d, roster) for d in obj["draws"]),
                key=lambda s: s.did.render_lenient(),
            )
            return DrawList(tuple(draws)), keys
        return _parse_draw(obj, roster), keys
    except (SpecError, FormatError):
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed spec file: {exc}") from exc
