"""Script header generation from the layers a case exposes.

Users never write ``load`` statements themselves; the service derives them
from the case so scripts cannot name arbitrary files.
"""
from __future__ import annotations

import re

_INVALID_CHAR = re.compile(r"[^A-Za-z0-9_]")


def sanitize_identifier(name: str) -> str:
    ident = _INVALID_CHAR.sub("_", name)
    if not ident or ident[0].isdigit():
        ident = "_" + ident
    return ident


def generate_header(case_layers: list[tuple[str, str]]) -> str:
    """One ``load`` line per layer, in layer-name order, then a blank line.

    Layer names are sanitized into identifiers; collisions get ``_2``,
    ``_3``, ... suffixes in order.
    """
    if not case_layers:
        return ""
    lines = []
    used: dict[str, int] = {}
    for name, path in sorted(case_layers, key=lambda pair: pair[0]):
        ident = sanitize_identifier(name)
        count = used.get(ident, 0) + 1
        used[ident] = count
        if count > 1:
            ident = f"{ident}_{count}"
        lines.append(f'load {ident} = "{path}"')
    return "\n".join(lines) + "\n\n"
