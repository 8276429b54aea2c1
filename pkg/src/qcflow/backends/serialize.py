"""Circuit files: a JSON object with one command per line.

::

    {"version": 1, "qubits": 2, "commands": [
    {"gate": "H", "params": [], "targets": [0], "controls": [], "tags": []},
    {"gate": "X", "params": [], "targets": [1], "controls": [0], "tags": ["compute"]}
    ]}

Optional per-command keys: ``"inverse": true`` for inverted QFT/composites and
``"classical_controls": [...]``. Loop tags are written as
``{"loop": count, "id": ident}``.
"""
from __future__ import annotations

import json

from ..errors import ParseError, QcflowError
from ..ir import COMPUTE, UNCOMPUTE, Command, Gate, Loop

VERSION = 1


def _tag_to_json(t):
    if t.kind == "loop":
        return {"loop": t.count, "id": t.ident}
    return t.kind


def command_to_dict(c: Command) -> dict:
    d = {"gate": c.gate.name, "params": list(c.gate.params), "targets": list(c.targets),
         "controls": list(c.controls), "tags": [_tag_to_json(t) for t in c.tags]}
    if c.gate.inverse:
        d["inverse"] = True
    if c.cbits:
        d["classical_controls"] = list(c.cbits)
    return d


def _tag_from_json(v):
    if v == "compute":
        return COMPUTE
    if v == "uncompute":
        return UNCOMPUTE
    if isinstance(v, dict) and set(v) <= {"loop", "id"} and isinstance(v.get("loop"), int):
        return Loop(v["loop"], int(v.get("id", 0)))
    raise ValueError(f"bad tag {v!r}")


def _int_list(v, key):
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ValueError(f"{key!r} must be a list of integers")
    return tuple(v)


def command_from_dict(d) -> Command:
    if not isinstance(d, dict):
        raise ValueError("command must be an object")
    unknown = set(d) - {"gate", "params", "targets", "controls", "tags", "inverse", "classical_controls"}
    if unknown:
        raise ValueError(f"unknown keys {sorted(unknown)}")
    name = d.get("gate")
    if not isinstance(name, str):
        raise ValueError("missing gate name")
    params = d.get("params", [])
    if not isinstance(params, list) or not all(isinstance(p, (int, float)) for p in params):
        raise ValueError("params must be a list of numbers")
    gate = Gate(name, tuple(params), bool(d.get("inverse", False)))
    return Command(gate, _int_list(d.get("targets"), "targets"), _int_list(d.get("controls", []), "controls"),
                   tuple(_tag_from_json(t) for t in d.get("tags", [])),
                   _int_list(d.get("classical_controls", []), "classical_controls"))


def serialize(cmds, qubits: int | None = None) -> str:
    cmds = list(cmds)
    if qubits is None:
        qubits = len({q for c in cmds for q in c.targets + c.controls + c.cbits})
    lines = [json.dumps({"version": VERSION, "qubits": qubits})[:-1] + ', "commands": [']
    body = [json.dumps(command_to_dict(c)) for c in cmds]
    if body:
        lines.append(",\n".join(body))
    lines.append("]}")
    return "\n".join(lines) + "\n"


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _element_offsets(text: str) -> list[int]:
    """Start offsets of the elements of the top-level "commands" array."""
    dec = json.JSONDecoder()
    key = text.find('"commands"')
    pos = text.find("[", key) + 1
    out = []
    n = len(text)
    while pos < n:
        while pos < n and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= n or text[pos] == "]":
            break
        out.append(pos)
        _, pos = dec.raw_decode(text, pos)
    return out


def deserialize(text: str) -> tuple[list[Command], int]:
    """Parse a circuit file; returns ``(commands, qubits)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1, 1)
    if doc.get("version") != VERSION:
        raise ParseError(f"unsupported version {doc.get('version')!r}", 1, 1)
    qubits = doc.get("qubits")
    if not isinstance(qubits, int) or qubits < 0:
        raise ParseError("'qubits' must be a non-negative integer", 1, 1)
    raw = doc.get("commands")
    if not isinstance(raw, list):
        raise ParseError("'commands' must be a list", 1, 1)
    cmds = []
    for i, d in enumerate(raw):
        try:
            cmds.append(command_from_dict(d))
        except (ValueError, QcflowError) as e:
            offs = _element_offsets(text)
            line, col = _line_col(text, offs[i]) if i < len(offs) else (1, 1)
            raise ParseError(f"command {i}: {e}", line, col) from None
    return cmds, qubits


def save(path, cmds, qubits=None) -> None:
    with open(path, "w") as f:
        f.write(serialize(cmds, qubits))


def load(path) -> tuple[list[Command], int]:
    with open(path) as f:
        return deserialize(f.read())
