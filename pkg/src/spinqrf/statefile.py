"""Branch-state file format: parsing, validation, and byte-stable serialization.

Numbers are written with 17 significant digits in lowercase scientific
notation so serialized states are bit-stable across runs.  Angles in files are
radians.  The schema:

    {
      "j": "infinite" | <number>,
      "perspective": "C",
      "branches": [
        {"amp": [re, im],
         "frame": [9 reals, row-major f1 f2 f3],
         "system": {"form": "label", "n": [x, y, z], "m": m, "s": s}
                 | {"form": "vector", "s": s, "amps": [[re, im], ...]}}
      ]
    }
"""
from __future__ import annotations

import json
import math

import numpy as np

from .frames import Frame
from .qrf import Branch, BranchState, SystemB
from .spincore import Spin

AMP_NORM_TOL = 1e-6


class StateFileError(ValueError):
    """Malformed or inconsistent state file content."""


def fmt_float(x: float) -> str:
    """17 significant digits, lowercase scientific notation, -0.0 normalized."""
    value = float(x) + 0.0
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite value {value}")
    return format(value, ".16e")


class _Raw(str):
    """Marker for pre-formatted numeric tokens in the JSON writer."""


def _num(x) -> _Raw:
    return _Raw(fmt_float(x))


def dumps(obj) -> str:
    """Serialize nested dict/list structures with fixed float formatting."""
    out: list[str] = []
    _write(obj, out, 0)
    out.append("\n")
    return "".join(out)


def _write(obj, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if isinstance(obj, _Raw):
        out.append(str(obj))
    elif isinstance(obj, bool) or obj is None:
        out.append("true" if obj is True else "false" if obj is False else "null")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for k, v in items[:-1]:
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _write(v, out, indent + 1)
            out.append(",\n")
        k, v = items[-1]
        out.append(f"{pad}  {json.dumps(str(k))}: ")
        _write(v, out, indent + 1)
        out.append(f"\n{pad}}}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        seq = list(obj)
        simple = not any(isinstance(v, (dict, list, tuple)) for v in seq)
        if simple:
            out.append("[")
            out.append(", ".join(_scalar_token(v) for v in seq))
            out.append("]")
        else:
            out.append("[\n")
            for v in seq[:-1]:
                out.append(f"{pad}  ")
                _write(v, out, indent + 1)
                out.append(",\n")
            out.append(f"{pad}  ")
            _write(seq[-1], out, indent + 1)
            out.append(f"\n{pad}]")
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def _scalar_token(v) -> str:
    if isinstance(v, _Raw):
        return str(v)
    if isinstance(v, bool) or v is None:
        return "true" if v is True else "false" if v is False else "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize scalar {type(v)}")


def state_to_dict(state: BranchState, j="infinite") -> dict:
    """Schema dict for a branch state; `j` is a number or the marker string."""
    branches = []
    for br in state.branches:
        frame_flat = [
            _num(x) for vec in br.frame.vectors() for x in vec
        ]
        sys_b = br.system
        if sys_b.is_label:
            system = {
                "form": "label",
                "n": [_num(x) for x in sys_b.n],
                "m": _num(sys_b.m),
                "s": _num(sys_b.spin.j),
            }
        else:
            system = {
                "form": "vector",
                "s": _num(sys_b.spin.j),
                "amps": [[_num(a.real), _num(a.imag)] for a in sys_b.amps],
            }
        branches.append(
            {
                "amp": [_num(br.amplitude.real), _num(br.amplitude.imag)],
                "frame": frame_flat,
                "system": system,
            }
        )
    j_field = "infinite" if j == "infinite" else _num(float(j))
    return {"j": j_field, "perspective": state.perspective_label, "branches": branches}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise StateFileError(message)


def _floats(seq, count: int, what: str) -> list[float]:
    _require(isinstance(seq, (list, tuple)) and len(seq) == count,
             f"{what} must be a list of {count} numbers")
    try:
        return [float(x) for x in seq]
    except (TypeError, ValueError):
        raise StateFileError(f"{what} contains a non-numeric entry") from None


def state_from_dict(data: dict, warn=None) -> tuple[BranchState, object]:
    """Parse and validate a schema dict.

    Returns the branch state and the j field ("infinite" or a float).  Branch
    weights off unity by more than the tolerance are renormalized, reported
    through `warn` if given.
    """
    _require(isinstance(data, dict), "state file root must be an object")
    _require("branches" in data, "state file missing 'branches'")
    j_field = data.get("j", "infinite")
    if j_field != "infinite":
        try:
            j_field = float(j_field)
        except (TypeError, ValueError):
            raise StateFileError("'j' must be a number or the string 'infinite'") from None
    perspective = data.get("perspective", "C")
    _require(isinstance(perspective, str), "'perspective' must be a string")

    raw_branches = data["branches"]
    _require(isinstance(raw_branches, list) and raw_branches, "'branches' must be a non-empty list")
    branches = []
    for idx, raw in enumerate(raw_branches):
        where = f"branch {idx}"
        _require(isinstance(raw, dict), f"{where}: must be an object")
        for key in ("amp", "frame", "system"):
            _require(key in raw, f"{where}: missing '{key}'")
        re_im = _floats(raw["amp"], 2, f"{where}: 'amp'")
        amp = complex(re_im[0], re_im[1])
        frame_vals = _floats(raw["frame"], 9, f"{where}: 'frame'")
        try:
            frame = Frame.from_rows(np.array(frame_vals).reshape(3, 3))
        except ValueError as exc:
            raise StateFileError(f"{where}: {exc}") from None
        system = raw["system"]
        _require(isinstance(system, dict), f"{where}: 'system' must be an object")
        form = system.get("form")
        try:
            if form == "label":
                n = _floats(system.get("n"), 3, f"{where}: system 'n'")
                spin = Spin.coerce(float(system["s"]))
                sys_b = SystemB.label(np.array(n), float(system["m"]), spin)
            elif form == "vector":
                spin = Spin.coerce(float(system["s"]))
                raw_amps = system.get("amps")
                _require(isinstance(raw_amps, list) and len(raw_amps) == spin.dim,
                         f"{where}: system 'amps' must list {spin.dim} complex pairs")
                amps = np.array(
                    [complex(*_floats(pair, 2, f"{where}: system amplitude")) for pair in raw_amps]
                )
                norm = np.linalg.norm(amps)
                _require(abs(norm - 1.0) <= AMP_NORM_TOL or norm > 0.0,
                         f"{where}: zero-norm vector state")
                if abs(norm - 1.0) > AMP_NORM_TOL and warn is not None:
                    warn(f"{where}: vector state norm {norm:.8g} renormalized")
                sys_b = SystemB.vector(amps / norm, spin)
            else:
                raise StateFileError(f"{where}: system 'form' must be 'label' or 'vector'")
        except StateFileError:
            raise
        except (KeyError, TypeError) as exc:
            raise StateFileError(f"{where}: system field missing or malformed ({exc})") from None
        except ValueError as exc:
            raise StateFileError(f"{where}: {exc}") from None
        branches.append(Branch(amp, frame, sys_b))

    state = BranchState(tuple(branches), perspective)
    nsq = state.norm_squared()
    _require(nsq > 0.0, "branch weights are all zero")
    if abs(math.sqrt(nsq) - 1.0) > AMP_NORM_TOL:
        if warn is not None:
            warn(f"branch weights sum to {nsq:.8g}; renormalizing")
        scale = 1.0 / math.sqrt(nsq)
        state = BranchState(
            tuple(Branch(b.amplitude * scale, b.frame, b.system) for b in branches),
            perspective,
        )
    return state, j_field


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"invalid JSON: {exc}") from None


def read_state(path) -> tuple[BranchState, object]:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_dict(loads(fh.read()))


def write_state(path, state: BranchState, j="infinite", extra: dict | None = None) -> None:
    doc = state_to_dict(state, j)
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
