"""Built-in systems and the line-oriented system file format.

File format (``#`` starts a comment)::

    X = ( <expr> , <expr> )
    Y = ( <expr> , <expr> )
    f = <expr>
    domain = <xmin> <xmax> <ymin> <ymax>    # optional
"""
from __future__ import annotations

import re
from functools import lru_cache
from pathlib import Path

from . import expr as ex
from .filippov import FilippovSystem, PlanarField, SystemError_

# (X, Y, f, domain)
BUILTINS: dict[str, tuple[tuple[str, str], tuple[str, str], str, tuple[float, float, float, float]]] = {
    # Y carries the sign correction 2x - 4x^3 (see README): it reproduces the
    # integral curves y = x^4/2 - x^2/2 + k and the escaping/sliding layout.
    "paper-ex1": (("1", "-2*x"), ("-2", "2*x - 4*x^3"), "y", (-3.0, 3.0, -3.0, 3.0)),
    "paper-ex1-printed": (("1", "-2*x"), ("-2", "4*x^3 - 2*x"), "y", (-3.0, 3.0, -3.0, 3.0)),
    # both folds at the origin invisible; y-damping makes both half-return maps contract
    "ssing-demo": (("1", "-2*x - y/10"), ("-1", "-x - y/10"), "y", (-3.0, 3.0, -3.0, 3.0)),
    # same field on both sides, unit-circle limit cycle crossing Sigma at (+-1, 0)
    "crossing-cycle": (
        ("-y + x*(1 - x^2 - y^2)", "x + y*(1 - x^2 - y^2)"),
        ("-y + x*(1 - x^2 - y^2)", "x + y*(1 - x^2 - y^2)"),
        "y", (-3.0, 3.0, -3.0, 3.0)),
    # escaping point at the origin: X spirals to a focus at (0, 1), Y to a
    # limit cycle of radius 1 about (0, -1.5), sliding settles on a pseudo-equilibrium
    "forked-demo": (
        ("-(y - 1) - 0.2*x", "x - 0.2*(y - 1)"),
        ("-(y + 1.5) + 0.2*x*(1 - x^2 - (y + 1.5)^2)", "x + 0.2*(y + 1.5)*(1 - x^2 - (y + 1.5)^2)"),
        "y", (-4.0, 4.0, -4.0, 4.0)),
    # linear sink, Sigma = {y = 2} never reached from the first quadrant below it
    "smooth-sink": (("-x", "-y"), ("-x", "-y"), "y - 2", (-5.0, 5.0, -5.0, 5.0)),
}


@lru_cache(maxsize=None)
def builtin(name: str) -> FilippovSystem:
    try:
        (x1, x2), (y1, y2), f, domain = BUILTINS[name]
    except KeyError:
        raise SystemError_(f"unknown built-in system {name!r}; known: {', '.join(sorted(BUILTINS))}") from None
    return FilippovSystem(PlanarField.parse(x1, x2), PlanarField.parse(y1, y2), ex.fold(ex.parse(f)),
                          domain, name=name)


_FIELD = re.compile(r"^\((.*)\)$", re.S)


def _split_pair(text: str, lineno: int) -> tuple[str, str]:
    m = _FIELD.match(text.strip())
    if not m:
        raise SystemError_(f"line {lineno}: expected '( <expr> , <expr> )'")
    inner = m.group(1)
    depth = 0
    for i, c in enumerate(inner):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif c == "," and depth == 0:
            return inner[:i], inner[i + 1:]
    raise SystemError_(f"line {lineno}: missing ',' between field components")


def parse_system(text: str, name: str = "") -> FilippovSystem:
    parts: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemError_(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in parts:
            raise SystemError_(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in ("X", "Y"):
                a, b = _split_pair(value, lineno)
                parts[key] = PlanarField.parse(a, b)
            elif key == "f":
                parts[key] = ex.fold(ex.parse(value))
            elif key == "domain":
                nums = [float(v) for v in value.split()]
                if len(nums) != 4:
                    raise SystemError_(f"line {lineno}: domain needs 4 numbers")
                parts[key] = tuple(nums)
            else:
                raise SystemError_(f"line {lineno}: unknown key {key!r}")
        except ex.ParseError as err:
            raise SystemError_(f"line {lineno}: {err}") from err
        except ValueError as err:
            raise SystemError_(f"line {lineno}: {err}") from err
    missing = [k for k in ("X", "Y", "f") if k not in parts]
    if missing:
        raise SystemError_(f"missing definitions: {', '.join(missing)}")
    domain = parts.get("domain", (-5.0, 5.0, -5.0, 5.0))
    return FilippovSystem(parts["X"], parts["Y"], parts["f"], domain, name=name)


def load_system(source: str) -> FilippovSystem:
    """A built-in name or a path to a system file."""
    if source in BUILTINS:
        return builtin(source)
    path = Path(source)
    if not path.is_file():
        raise SystemError_(f"{source!r} is neither a built-in system nor a readable file")
    return parse_system(path.read_text(encoding="utf-8"), name=path.stem)
