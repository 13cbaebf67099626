"""Random expression trees and systems shared by the property tests."""
import math
import random

from nsvf import expr as ex
from nsvf.filippov import FilippovSystem, PlanarField

LEAVES = ("x", "y", "c")


def random_tree(rng: random.Random, depth: int = 6) -> ex.Expr:
    if depth <= 1 or rng.random() < 0.25:
        pick = rng.choice(LEAVES)
        if pick == "c":
            return ex.Const(float(rng.choice([-3, -2, -1, 0.5, 1, 2, 3, 1.5])))
        return ex.Var(pick)
    kind = rng.random()
    if kind < 0.45:
        op = rng.choice("+-*/")
        return ex.BinOp(op, random_tree(rng, depth - 1), random_tree(rng, depth - 1))
    if kind < 0.6:
        return ex.Neg(random_tree(rng, depth - 1))
    if kind < 0.8:
        return ex.Pow(random_tree(rng, depth - 1), rng.randint(0, 4))
    return ex.Func(rng.choice(ex.FUNCTIONS), random_tree(rng, depth - 1))


def safe_eval(e, x, y):
    try:
        v = ex.evaluate(e, x, y)
    except ex.EvaluationError:
        return None
    return v if math.isfinite(v) else None


def random_polynomial(rng: random.Random, degree: int = 3) -> str:
    terms = []
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            c = round(rng.uniform(-2, 2), 3)
            if c:
                terms.append(f"({c})*x^{i}*y^{j}")
    return " + ".join(terms) or "0"


def random_system(rng: random.Random) -> FilippovSystem:
    X = PlanarField.parse(random_polynomial(rng, 2), random_polynomial(rng, 3))
    Y = PlanarField.parse(random_polynomial(rng, 2), random_polynomial(rng, 3))
    return FilippovSystem(X, Y, ex.parse("y"), (-2.0, 2.0, -2.0, 2.0))


# the CLI invocations named as acceptance commands; "{tmp}" is replaced by a scratch directory
CLI_ACCEPTANCE_COMMANDS = [
    ["classify", "paper-ex1", "--xrange", "-1", "1", "--json", "{tmp}/classify.json"],
    ["integrate", "paper-ex1", "--x0", "-1", "--y0", "0", "--tmax", "9", "--policy", "prefer-y",
     "--out", "{tmp}/t.csv"],
    ["limitset", "crossing-cycle", "--x0", "0.1", "--y0", "0.1", "--tmax", "200", "--out", "{tmp}/ls.json"],
    ["minimal-check", "paper-ex1", "--region", "Lambda", "--samples", "6", "--out", "{tmp}/min.json"],
    ["portrait", "paper-ex1", "--out", "{tmp}/p.svg", "--grid", "4"],
]


def run_cli(args, tmp):
    """Run ``python -m nsvf`` in a fresh process; returns (exit code, stdout bytes, {file name: bytes})."""
    import subprocess
    import sys
    from pathlib import Path

    argv = [a.replace("{tmp}", str(tmp)) for a in args]
    proc = subprocess.run([sys.executable, "-m", "nsvf", *argv], capture_output=True, timeout=300)
    files = {p.name: p.read_bytes() for p in sorted(Path(tmp).iterdir()) if p.is_file()}
    return proc.returncode, proc.stdout, files
