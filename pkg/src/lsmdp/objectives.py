"""Benchmark objectives over fixed-length bit strings, plus a DIMACS CNF loader.

A candidate solution is a plain int in [0, 2**n).  Bit b (least significant
bit = bit 0) holds CNF variable b+1; written-out bit strings use ordinary
binary notation, most significant bit first.  All objectives are maximized
and all of them are total, deterministic, and immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

MAX_BITS = 63  # states are stored as unsigned 64-bit integers


@dataclass(frozen=True)
class Objective:
    """Total, deterministic function from n-bit states to real values."""

    n: int
    fn: Callable[[int], float]
    name: str
    known_optimum: float | None = None

    def __call__(self, state: int) -> float:
        return self.fn(state)


def _check_bits(n: int) -> None:
    if not isinstance(n, int) or not 1 <= n <= MAX_BITS:
        raise ValueError(f"bit length must be an int in [1, {MAX_BITS}], got {n!r}")


def make_onemax(n: int) -> Objective:
    """Count of one-bits; maximum n at the all-ones string."""
    _check_bits(n)
    return Objective(n, lambda x: float(x.bit_count()), f"onemax:n={n}", float(n))


def make_leading_ones(n: int) -> Objective:
    """Length of the run of ones starting at the most significant bit."""
    _check_bits(n)

    def fn(x: int) -> float:
        run = 0
        for b in range(n - 1, -1, -1):
            if not (x >> b) & 1:
                break
            run += 1
        return float(run)

    return Objective(n, fn, f"leading_ones:n={n}", float(n))


def make_trap(n: int, k: int) -> Objective:
    """Concatenated deceptive traps over k-bit blocks.

    A block with u one-bits scores k-1-u, except the all-ones block which
    scores k, so the gradient points away from the global optimum.
    """
    _check_bits(n)
    if not isinstance(k, int) or not 1 <= k <= n or n % k != 0:
        raise ValueError(f"trap block size k={k!r} must divide n={n}")
    block_mask = (1 << k) - 1

    def fn(x: int) -> float:
        total = 0
        for lo in range(0, n, k):
            u = ((x >> lo) & block_mask).bit_count()
            total += k if u == k else k - 1 - u
        return float(total)

    return Objective(n, fn, f"trap:n={n},k={k}", float(n))


def make_nk_landscape(n: int, k: int, seed: int) -> Objective:
    """Rugged landscape: bit i contributes through a lookup table over itself
    and its k circular successors; the n tables of size 2**(k+1) are drawn
    once from the seed and cached on the objective."""
    _check_bits(n)
    if not isinstance(k, int) or not 0 <= k <= n - 1:
        raise ValueError(f"epistasis k={k!r} must lie in [0, n-1] for n={n}")
    tables = np.random.default_rng(seed).random((n, 1 << (k + 1)))

    def fn(x: int) -> float:
        total = 0.0
        for i in range(n):
            idx = 0
            for j in range(k + 1):
                idx |= ((x >> ((i + j) % n)) & 1) << j
            total += tables[i, idx]
        return float(total)

    return Objective(n, fn, f"nk:n={n},k={k},seed={seed}", None)


class DimacsParseError(ValueError):
    """Malformed DIMACS input; `line` is the 1-based offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class CnfInstance:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not isinstance(self.num_vars, int) or self.num_vars < 1:
            raise ValueError(f"num_vars must be a positive int, got {self.num_vars!r}")
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty clause")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")


def load_dimacs(path) -> CnfInstance:
    """Parse DIMACS CNF text: `c` comment lines, a `p cnf <vars> <clauses>`
    header, then whitespace-separated signed literals with every clause
    terminated by 0 (clauses may span lines)."""
    header: tuple[int, int] | None = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    lineno = 0
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text or text.startswith("c"):
                continue
            if text.startswith("p"):
                if header is not None:
                    raise DimacsParseError("duplicate problem header", lineno)
                parts = text.split()
                if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                    raise DimacsParseError(
                        f"malformed header {text!r}, expected 'p cnf <vars> <clauses>'", lineno)
                try:
                    num_vars, num_clauses = int(parts[2]), int(parts[3])
                except ValueError:
                    raise DimacsParseError(f"non-integer counts in header {text!r}", lineno) from None
                if num_vars < 1 or num_clauses < 0:
                    raise DimacsParseError(f"header counts out of range in {text!r}", lineno)
                header = (num_vars, num_clauses)
                continue
            if header is None:
                raise DimacsParseError("clause data before 'p cnf' header", lineno)
            for token in text.split():
                try:
                    literal = int(token)
                except ValueError:
                    raise DimacsParseError(f"non-integer token {token!r}", lineno) from None
                if literal == 0:
                    if not current:
                        raise DimacsParseError("empty clause (bare terminating 0)", lineno)
                    clauses.append(tuple(current))
                    current.clear()
                    if len(clauses) > header[1]:
                        raise DimacsParseError(
                            f"more clauses than the declared {header[1]}", lineno)
                else:
                    if abs(literal) > header[0]:
                        raise DimacsParseError(
                            f"literal {literal} outside 1..{header[0]}", lineno)
                    current.append(literal)
    if header is None:
        raise DimacsParseError("missing 'p cnf' header", max(lineno, 1))
    if current:
        raise DimacsParseError("unterminated clause at end of file", lineno)
    if len(clauses) != header[1]:
        raise DimacsParseError(
            f"header declares {header[1]} clauses, found {len(clauses)}", max(lineno, 1))
    return CnfInstance(header[0], tuple(clauses))


def cnf_to_dimacs(instance: CnfInstance) -> str:
    """Canonical DIMACS text for `instance` (round-trips through load_dimacs)."""
    lines = [f"p cnf {instance.num_vars} {len(instance.clauses)}"]
    lines += [" ".join(str(lit) for lit in clause) + " 0" for clause in instance.clauses]
    return "\n".join(lines) + "\n"


def cnf_objective(instance: CnfInstance, name: str = "maxsat") -> Objective:
    """Number of satisfied clauses under the assignment encoded by the state."""
    _check_bits(instance.num_vars)
    clauses = instance.clauses

    def fn(x: int) -> float:
        satisfied = 0
        for clause in clauses:
            for lit in clause:
                if ((x >> (lit - 1)) & 1) if lit > 0 else not ((x >> (-lit - 1)) & 1):
                    satisfied += 1
                    break
        return float(satisfied)

    return Objective(instance.num_vars, fn, name, None)


def _descriptor_params(argstr: str, descriptor: str) -> dict[str, str]:
    params: dict[str, str] = {}
    if not argstr:
        return params
    for item in argstr.split(","):
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise ValueError(f"bad parameter {item!r} in descriptor {descriptor!r}")
        params[key] = value
    return params


def _int_param(params: dict[str, str], key: str, descriptor: str) -> int:
    try:
        return int(params[key])
    except KeyError:
        raise ValueError(f"descriptor {descriptor!r} is missing {key}=") from None
    except ValueError:
        raise ValueError(f"descriptor {descriptor!r}: {key} must be an integer") from None


def _float_param(params: dict[str, str], key: str, descriptor: str) -> float:
    try:
        return float(params[key])
    except KeyError:
        raise ValueError(f"descriptor {descriptor!r} is missing {key}=") from None
    except ValueError:
        raise ValueError(f"descriptor {descriptor!r}: {key} must be a number") from None


def parse_objective(descriptor: str) -> Objective:
    """Build an objective from a descriptor string.

    Supported forms: ``onemax:n=10``, ``leading_ones:n=8``, ``trap:n=8,k=4``,
    ``nk:n=12,k=3,seed=7`` and ``maxsat:path=instance.cnf``.
    """
    head, _, argstr = descriptor.partition(":")
    params = _descriptor_params(argstr, descriptor)
    if head == "onemax":
        return make_onemax(_int_param(params, "n", descriptor))
    if head in ("leading_ones", "leadingones"):
        return make_leading_ones(_int_param(params, "n", descriptor))
    if head == "trap":
        return make_trap(_int_param(params, "n", descriptor), _int_param(params, "k", descriptor))
    if head == "nk":
        return make_nk_landscape(_int_param(params, "n", descriptor),
                                 _int_param(params, "k", descriptor),
                                 _int_param(params, "seed", descriptor))
    if head == "maxsat":
        if "path" not in params:
            raise ValueError(f"descriptor {descriptor!r} is missing path=")
        return cnf_objective(load_dimacs(params["path"]), name=descriptor)
    raise ValueError(f"unknown objective descriptor {descriptor!r}")
