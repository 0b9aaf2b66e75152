"""Input validation helpers shared by the model, engine and solver layers.

These mirror the ``check_*`` helpers of scikit-learn: each one either returns
a cleaned-up version of its input or raises ``ValueError`` with a message that
names the offending value.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

INPUT_TOL = 1e-12
DERIVED_TOL = 1e-9


class InvalidModelError(ValueError):
    """Raised when an operation requires a valid model and gets an invalid one."""

    def __init__(self, issues: Sequence[str]):
        self.issues = tuple(issues)
        super().__init__("invalid model: " + "; ".join(self.issues))


class UnreachableObservationError(ValueError):
    """Raised when conditioning on an observation of probability zero."""


class EnumerationCapError(RuntimeError):
    """Raised when a pure-strategy enumeration would exceed the configured cap."""

    def __init__(self, what: str, count: int, cap: int):
        self.what = what
        self.count = count
        self.cap = cap
        super().__init__(f"{what} enumeration would produce {count}, cap is {cap}")


def check_door(door, n_doors: int) -> int:
    """Return ``door`` as an int, checking it lies in ``1..n_doors``."""
    if isinstance(door, bool) or not isinstance(door, (int, np.integer)):
        raise ValueError(f"door must be an integer, got {door!r}")
    door = int(door)
    if not 1 <= door <= n_doors:
        raise ValueError(f"door {door} outside 1..{n_doors}")
    return door


def check_door_set(doors: Iterable[int], n_doors: int, size: int | None = None) -> tuple[int, ...]:
    """Canonicalize a set of doors to a sorted tuple, checking range, duplicates and size."""
    if isinstance(doors, (int, np.integer)):
        doors = (doors,)
    out = tuple(sorted(check_door(d, n_doors) for d in doors))
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate doors in {out}")
    if size is not None and len(out) != size:
        raise ValueError(f"expected {size} doors, got {len(out)}: {out}")
    return out


def distribution_issues(weights: Sequence[float], name: str, tol: float = INPUT_TOL) -> list[str]:
    """List problems with a probability vector (empty list when it is a distribution)."""
    issues = []
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        return [f"{name}: expected a non-empty vector"]
    if not np.all(np.isfinite(w)):
        issues.append(f"{name}: non-finite weight")
        return issues
    if np.any(w < 0):
        bad = [i + 1 for i in np.flatnonzero(w < 0)]
        issues.append(f"{name}: negative weight at door(s) {bad}")
    total = math.fsum(w)
    if abs(total - 1.0) > tol:
        issues.append(f"{name}: normalization error, weights sum to {total:.12g}")
    return issues


def check_probability_vector(weights, name: str = "weights", tol: float = INPUT_TOL) -> np.ndarray:
    """Return ``weights`` as a float array, raising if it is not a distribution."""
    issues = distribution_issues(weights, name, tol)
    if issues:
        raise ValueError("; ".join(issues))
    return np.asarray(weights, dtype=float)


def check_payoff_matrix(A) -> np.ndarray:
    """Return a finite, non-empty 2-D float array."""
    A = np.asarray(getattr(A, "entries", A), dtype=float)
    if A.ndim != 2 or 0 in A.shape:
        raise ValueError(f"payoff matrix must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("payoff matrix contains non-finite entries")
    return A


def check_unit_interval(x: float, name: str) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return x
