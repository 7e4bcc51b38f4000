"""LP pre-processing: sound per-constituent bounds from the linear subset.

The linear constraints (axioms included) carve a closed polytope out of the
simplex. Minimizing and maximizing each coordinate over that polytope gives
per-constituent intervals that every feasible distribution must respect.
The bounds are sound by construction (dropping the nonlinear constraints only
enlarges the feasible set) but need not be tight.

Strict inequalities enter the LP as closures; a separate probe maximizes each
strict left-hand side to catch constraints that the closed polytope touches
only at equality, where the strict version is unsatisfiable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .canonical import Constraint, ConstraintSystem

FEAS_TOL = 1e-9


class LpFailureError(RuntimeError):
    """The LP solver did not converge."""


@dataclass
class LinearSubset:
    """Degree <= 1 constraints split into closures and strict originals."""

    closed: list[Constraint]
    strict: list[Constraint]


@dataclass
class BoundsBox:
    lo: np.ndarray
    hi: np.ndarray

    def contains(self, x: np.ndarray, margin: float = FEAS_TOL) -> bool:
        return bool(np.all(x >= self.lo - margin) and np.all(x <= self.hi + margin))

    def contains_batch(self, X: np.ndarray, margin: float = FEAS_TOL) -> np.ndarray:
        return np.all((X >= self.lo - margin) & (X <= self.hi + margin), axis=1)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo


@dataclass
class BoundsResult:
    feasible: bool
    box: BoundsBox | None
    violated_strict: list[Constraint]
    linear: LinearSubset


def extract_linear(system: ConstraintSystem) -> LinearSubset:
    """Collect the degree <= 1 constraints; relax strict ones to closures,
    keeping the strict originals for the positivity probe."""
    closed: list[Constraint] = []
    strict: list[Constraint] = []
    for c in system.constraints:
        if c.degree > 1:
            continue
        if c.strict:
            strict.append(c)
            closed.append(replace(c, relation=">="))
        else:
            closed.append(c)
    return LinearSubset(closed=closed, strict=strict)


def _dense_row(c: Constraint, k: int) -> tuple[np.ndarray, float]:
    parts = c.lhs.linear_parts()
    if parts is None:
        raise ValueError("constraint is not linear")
    coefs, const = parts
    row = np.zeros(k)
    for i, v in coefs.items():
        row[i] = v
    return row, c.rhs - const


def _lp_arrays(constraints: list[Constraint], k: int):
    eq_rows, eq_rhs, ub_rows, ub_rhs = [], [], [], []
    for c in constraints:
        row, rhs = _dense_row(c, k)
        if c.relation == "=":
            eq_rows.append(row)
            eq_rhs.append(rhs)
        else:
            # lhs >= rhs stored as -lhs <= -rhs
            ub_rows.append(-row)
            ub_rhs.append(-rhs)
    A_eq = np.array(eq_rows) if eq_rows else None
    b_eq = np.array(eq_rhs) if eq_rhs else None
    A_ub = np.array(ub_rows) if ub_rows else None
    b_ub = np.array(ub_rhs) if ub_rhs else None
    return A_eq, b_eq, A_ub, b_ub


def _solve(c_vec, arrays):
    A_eq, b_eq, A_ub, b_ub = arrays
    res = linprog(
        c_vec,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0.0, 1.0),
        method="highs",
    )
    if res.status == 2:
        return None
    if res.status != 0:
        raise LpFailureError(f"LP solve failed: {res.message}")
    return res


def solve_bounds(linear: LinearSubset, k: int) -> BoundsBox | None:
    """2k LP solves: min and max of each coordinate over the closed polytope.

    Returns None when the polytope is empty.
    """
    arrays = _lp_arrays(linear.closed, k)
    lo = np.zeros(k)
    hi = np.ones(k)
    for i in range(k):
        c_vec = np.zeros(k)
        c_vec[i] = 1.0
        res = _solve(c_vec, arrays)
        if res is None:
            return None
        lo[i] = res.fun
        c_vec[i] = -1.0
        res = _solve(c_vec, arrays)
        if res is None:
            return None
        hi[i] = -res.fun
    np.clip(lo, 0.0, 1.0, out=lo)
    np.clip(hi, 0.0, 1.0, out=hi)
    # tiny solver noise must not produce inverted intervals
    lo = np.minimum(lo, hi)
    return BoundsBox(lo=lo, hi=hi)


def probe_strict(strict: list[Constraint], closed: list[Constraint], k: int) -> list[Constraint]:
    """Maximize each strict lhs over the closed polytope; a maximum at or
    below the rhs means the strict constraint cannot be satisfied there."""
    arrays = _lp_arrays(closed, k)
    violated = []
    for c in strict:
        row, rhs = _dense_row(c, k)
        res = _solve(-row, arrays)
        if res is None:
            raise LpFailureError("strict probe needs a feasible polytope")
        if -res.fun <= rhs + FEAS_TOL:
            violated.append(c)
    return violated


def preprocess(system: ConstraintSystem) -> BoundsResult:
    """extract_linear + solve_bounds + probe_strict in one pass."""
    linear = extract_linear(system)
    box = solve_bounds(linear, system.k)
    if box is None:
        return BoundsResult(False, None, [], linear)
    violated = probe_strict(linear.strict, linear.closed, system.k)
    return BoundsResult(not violated, box, violated, linear)
