"""Uniform sampling of the distribution hyperspace with rejection.

Points are drawn uniformly from the (k-1)-simplex (normalized independent
unit-rate exponentials) and kept only when they satisfy every compiled
constraint. Second-order distributions are then histograms of a query
probability over the accepted points.

Equality constraints would make naive rejection hopeless: the acceptance band
around a point prior has measure ~ tol_eq. Two exact reductions fix the
common cases before any rejection happens, both justified by the aggregation
property of the uniform simplex distribution (grouped coordinates of a
uniform simplex point follow a scaled uniform simplex law within each group):

  * zero-forcing: a linear equality with all-same-sign coefficients and zero
    right-hand side pins its constituents to 0 (covers Pr(event) = 0 and
    conditionals with p in {0, 1});
  * block-mass splits: Pr(event) = p fixes the event's constituent block to
    total mass p and its complement to 1 - p, each drawn as a scaled simplex.

Whatever does not match those patterns stays in the system and is accepted
through the tolerance band, with a note so the cost is visible to the user.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import BoundsBox
from .canonical import ROLE_AXIOM, ConstraintSystem, Tolerances, satisfied_batch
from .model import Network, index_set, joint_indices
from .statements import ProbTerm

DEFAULT_N_TARGET = 10_000
DEFAULT_MAX_DRAWS = 10_000_000
DEFAULT_BINS = 50
_CHUNK = 4096
_MASS_EPS = 1e-12
_FEAS_EPS = 1e-9


class InfeasiblePlanError(ValueError):
    """Equality reduction derived a contradiction; the system has no solution."""


class AllUndefinedError(ArithmeticError):
    """Every accepted sample left the conditional query undefined."""


@dataclass(frozen=True)
class SamplingPlan:
    k: int
    zero_forced: tuple[int, ...]
    blocks: tuple[tuple[tuple[int, ...], float], ...]
    notes: tuple[str, ...]

    @property
    def is_identity(self) -> bool:
        return not self.zero_forced and len(self.blocks) == 1


def identity_plan(k: int) -> SamplingPlan:
    return SamplingPlan(k, (), ((tuple(range(k)), 1.0),), ())


@dataclass(frozen=True)
class SampleSet:
    samples: np.ndarray
    draws_total: int
    seed: int
    acceptance_rate: float
    reduction_notes: tuple[str, ...]
    budget_exhausted: bool = False

    @property
    def n(self) -> int:
        return int(self.samples.shape[0])


@dataclass(frozen=True)
class SecondOrderDistribution:
    query: ProbTerm
    bin_count: int
    counts: np.ndarray
    densities: np.ndarray
    bin_edges: np.ndarray
    mean: float
    sample_sd: float
    defined_count: int
    undefined_count: int


def draw_simplex(k: int, rng: np.random.Generator) -> np.ndarray:
    """One point uniform on the (k-1)-simplex."""
    if k < 2:
        raise ValueError("need k >= 2")
    e = rng.standard_exponential(k)
    return e / e.sum()


def reduce_equalities(system: ConstraintSystem, table=None) -> SamplingPlan:
    """Build the sampling plan: zero-forcing fixpoint, then block splits in
    statement order, then a final zero-forcing pass over what remains."""
    k = system.k
    zero: set[int] = set()
    notes: list[str] = []

    items = []
    for c in system.constraints:
        if c.relation != "=" or c.provenance.role == ROLE_AXIOM or c.degree > 1:
            continue
        parts = c.lhs.linear_parts()
        coefs, const = parts
        items.append(
            {"coefs": coefs, "rhs": c.rhs - const, "label": c.provenance.label, "absorbed": False}
        )

    def force_pass() -> bool:
        changed = False
        for it in items:
            if it["absorbed"]:
                continue
            active = {i: v for i, v in it["coefs"].items() if i not in zero}
            if not active:
                if abs(it["rhs"]) > _FEAS_EPS:
                    raise InfeasiblePlanError(
                        f"equality `{it['label']}` reduces to 0 = {it['rhs']:g}"
                    )
                it["absorbed"] = True
                changed = True
                continue
            vals = list(active.values())
            if abs(it["rhs"]) <= _MASS_EPS and (
                all(v > 0 for v in vals) or all(v < 0 for v in vals)
            ):
                zero.update(active)
                it["absorbed"] = True
                notes.append(f"zero-forced {len(active)} constituents from `{it['label']}`")
                changed = True
        return changed

    while force_pass():
        pass

    blocks: list[tuple[set[int], float]] = [(set(range(k)) - zero, 1.0)]

    for it in items:
        if it["absorbed"]:
            continue
        active = {i: v for i, v in it["coefs"].items() if i not in zero}
        vals = list(active.values())
        c0 = vals[0]
        if c0 <= 0 or any(abs(v - c0) > _MASS_EPS for v in vals):
            continue
        mass = it["rhs"] / c0
        if mass < -_FEAS_EPS or mass > 1.0 + _FEAS_EPS:
            raise InfeasiblePlanError(
                f"`{it['label']}` asks a constituent block for mass {mass:g}"
            )
        want = set(active)
        home = next((b for b, (members, _) in enumerate(blocks) if want <= members), None)
        if home is None:
            notes.append(f"`{it['label']}` spans sampling blocks; tolerance-band acceptance")
            continue
        members, bmass = blocks[home]
        if want == members:
            if abs(mass - bmass) > _FEAS_EPS:
                raise InfeasiblePlanError(
                    f"`{it['label']}` assigns mass {mass:g} to a block already fixed at {bmass:g}"
                )
            it["absorbed"] = True
            continue
        if mass > bmass + _FEAS_EPS:
            raise InfeasiblePlanError(
                f"`{it['label']}` asks for mass {mass:g} inside a block holding {bmass:g}"
            )
        rest = members - want
        rest_mass = bmass - mass
        replacement: list[tuple[set[int], float]] = []
        if mass <= _MASS_EPS:
            zero.update(want)
            notes.append(f"zero-forced {len(want)} constituents from `{it['label']}`")
        else:
            replacement.append((want, mass))
        if rest_mass <= _MASS_EPS:
            zero.update(rest)
            notes.append(f"zero-forced complement ({len(rest)}) of `{it['label']}`")
        else:
            replacement.append((rest, rest_mass))
        blocks[home : home + 1] = replacement
        it["absorbed"] = True
        notes.append(f"block split from `{it['label']}` (mass {mass:g})")

    while force_pass():
        pass

    final_blocks: list[tuple[tuple[int, ...], float]] = []
    for members, mass in blocks:
        members = members - zero
        if not members:
            if mass > _FEAS_EPS:
                raise InfeasiblePlanError(
                    f"zero-forcing emptied a block that must carry mass {mass:g}"
                )
            continue
        final_blocks.append((tuple(sorted(members)), mass))

    for it in items:
        if not it["absorbed"]:
            notes.append(
                f"equality `{it['label']}` not reducible exactly; tolerance-band acceptance"
            )

    return SamplingPlan(k, tuple(sorted(zero)), tuple(final_blocks), tuple(notes))


def _draw_batch(plan: SamplingPlan, m: int, rng: np.random.Generator) -> np.ndarray:
    X = np.zeros((m, plan.k))
    for members, mass in plan.blocks:
        idx = np.asarray(members, dtype=np.int64)
        e = rng.standard_exponential((m, idx.size))
        X[:, idx] = (e / e.sum(axis=1, keepdims=True)) * mass
    return X


def run_rejection(
    system: ConstraintSystem,
    plan: SamplingPlan,
    n_target: int = DEFAULT_N_TARGET,
    max_draws: int = DEFAULT_MAX_DRAWS,
    seed: int = 0,
    box: BoundsBox | None = None,
    tolerances: Tolerances | None = None,
) -> SampleSet:
    """Draw, quick-reject against the box, evaluate every constraint, keep.

    Deterministic for a given seed: draws happen in fixed-size chunks and
    draws_total counts up to the draw that produced the final acceptance.
    """
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    if max_draws < n_target:
        raise ValueError("max_draws must be >= n_target")
    tol = tolerances or Tolerances()
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    n_acc = 0
    draws = 0
    while n_acc < n_target and draws < max_draws:
        m = min(_CHUNK, max_draws - draws)
        X = _draw_batch(plan, m, rng)
        ok = np.ones(m, dtype=bool)
        if box is not None:
            ok &= box.contains_batch(X)
        for c in system.constraints:
            if not ok.any():
                break
            ok &= satisfied_batch(c, X, tol)
        hits = np.nonzero(ok)[0]
        if n_acc + hits.size >= n_target:
            need = n_target - n_acc
            kept.append(X[hits[:need]])
            n_acc = n_target
            draws += int(hits[need - 1]) + 1
            break
        kept.append(X[hits])
        n_acc += int(hits.size)
        draws += m
    samples = np.vstack(kept) if kept else np.zeros((0, plan.k))
    return SampleSet(
        samples=samples,
        draws_total=draws,
        seed=seed,
        acceptance_rate=(n_acc / draws) if draws else 0.0,
        reduction_notes=plan.notes,
        budget_exhausted=n_acc < n_target,
    )


def query_values(
    samples: np.ndarray, network: Network, query: ProbTerm
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample query values and the defined mask (always true for priors)."""
    if query.event2 is None:
        idx = index_set(network, query.event1)
        vals = samples[:, idx].sum(axis=1)
        return vals, np.ones(samples.shape[0], dtype=bool)
    den_idx = index_set(network, query.event2)
    num_idx = joint_indices(network, query.event1, query.event2)
    den = samples[:, den_idx].sum(axis=1)
    num = samples[:, num_idx].sum(axis=1)
    defined = den != 0.0
    vals = np.zeros(samples.shape[0])
    vals[defined] = num[defined] / den[defined]
    return vals, defined


def second_order(
    sampleset: SampleSet,
    network: Network,
    query: ProbTerm,
    bin_count: int = DEFAULT_BINS,
) -> SecondOrderDistribution:
    """Histogram of the query probability over the accepted samples.

    Samples where a conditional query is undefined are counted, not imputed.
    """
    if sampleset.n == 0:
        raise ValueError("sample set is empty")
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    vals, defined = query_values(sampleset.samples, network, query)
    defined_count = int(defined.sum())
    if defined_count == 0:
        raise AllUndefinedError("conditioning event has probability zero in every sample")
    vals = np.clip(vals[defined], 0.0, 1.0)
    counts, edges = np.histogram(vals, bins=bin_count, range=(0.0, 1.0))
    densities = counts / defined_count
    mean = float(vals.mean())
    sd = float(vals.std(ddof=1)) if defined_count > 1 else 0.0
    return SecondOrderDistribution(
        query=query,
        bin_count=bin_count,
        counts=counts,
        densities=densities,
        bin_edges=edges,
        mean=mean,
        sample_sd=sd,
        defined_count=defined_count,
        undefined_count=int(sampleset.n - defined_count),
    )


def expected_value(sampleset: SampleSet, network: Network, query: ProbTerm) -> float:
    """Mean of the query over the defined accepted samples."""
    if sampleset.n == 0:
        raise ValueError("sample set is empty")
    vals, defined = query_values(sampleset.samples, network, query)
    if not defined.any():
        raise AllUndefinedError("conditioning event has probability zero in every sample")
    return float(np.clip(vals[defined], 0.0, 1.0).mean())
