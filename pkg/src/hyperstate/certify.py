"""Certification of hyperentanglement and of slice-window independence.

A state is hyperentangled when every subsystem is maximally correlated with
its complement.  For pure states that reduces to a cyclicity check per single
factor: the reduced density operator on the complement must have full
numerical rank (equivalently, the slice family must be linearly independent).
Checking each atomic factor against its complement suffices; larger splits
follow.

Finite equal-dimension bipartite states can genuinely pass.  For more than
two factors only infinite-dimensional states can, so finite n > 2 states are
gated out by dimensions alone unless they are flagged as truncations, in
which case window certificates on slice families are the meaningful check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bilinear import RankReport, numerical_rank, rank_tolerance, reduced_density
from .state import MultiIndex, StateTensor, Subsystem, slice_family

__all__ = [
    "Feasibility",
    "CyclicityResult",
    "CertVerdict",
    "Window",
    "WindowCertificate",
    "dimension_gate",
    "cyclicity_test",
    "hyperentanglement_test",
    "window_certificate",
    "cube_window",
]

HYPERENTANGLED = "hyperentangled"
NOT_HYPERENTANGLED = "not_hyperentangled"
INFEASIBLE_DIMS = "infeasible_dims"


@dataclass(frozen=True)
class Feasibility:
    """Whether dimensions alone permit hyperentanglement."""

    feasible: bool
    reason: str  # "ok" | "unequal_dims" | "finite_dims_n_gt_2"


def dimension_gate(dims: Sequence[int], truncated_from_infinite: bool = False) -> Feasibility:
    """Pure dimension check, no tensor data needed.

    Equal factor dimensions are necessary.  With more than two factors a
    finite common dimension is ruled out as well, unless the state is a
    declared truncation of an infinite-dimensional construction.
    """
    dims_t = tuple(int(d) for d in dims)
    if len(dims_t) < 2 or any(d < 2 for d in dims_t):
        raise ValueError(f"invalid dims {dims_t}: need >= 2 factors, each of dim >= 2")
    if len(set(dims_t)) != 1:
        return Feasibility(False, "unequal_dims")
    if len(dims_t) > 2 and not truncated_from_infinite:
        return Feasibility(False, "finite_dims_n_gt_2")
    return Feasibility(True, "ok")


@dataclass(frozen=True)
class CyclicityResult:
    """Outcome of one cyclicity check of ``v`` for a subsystem S.

    ``passed`` means the reduced density operator on the complement S' has
    full numerical rank ``full_dim``; on failure ``witness`` holds a unit
    eigenvector of that operator with eigenvalue <= the threshold, i.e. a
    direction on S' the state almost annihilates.
    """

    subsystem: Subsystem
    passed: bool
    min_eigenvalue: float
    rank: int
    full_dim: int
    threshold: float
    witness: np.ndarray | None


def cyclicity_test(
    v: StateTensor,
    subsystem: Subsystem | int | Iterable[int],
    tol: float | None = None,
) -> CyclicityResult:
    """Test whether ``v`` is cyclic for ``subsystem``.

    ``tol`` is a cutoff on density eigenvalues (squared Schmidt weights);
    ``None`` uses the default policy scaled to the largest eigenvalue.
    """
    part = Subsystem.coerce(subsystem)
    part.validate_for(v.nfactors)
    comp = part.complement(v.nfactors)
    rho = reduced_density(v, comp)
    eig = rho.eigenvalues  # nonincreasing
    full_dim = eig.size
    lam_max = max(float(eig[0]), 0.0) if full_dim else 0.0
    threshold = rank_tolerance(full_dim, lam_max) if tol is None else float(tol)
    rank = int(np.count_nonzero(eig > threshold))
    passed = rank == full_dim
    witness = None
    if not passed:
        _, vecs = np.linalg.eigh(rho.matrix)
        witness = vecs[:, 0].copy()  # eigenvector of the smallest eigenvalue
        witness.flags.writeable = False
    return CyclicityResult(
        subsystem=part,
        passed=passed,
        min_eigenvalue=float(eig[-1]),
        rank=rank,
        full_dim=full_dim,
        threshold=threshold,
        witness=witness,
    )


@dataclass(frozen=True)
class CertVerdict:
    """Full certification outcome.

    ``overall`` is ``hyperentangled``, ``not_hyperentangled`` (feasible
    dimensions, some factor fails cyclicity) or ``infeasible_dims``.  All
    atomic subsystems are always evaluated so the diagnostics are complete
    even when the dimension gate already decides the verdict.
    """

    overall: str
    feasibility: Feasibility
    checks: tuple[CyclicityResult, ...]

    @property
    def failing(self) -> tuple[int, ...]:
        return tuple(c.subsystem.indices[0] for c in self.checks if not c.passed)


def hyperentanglement_test(v: StateTensor, tol: float | None = None) -> CertVerdict:
    """Certify ``v``: dimension gate plus a cyclicity check per factor."""
    feas = dimension_gate(v.dims, v.truncated_from_infinite)
    checks = tuple(
        cyclicity_test(v, Subsystem((k,)), tol) for k in range(v.nfactors)
    )
    if not feas.feasible:
        overall = INFEASIBLE_DIMS
    elif all(c.passed for c in checks):
        overall = HYPERENTANGLED
    else:
        overall = NOT_HYPERENTANGLED
    return CertVerdict(overall=overall, feasibility=feas, checks=checks)


@dataclass(frozen=True)
class Window:
    """A finite set of slice keys along one axis.

    ``axis`` names the factor whose space the slice vectors live in, and
    ``members`` lists multi-indices over the complementary factors.
    """

    axis: int
    members: tuple[MultiIndex, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("window needs at least one member")
        members = tuple(tuple(int(k) for k in j) for j in self.members)
        if len(set(members)) != len(members):
            raise ValueError("window members must be distinct")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "axis", int(self.axis))


@dataclass(frozen=True)
class WindowCertificate:
    """Rank certificate for the slice vectors selected by a window."""

    window: Window
    size: int
    rank: int
    passed: bool
    report: RankReport


def window_certificate(
    v: StateTensor, window: Window, tol: float | None = None
) -> WindowCertificate:
    """Pass iff the selected slice vectors have numerical rank ``len(members)``.

    Works directly on the sparse entries, so it applies to truncated
    constructions far beyond the dense cap.  ``tol`` cuts singular values.
    """
    fam = slice_family(v, (window.axis,))
    for j in window.members:
        if len(j) != len(fam.complement_dims) or any(
            k < 0 or k >= d for k, d in zip(j, fam.complement_dims)
        ):
            raise ValueError(
                f"window member {j} out of range for complement dims {fam.complement_dims}"
            )
    mat = fam.matrix(window.members)
    report = numerical_rank(mat, tol)
    size = len(window.members)
    return WindowCertificate(
        window=window,
        size=size,
        rank=report.rank,
        passed=report.rank == size,
        report=report,
    )


def cube_window(dims: Sequence[int], axis: int, size: int) -> Window:
    """The window of all slice keys with every coordinate below ``size``."""
    dims_t = tuple(int(d) for d in dims)
    if axis < 0 or axis >= len(dims_t):
        raise ValueError(f"axis {axis} out of range for dims {dims_t}")
    comp_dims = tuple(d for k, d in enumerate(dims_t) if k != axis)
    if size < 1:
        raise ValueError("window size must be >= 1")
    if any(size > d for d in comp_dims):
        raise ValueError(f"window size {size} exceeds complement dims {comp_dims}")
    members = tuple(itertools.product(range(size), repeat=len(comp_dims)))
    return Window(axis=axis, members=members)
