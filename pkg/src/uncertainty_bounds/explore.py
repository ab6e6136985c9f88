"""Optimal orthogonal partners, random clouds and figure sweeps."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect

from . import pairbounds as pb
from . import triplebounds as tb
from .operators import spin_operators
from .qmcore import (
    StateVector,
    as_observable,
    as_state,
    complete_basis,
    project_complement,
    random_orthogonal_state,
)
from .statefam import Fig1Params, Fig2Params, fig1_state, fig2_state, theta_grid

__all__ = [
    "PerpChoice",
    "SweepRecord",
    "CLOUD_RELATIONS",
    "PERP_DISTRIBUTION",
    "optimal_perp_pair",
    "optimal_perp_mp",
    "optimal_perp_triple",
    "cell_rng",
    "cloud_sample",
    "curve_records",
    "figure_sweep",
    "crossing_scan",
    "fig2_crossings",
]

PERP_DISTRIBUTION = "haar-on-complement (complex Gaussian projected and normalized)"
DEGENERATE_FLAG = "already tight for all perp"


@dataclass(frozen=True)
class PerpChoice:
    """An orthogonal partner; ``degenerate`` means every partner is equally optimal."""

    state: StateVector
    degenerate: bool = False


@dataclass(frozen=True)
class SweepRecord:
    theta: float
    phi: float
    relation_id: str
    sample_index: int
    value: float
    seed: int

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite sweep value for {self.relation_id} at theta={self.theta}")
        if self.sample_index < -1:
            raise ValueError("sample_index must be >= -1")


def _normalized_partner(psi: StateVector, v: np.ndarray) -> PerpChoice:
    v = project_complement(psi, v)
    n = np.linalg.norm(v)
    if n < pb.DEGENERATE_NORM:
        return PerpChoice(complete_basis(psi).complement[0], degenerate=True)
    return PerpChoice(StateVector(v / n))


def optimal_perp_pair(a, b, psi) -> PerpChoice:
    """Partner saturating :func:`bound_new_sum`: the normalized ``(A - e^{-i alpha} B)|psi>`` on the complement."""
    a, b, psi = as_observable(a), as_observable(b), as_state(psi)
    alpha = pb.alpha_phase(pb.pair_moments(a, b, psi))
    op = a.matrix - cmath.exp(-1j * alpha) * b.matrix
    return _normalized_partner(psi, op @ psi.amplitudes)


def optimal_perp_mp(a, b, psi) -> PerpChoice:
    """Partner saturating :func:`bound_mp_sum`: ``(A - s i B)|psi>`` on the complement."""
    a, b, psi = as_observable(a), as_observable(b), as_state(psi)
    s = pb.mp_sign(pb.pair_moments(a, b, psi))
    op = a.matrix - s * 1j * b.matrix
    return _normalized_partner(psi, op @ psi.amplitudes)


def optimal_perp_triple(a, b, c, psi) -> PerpChoice:
    """Partner saturating :func:`bound_th1`: ``(A + w* B + w*^2 C)|psi>`` on the complement."""
    a, b, c, psi = as_observable(a), as_observable(b), as_observable(c), as_state(psi)
    s = tb.th1_sign(tb.triple_moments(a, b, c, psi).kappa)
    op = tb.phased_sum(a, b, c, s).conj().T
    return _normalized_partner(psi, op @ psi.amplitudes)


def cell_rng(seed: int, theta_index: int, sample_index: int) -> np.random.Generator:
    """Independent stream per sweep cell, so parallel and serial runs agree."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(theta_index, sample_index))
    return np.random.default_rng(ss)


def _eval_perp_relation(relation_id: str, obs: Sequence, psi: StateVector, perp: StateVector) -> float:
    if relation_id == "mp1":
        return pb.bound_mp_sum(obs[0], obs[1], psi, perp).rhs
    if relation_id == "new_sum":
        return pb.bound_new_sum(obs[0], obs[1], psi, perp).rhs
    if relation_id == "amended_hr":
        return pb.bound_amended_hr(obs[0], obs[1], psi, perp).rhs
    if relation_id == "new_product":
        return pb.bound_new_product(obs[0], obs[1], psi, perp).rhs
    if relation_id == "th1":
        return tb.bound_th1(obs[0], obs[1], obs[2], psi, perp).rhs
    raise ValueError(f"unknown cloud relation {relation_id!r}")


CLOUD_RELATIONS = ("mp1", "new_sum", "amended_hr", "new_product", "th1")

_FAMILIES: dict[str, Callable[[float, float], StateVector]] = {
    "fig1": lambda t, f: fig1_state(Fig1Params(t, f)),
    "fig2": lambda t, f: fig2_state(Fig2Params(t, f)),
}


def _family(state_family) -> Callable[[float, float], StateVector]:
    if callable(state_family):
        return state_family
    try:
        return _FAMILIES[state_family]
    except KeyError:
        raise ValueError(f"unknown state family {state_family!r}") from None


def cloud_sample(relation_id, observables, state_family, theta_grid, phi, n_samples, seed) -> list[SweepRecord]:
    """Bound values for ``n_samples`` Haar-random partners at each grid angle.

    The partner for cell ``(i, j)`` is drawn from :func:`cell_rng` and does not
    depend on evaluation order.
    """
    if relation_id not in CLOUD_RELATIONS:
        raise ValueError(f"unknown cloud relation {relation_id!r}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    fam = _family(state_family)
    obs = [as_observable(o) for o in observables]
    out = []
    for i, theta in enumerate(theta_grid):
        psi = fam(float(theta), phi)
        for j in range(n_samples):
            perp = random_orthogonal_state(psi, cell_rng(seed, i, j))
            value = _eval_perp_relation(relation_id, obs, psi, perp)
            out.append(SweepRecord(float(theta), phi, relation_id, j, value, seed))
    return out


def _pair_curves(a, b, psi) -> dict[str, float]:
    m = pb.pair_moments(a, b, psi)
    return {"sv": m.varA + m.varB, "sc": m.strength, "hr": abs(m.w)}


def _triple_curves(a, b, c, psi) -> dict[str, float]:
    rep = tb.bound_sch_triple(a, b, c, psi)
    return {"sv": rep.lhs, "sch3": rep.rhs}


def curve_records(observables, state_family, theta_grid, phi, seed: int = 0) -> list[SweepRecord]:
    """Deterministic curves (``sample_index = -1``).

    Two observables give ``sv`` (sum of variances), ``sc`` (``|x + i w|``)
    and ``hr`` (``|<[A,B]>|``); three give ``sv`` and ``sch3``.
    """
    fam = _family(state_family)
    obs = [as_observable(o) for o in observables]
    curves = _pair_curves if len(obs) == 2 else _triple_curves
    out = []
    for theta in theta_grid:
        psi = fam(float(theta), phi)
        for name, value in curves(*obs, psi).items():
            out.append(SweepRecord(float(theta), phi, name, -1, value, seed))
    return out


def figure_sweep(preset: str, phi: float, grid: int, samples: int, seed: int) -> tuple[list[SweepRecord], dict]:
    """All records for one figure preset plus descriptive metadata."""
    spin = spin_operators(1)
    thetas = theta_grid(grid)
    meta: dict = {"preset": preset, "phi": phi, "grid": grid, "samples": samples, "seed": seed,
                  "perp_distribution": PERP_DISTRIBUTION}
    if preset == "fig1":
        obs = (spin.Jx, spin.Jy)
        clouds = ("mp1", "new_sum")
        meta["curves"] = {"sv": "dJx^2 + dJy^2", "sc": "|<[A,B]> + <{A,B}> - 2<A><B>|",
                          "hr": "|<[A,B]>| (from dA^2 + dB^2 >= 2 dA dB)"}
    elif preset == "fig2":
        obs = (spin.Jx, spin.Jy, spin.Jz)
        clouds = ("th1",)
        meta["curves"] = {"sv": "dJx^2 + dJy^2 + dJz^2", "sch3": "pairwise Schrodinger sum"}
        meta["crossings"] = fig2_crossings(phi)
        meta["crossing_variant"] = "th1 without the partner term vs sch3"
    else:
        raise ValueError(f"unknown preset {preset!r}")
    records = curve_records(obs, preset, thetas, phi, seed)
    for rel in clouds:
        records += cloud_sample(rel, obs, preset, thetas, phi, samples, seed)
    # stable sort keeps curves first, then clouds in relation order, within each theta
    records.sort(key=lambda r: r.theta)
    return records, meta


def crossing_scan(f_lhs, f_rhs, theta_range=(0.0, math.pi), tol: float = 1e-6, n_grid: int = 2000) -> list[float]:
    """Abscissae where ``f_lhs - f_rhs`` changes sign.

    The difference is bracketed on a uniform grid and each bracket refined
    by bisection to ``tol``.
    """
    if n_grid < 2000:
        raise ValueError("crossing scans need at least 2000 grid points")
    lo, hi = theta_range
    xs = np.linspace(lo, hi, n_grid)

    def diff(t):
        return f_lhs(t) - f_rhs(t)

    ds = np.array([diff(t) for t in xs])
    roots = []
    for i in range(n_grid - 1):
        if ds[i] == 0.0:
            if i > 0 and ds[i - 1] * ds[i + 1] < 0:
                roots.append(float(xs[i]))
        elif ds[i] * ds[i + 1] < 0:
            roots.append(float(bisect(diff, xs[i], xs[i + 1], xtol=tol)))
    return sorted(roots)


def fig2_crossings(phi: float, tol: float = 1e-6) -> list[float]:
    """Where the partner-free th1 bound meets the pairwise sum for the fig2 family."""
    spin = spin_operators(1)

    def state(t):
        return fig2_state(Fig2Params(min(max(t, 0.0), math.pi), phi))

    return crossing_scan(
        lambda t: tb.th1_partner_free(spin.Jx, spin.Jy, spin.Jz, state(t)),
        lambda t: tb.bound_sch_triple(spin.Jx, spin.Jy, spin.Jz, state(t)).rhs,
        (0.0, math.pi),
        tol,
    )
