"""Two-observable variance uncertainty relations.

Every evaluator returns a :class:`BoundReport`. Moments are expressed
through ``x = <{A,B}> - 2<A><B>`` and ``w = -i<[A,B]>``, so that the
centred correlation is ``<(A-<A>)(B-<B>)> = (x + i w) / 2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .qmcore import (
    DimensionError,
    StateVector,
    as_observable,
    as_state,
    deviation_vector,
    expectation,
    variance,
)

__all__ = [
    "PAIR_RELATIONS",
    "SLACK_TOLERANCE",
    "OrthogonalityError",
    "ZeroVarianceError",
    "DegenerateDenominatorError",
    "PairMoments",
    "BoundReport",
    "pair_moments",
    "alpha_phase",
    "mp_sign",
    "bound_hr",
    "bound_schrodinger",
    "bound_mp_sum",
    "bound_mp_sum2",
    "bound_amended_hr",
    "bound_new_sum",
    "bound_new_sum_reduced",
    "bound_new_product",
    "check_perp",
]

PAIR_RELATIONS = ("hr", "sc", "mp1", "mp2", "amended_hr", "new_sum", "new_sum_reduced", "new_product")
SLACK_TOLERANCE = 1e-9
ORTHO_TOLERANCE = 1e-10
MIN_SPREAD = 1e-8
MIN_DENOMINATOR = 1e-10
DEGENERATE_NORM = 1e-12


class OrthogonalityError(ValueError):
    """The supplied partner state is not orthogonal to the system state."""


class ZeroVarianceError(ValueError):
    pass


class DegenerateDenominatorError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PairMoments:
    meanA: float
    meanB: float
    varA: float
    varB: float
    corr: complex
    x: float
    w: float

    @property
    def strength(self) -> float:
        """``sqrt(x^2 + w^2) = 2|corr|``."""
        return math.hypot(self.x, self.w)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one relation: ``lhs >= rhs`` is expected to hold."""

    relation_id: str
    lhs: float
    rhs: float
    params: dict[str, Any] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    @property
    def slack(self) -> float:
        return float(self.lhs - self.rhs)

    @property
    def satisfied(self) -> bool:
        return bool(self.slack >= -SLACK_TOLERANCE)

    def to_dict(self) -> dict[str, Any]:
        return {
            "relation": self.relation_id,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "slack": self.slack,
            "satisfied": self.satisfied,
            "flags": list(self.flags),
            "params": {k: _jsonable(v) for k, v in self.params.items()},
        }


def _jsonable(v):
    if isinstance(v, StateVector):
        v = v.amplitudes
    if isinstance(v, np.ndarray):
        return [[float(z.real), float(z.imag)] for z in v.ravel()]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def pair_moments(a, b, psi) -> PairMoments:
    a, b, psi = as_observable(a), as_observable(b), as_state(psi)
    da, db = deviation_vector(psi, a), deviation_vector(psi, b)
    corr = complex(np.vdot(da, db))
    return PairMoments(
        meanA=expectation(psi, a).real,
        meanB=expectation(psi, b).real,
        varA=variance(psi, a),
        varB=variance(psi, b),
        corr=corr,
        x=2.0 * corr.real,
        w=2.0 * corr.imag,
    )


def alpha_phase(m: PairMoments) -> float:
    """Phase of ``x + i w``, on the branch ``(-pi/2, 3pi/2)``.

    For ``x > 0`` this is ``arctan(w/x)``, for ``x < 0`` it is
    ``pi + arctan(w/x)``, and for ``x = 0`` it is ``+-pi/2``. Returns 0
    when ``x = w = 0``.
    """
    a = math.atan2(m.w, m.x)
    if a < -math.pi / 2:
        a += 2 * math.pi
    return a


def mp_sign(m: PairMoments) -> int:
    """+1 when ``i<[A,B]> = -w`` is positive, else -1."""
    return 1 if -m.w > 0 else -1


def check_perp(psi: StateVector, perp) -> StateVector:
    perp = as_state(perp)
    if perp.dim != psi.dim:
        raise DimensionError(f"perp has dim {perp.dim}, state has dim {psi.dim}")
    ov = abs(psi.overlap(perp))
    if ov > ORTHO_TOLERANCE:
        raise OrthogonalityError(f"|<psi|perp>| = {ov:.3e} exceeds {ORTHO_TOLERANCE}")
    return perp


def _overlap_term(psi: StateVector, op: np.ndarray, perp: StateVector) -> float:
    """``|<psi| op |perp>|^2``."""
    return abs(np.vdot(psi.amplitudes, op @ perp.amplitudes)) ** 2


def _trivial_flags(psi, perp, a, b, m: PairMoments) -> tuple[str, ...]:
    """Flag partners parallel to a deviation vector; such choices make the bound uninformative."""
    flags = []
    for name, obs, var in (("A", a, m.varA), ("B", b, m.varB)):
        if var > MIN_SPREAD**2:
            ov = abs(np.vdot(deviation_vector(psi, obs), perp.amplitudes)) / math.sqrt(var)
            if ov > 1 - 1e-9:
                flags.append(f"perp parallel to deviation of {name}")
    return tuple(flags)


def _pair_inputs(a, b, psi):
    a, b, psi = as_observable(a), as_observable(b), as_state(psi)
    return a, b, psi, pair_moments(a, b, psi)


def bound_hr(a, b, psi) -> BoundReport:
    """Robertson: ``dA^2 dB^2 >= (w/2)^2``."""
    a, b, psi, m = _pair_inputs(a, b, psi)
    return BoundReport("hr", m.varA * m.varB, (m.w / 2) ** 2)


def bound_schrodinger(a, b, psi) -> BoundReport:
    """Schrodinger: ``dA^2 dB^2 >= (w/2)^2 + (x/2)^2``."""
    a, b, psi, m = _pair_inputs(a, b, psi)
    return BoundReport("sc", m.varA * m.varB, (m.w / 2) ** 2 + (m.x / 2) ** 2)


def bound_mp_sum(a, b, psi, perp) -> BoundReport:
    """Sum relation ``dA^2 + dB^2 >= s i<[A,B]> + |<psi|A + s iB|perp>|^2``."""
    a, b, psi, m = _pair_inputs(a, b, psi)
    perp = check_perp(psi, perp)
    s = mp_sign(m)
    ladder = _overlap_term(psi, a.matrix + s * 1j * b.matrix, perp)
    flags = _trivial_flags(psi, perp, a, b, m)
    return BoundReport(
        "mp1",
        m.varA + m.varB,
        -s * m.w + ladder,
        params={"sign": s, "commutator_term": -s * m.w, "perp": perp},
        flags=flags,
    )


def bound_mp_sum2(a, b, psi) -> BoundReport:
    """``dA^2 + dB^2 >= |<perp_{A+B}|A+B|psi>|^2 / 2`` with the normalized deviation of A+B."""
    a, b, psi, m = _pair_inputs(a, b, psi)
    s = a.matrix + b.matrix
    dev = deviation_vector(psi, s)
    n = np.linalg.norm(dev)
    if n < DEGENERATE_NORM:
        return BoundReport("mp2", m.varA + m.varB, 0.0, flags=("degenerate deviation vector",))
    rhs = 0.5 * abs(np.vdot(dev / n, s @ psi.amplitudes)) ** 2
    return BoundReport("mp2", m.varA + m.varB, rhs, params={"var_sum": variance(psi, s)})


def _spreads(m: PairMoments) -> tuple[float, float]:
    da, db = math.sqrt(m.varA), math.sqrt(m.varB)
    if da <= MIN_SPREAD or db <= MIN_SPREAD:
        raise ZeroVarianceError(f"standard deviations ({da:.3e}, {db:.3e}) must exceed {MIN_SPREAD}")
    return da, db


def _denominator(psi, op, perp) -> float:
    d = 1.0 - 0.5 * _overlap_term(psi, op, perp)
    if d <= MIN_DENOMINATOR:
        raise DegenerateDenominatorError(f"denominator {d!r} is not above {MIN_DENOMINATOR}")
    return d


def bound_amended_hr(a, b, psi, perp) -> BoundReport:
    """``dA dB >= (s i<[A,B]>/2) / (1 - |<psi|A/dA + s iB/dB|perp>|^2 / 2)``."""
    a, b, psi, m = _pair_inputs(a, b, psi)
    perp = check_perp(psi, perp)
    da, db = _spreads(m)
    s = mp_sign(m)
    d = _denominator(psi, a.matrix / da + s * 1j * b.matrix / db, perp)
    return BoundReport(
        "amended_hr",
        da * db,
        (-s * m.w / 2) / d,
        params={"sign": s, "denominator": d, "perp": perp},
        flags=_trivial_flags(psi, perp, a, b, m),
    )


def bound_new_sum(a, b, psi, perp) -> BoundReport:
    """``dA^2 + dB^2 >= |x + i w| + |<psi|A - e^{i alpha} B|perp>|^2``."""
    a, b, psi, m = _pair_inputs(a, b, psi)
    perp = check_perp(psi, perp)
    alpha = alpha_phase(m)
    first = m.strength
    last = _overlap_term(psi, a.matrix - cmath.exp(1j * alpha) * b.matrix, perp)
    flags = _trivial_flags(psi, perp, a, b, m)
    if m.x == 0.0 and m.w == 0.0:
        flags += ("alpha degenerate",)
    return BoundReport(
        "new_sum",
        m.varA + m.varB,
        first + last,
        params={"alpha": alpha, "first_term": first, "perp": perp},
        flags=flags,
    )


def bound_new_sum_reduced(a, b, psi) -> BoundReport:
    """``dA^2 + dB^2 >= |x + i w|``, the partner-free part of :func:`bound_new_sum`."""
    a, b, psi, m = _pair_inputs(a, b, psi)
    return BoundReport("new_sum_reduced", m.varA + m.varB, m.strength)


def bound_new_product(a, b, psi, perp) -> BoundReport:
    """``dA^2 dB^2 >= ((w/2)^2 + (x/2)^2) / D^2`` with ``D = 1 - |<psi|A/dA - e^{i alpha}B/dB|perp>|^2 / 2``.

    Raises :class:`DegenerateDenominatorError` when ``D <= 1e-10``.
    """
    a, b, psi, m = _pair_inputs(a, b, psi)
    perp = check_perp(psi, perp)
    da, db = _spreads(m)
    alpha = alpha_phase(m)
    d = _denominator(psi, a.matrix / da - cmath.exp(1j * alpha) * b.matrix / db, perp)
    num = (m.w / 2) ** 2 + (m.x / 2) ** 2
    return BoundReport(
        "new_product",
        m.varA * m.varB,
        num / d**2,
        params={"alpha": alpha, "denominator": d, "schrodinger_rhs": num, "perp": perp},
        flags=_trivial_flags(psi, perp, a, b, m),
    )
