"""Three-observable relations, the uncertainty equality and the (rho, sigma) family.

``kappa = i<[A,B,C]>`` with ``<[A,B,C]> = <[A,B]> + <[B,C]> + <[C,A]>``;
it is real for Hermitian inputs and equals ``-(w_ab + w_bc + w_ca)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .operators import OscillatorTriple, is_truncation_safe, tail_weight
from .pairbounds import (
    DEGENERATE_NORM,
    BoundReport,
    PairMoments,
    check_perp,
    pair_moments,
)
from .qmcore import (
    OrthonormalFrame,
    anticommutator_mean,
    as_observable,
    as_state,
    deviation_vector,
    variance,
)

__all__ = [
    "TRIPLE_RELATIONS",
    "FrameMismatchError",
    "TripleMoments",
    "TuningCoefficients",
    "triple_moments",
    "th1_sign",
    "phased_sum",
    "bound_sch_triple",
    "bound_th1",
    "th1_partner_free",
    "bound_thc",
    "sign_flip_bounds",
    "bound_kw_additive",
    "bound_kw_multiplicative",
    "equality_decomposition",
    "mu_nu",
    "bound_general_family",
    "family_grid",
]

TRIPLE_RELATIONS = ("sch3", "th1", "thc", "kw_add", "kw_mult", "eq31", "family")
SQRT3_3 = math.sqrt(3.0) / 3.0
KAPPA_ZERO = 1e-12
EQUALITY_TOLERANCE = 1e-10
TRUNCATION_FLAG = "truncation-unsafe"
SIGN_PATTERNS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


class FrameMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TripleMoments:
    pair_ab: PairMoments
    pair_bc: PairMoments
    pair_ca: PairMoments
    kappa: float
    var_sum_op: float
    anticomm_sum: float

    @property
    def var_total(self) -> float:
        """``dA^2 + dB^2 + dC^2``."""
        return self.pair_ab.varA + self.pair_bc.varA + self.pair_ca.varA


@dataclass(frozen=True)
class TuningCoefficients:
    rho: float
    sigma: float
    mu: float
    nu: float


def triple_moments(a, b, c, psi) -> TripleMoments:
    a, b, c, psi = as_observable(a), as_observable(b), as_observable(c), as_state(psi)
    ab, bc, ca = pair_moments(a, b, psi), pair_moments(b, c, psi), pair_moments(c, a, psi)
    anti = (
        anticommutator_mean(psi, a, b) + anticommutator_mean(psi, a, c) + anticommutator_mean(psi, b, c)
    ).real
    return TripleMoments(
        pair_ab=ab,
        pair_bc=bc,
        pair_ca=ca,
        kappa=-(ab.w + bc.w + ca.w),
        var_sum_op=variance(psi, a.matrix + b.matrix + c.matrix),
        anticomm_sum=anti,
    )


def th1_sign(kappa: float) -> int:
    return 1 if kappa > 0 else -1


def phased_sum(a, b, c, s: int) -> np.ndarray:
    """``A + e^{s i 2pi/3} B + e^{s i 4pi/3} C``."""
    a, b, c = as_observable(a), as_observable(b), as_observable(c)
    w = cmath.exp(s * 2j * math.pi / 3)
    return a.matrix + w * b.matrix + w * w * c.matrix


def _trio(a, b, c, psi):
    a, b, c, psi = as_observable(a), as_observable(b), as_observable(c), as_state(psi)
    return a, b, c, psi, triple_moments(a, b, c, psi)


def _sum_deviation_term(psi, a, b, c) -> tuple[float, tuple[str, ...]]:
    """``|<perp_ABC|A+B+C|psi>|^2`` for the normalized deviation of ``A+B+C``."""
    s = a.matrix + b.matrix + c.matrix
    dev = deviation_vector(psi, s)
    n = np.linalg.norm(dev)
    if n < DEGENERATE_NORM:
        return 0.0, ("degenerate deviation vector",)
    return abs(np.vdot(dev / n, s @ psi.amplitudes)) ** 2, ()


def bound_sch_triple(a, b, c, psi) -> BoundReport:
    """Sum of the three pairwise reduced relations."""
    a, b, c, psi, t = _trio(a, b, c, psi)
    rhs = 0.5 * (t.pair_ab.strength + t.pair_bc.strength + t.pair_ca.strength)
    return BoundReport("sch3", t.var_total, rhs)


def th1_partner_free(a, b, c, psi) -> float:
    """``Delta(A+B+C)^2 / 3 + |kappa| / sqrt3``: the first two terms of :func:`bound_th1`."""
    t = triple_moments(a, b, c, psi)
    return t.var_sum_op / 3.0 + SQRT3_3 * abs(t.kappa)


def bound_th1(a, b, c, psi, perp) -> BoundReport:
    """Three-observable relation with a free orthogonal partner.

    ``rhs = Delta(A+B+C)^2/3 + |kappa|/sqrt3 + (2/3)|<psi|A + w B + w^2 C|perp>|^2``
    with ``w = e^{s i 2pi/3}`` and ``s`` the sign of ``kappa``. When
    ``kappa`` vanishes both phase choices are valid and the larger bound is
    reported.
    """
    a, b, c, psi, t = _trio(a, b, c, psi)
    perp = check_perp(psi, perp)
    first, flags = _sum_deviation_term(psi, a, b, c)
    first /= 3.0
    middle = SQRT3_3 * abs(t.kappa)
    signs = (th1_sign(t.kappa),)
    if abs(t.kappa) <= KAPPA_ZERO:
        flags += ("kappa zero; both signs evaluated",)
        signs = (1, -1)
    lasts = {
        s: (2.0 / 3.0) * abs(np.vdot(psi.amplitudes, phased_sum(a, b, c, s) @ perp.amplitudes)) ** 2
        for s in signs
    }
    s = max(signs, key=lambda k: lasts[k])
    return BoundReport(
        "th1",
        t.var_total,
        first + middle + lasts[s],
        params={
            "sign": s,
            "first_term": first,
            "variance_identity_defect": abs(first - t.var_sum_op / 3.0),
            "kappa_term": middle,
            "partner_term": lasts[s],
            "perp": perp,
        },
        flags=flags,
    )


def bound_thc(a, b, c, psi) -> BoundReport:
    """``dA^2 + dB^2 + dC^2 >= (|w_ab| + |w_bc| + |w_ca|) / sqrt3``; invariant under relabelling and sign flips."""
    a, b, c, psi, t = _trio(a, b, c, psi)
    rhs = SQRT3_3 * (abs(t.pair_ab.w) + abs(t.pair_bc.w) + abs(t.pair_ca.w))
    return BoundReport("thc", t.var_total, rhs)


def sign_flip_bounds(a, b, c, psi) -> list[float]:
    """``|kappa| / sqrt3`` for the triples ``(eA, eB, eC)`` over the four even sign patterns.

    Each pattern is evaluated on genuinely negated observables.
    """
    a, b, c, psi = as_observable(a), as_observable(b), as_observable(c), as_state(psi)
    out = []
    for ea, eb, ec in SIGN_PATTERNS:
        t = triple_moments(a * ea, b * eb, c * ec, psi)
        out.append(SQRT3_3 * abs(t.kappa))
    return out


def _oscillator_guard(triple: OscillatorTriple, psi) -> tuple[str, ...]:
    return () if is_truncation_safe(psi, triple.n_trunc) else (TRUNCATION_FLAG,)


def bound_kw_additive(triple: OscillatorTriple, psi) -> BoundReport:
    """``dp^2 + dq^2 + dr^2 >= sqrt3`` (hbar = 1), only meaningful on truncation-safe states."""
    psi = as_state(psi)
    lhs = sum(variance(psi, o) for o in (triple.p, triple.q, triple.r))
    return BoundReport(
        "kw_add",
        lhs,
        math.sqrt(3.0) * triple.hbar,
        params={"tail_weight": tail_weight(psi, triple.n_trunc)},
        flags=_oscillator_guard(triple, psi),
    )


def bound_kw_multiplicative(triple: OscillatorTriple, psi) -> BoundReport:
    """``dp dq dr >= (hbar/sqrt3)^{3/2}``."""
    psi = as_state(psi)
    lhs = math.prod(math.sqrt(variance(psi, o)) for o in (triple.p, triple.q, triple.r))
    return BoundReport(
        "kw_mult",
        lhs,
        (triple.hbar / math.sqrt(3.0)) ** 1.5,
        params={"tail_weight": tail_weight(psi, triple.n_trunc)},
        flags=_oscillator_guard(triple, psi),
    )


def equality_decomposition(a, b, c, psi, frame: OrthonormalFrame) -> tuple[BoundReport, list[float]]:
    """Resolve the partner term of :func:`bound_th1` over a full orthonormal basis.

    Summing the partner term over every complement vector turns the relation
    into an identity. Returns the report (``params['residual']`` is
    ``|lhs - rhs|``) and the per-vector contributions ``(2/3)|<psi|...|perp_n>|^2``.
    """
    a, b, c, psi, t = _trio(a, b, c, psi)
    if frame.dim != psi.dim or len(frame.complement) != psi.dim - 1:
        raise FrameMismatchError("frame does not match the state dimension")
    if abs(abs(psi.overlap(frame.base)) - 1.0) > 1e-12:
        raise FrameMismatchError("frame base is not the system state")
    s = th1_sign(t.kappa)
    op_psi = phased_sum(a, b, c, s).conj().T @ psi.amplitudes
    terms = [(2.0 / 3.0) * abs(np.vdot(e.amplitudes, op_psi)) ** 2 for e in frame.complement]
    first, flags = _sum_deviation_term(psi, a, b, c)
    rhs = first / 3.0 + SQRT3_3 * abs(t.kappa) + math.fsum(terms)
    report = BoundReport(
        "eq31",
        t.var_total,
        rhs,
        params={"sign": s, "residual": abs(t.var_total - rhs)},
        flags=flags,
    )
    return report, terms


def _mu_nu_arrays(rho, sigma):
    k = np.cos(rho) + np.cos(sigma) + np.cos(sigma - rho)
    n = np.sin(rho) - np.sin(sigma) + np.sin(sigma - rho)
    return k, n, k - 3.0


def mu_nu(rho: float, sigma: float) -> TuningCoefficients:
    """Coefficients of the bound ``mu Delta(A+B+C)^2 + nu kappa``.

    The denominator ``cos(rho) + cos(sigma) + cos(sigma - rho) - 3`` vanishes
    only at ``rho = sigma = 0 (mod 2pi)``.
    """
    k = math.cos(rho) + math.cos(sigma) + math.cos(sigma - rho)
    n = math.sin(rho) - math.sin(sigma) + math.sin(sigma - rho)
    den = k - 3.0
    if abs(den) < 1e-14:
        raise ZeroDivisionError(f"mu/nu undefined at rho={rho!r}, sigma={sigma!r}")
    return TuningCoefficients(rho, sigma, k / den, n / den)


def bound_general_family(a, b, c, psi, rho: float, sigma: float) -> BoundReport:
    """``dA^2 + dB^2 + dC^2 >= mu Delta(A+B+C)^2 + i nu <[A,B,C]>``, i.e. ``+ nu kappa``."""
    a, b, c, psi, t = _trio(a, b, c, psi)
    co = mu_nu(rho, sigma)
    return BoundReport(
        f"family({rho!r},{sigma!r})",
        t.var_total,
        co.mu * t.var_sum_op + co.nu * t.kappa,
        params={"rho": rho, "sigma": sigma, "mu": co.mu, "nu": co.nu},
    )


def family_grid(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``mu`` and ``nu`` on the ``n x n`` grid ``2 pi k / n``; the singular cell (0, 0) is NaN.

    Returns ``(rho, sigma, mu, nu)`` as 2-d arrays indexed ``[i_rho, i_sigma]``.
    """
    g = 2 * math.pi * np.arange(n) / n
    rho, sigma = np.meshgrid(g, g, indexing="ij")
    k, num, den = _mu_nu_arrays(rho, sigma)
    bad = np.abs(den) < 1e-14
    den = np.where(bad, np.nan, den)
    return rho, sigma, k / den, num / den
