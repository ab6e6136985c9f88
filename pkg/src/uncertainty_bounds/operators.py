"""Concrete observables: spin-j angular momentum and the truncated oscillator triple.

Units are dimensionless with hbar = 1. Spin bases are ordered by descending
``Jz`` eigenvalue, so for ``j = 1`` index 0, 1, 2 is ``|1>, |0>, |-1>``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .qmcore import (
    DimensionError,
    HermitianObservable,
    StateVector,
    _vec,
)

__all__ = [
    "SpinTriple",
    "OscillatorTriple",
    "spin_operators",
    "oscillator_triple",
    "fock_state",
    "coherent_state",
    "tail_weight",
    "is_truncation_safe",
    "parse_observable",
    "parse_complex",
    "TAIL_WEIGHT_LIMIT",
]

HBAR = 1.0
TAIL_WEIGHT_LIMIT = 1e-8


@dataclass(frozen=True, eq=False)
class SpinTriple:
    j: Fraction
    Jx: HermitianObservable
    Jy: HermitianObservable
    Jz: HermitianObservable

    @property
    def dim(self) -> int:
        return self.Jz.dim

    def __iter__(self):
        return iter((self.Jx, self.Jy, self.Jz))


@dataclass(frozen=True, eq=False)
class OscillatorTriple:
    """Schrodinger triple ``(q, p, r = -q - p)`` on an ``n_trunc``-level Fock space."""

    n_trunc: int
    q: HermitianObservable
    p: HermitianObservable
    r: HermitianObservable
    hbar: float = HBAR

    @property
    def dim(self) -> int:
        return self.n_trunc

    def __iter__(self):
        return iter((self.q, self.p, self.r))


def _as_spin(j) -> Fraction:
    try:
        jf = Fraction(j).limit_denominator(2) if not isinstance(j, str) else Fraction(j)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(f"invalid spin {j!r}") from exc
    if isinstance(j, float) and abs(float(jf) - j) > 1e-12:
        raise ValueError(f"spin must be a positive half-integer, got {j!r}")
    if jf <= 0 or (2 * jf).denominator != 1:
        raise ValueError(f"spin must be a positive half-integer, got {j!r}")
    return jf


def spin_operators(j) -> SpinTriple:
    """Angular momentum matrices for spin ``j`` from the ladder operators.

    ``J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>``; with the descending basis the
    raising operator sits on the superdiagonal.
    """
    jf = _as_spin(j)
    jv = float(jf)
    d = int(2 * jf) + 1
    m = jv - np.arange(d)
    jplus = np.diag(np.sqrt(jv * (jv + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    jminus = jplus.conj().T
    return SpinTriple(
        j=jf,
        Jx=HermitianObservable(0.5 * (jplus + jminus)),
        Jy=HermitianObservable(-0.5j * (jplus - jminus)),
        Jz=HermitianObservable(np.diag(m).astype(complex)),
    )


def oscillator_triple(n_trunc: int) -> OscillatorTriple:
    """Quadratures ``q = (a + a^dagger)/sqrt2``, ``p = i(a^dagger - a)/sqrt2``, ``r = -q - p``.

    Truncation corrupts the canonical commutator only on the top Fock level.
    """
    if int(n_trunc) != n_trunc or n_trunc < 4:
        raise ValueError(f"Fock cutoff must be an integer >= 4, got {n_trunc!r}")
    n_trunc = int(n_trunc)
    a = np.diag(np.sqrt(np.arange(1, n_trunc)), k=1).astype(complex)
    ad = a.conj().T
    q = (a + ad) / math.sqrt(2.0)
    p = 1j * (ad - a) / math.sqrt(2.0)
    r = -q - p
    return OscillatorTriple(n_trunc, HermitianObservable(q), HermitianObservable(p), HermitianObservable(r))


def fock_state(n_trunc: int, k: int = 0) -> StateVector:
    return StateVector.basis(n_trunc, k)


def coherent_state(n_trunc: int, alpha: complex) -> StateVector:
    """Coherent state truncated to ``n_trunc`` levels and renormalized."""
    k = np.arange(n_trunc)
    logfact = np.array([math.lgamma(i + 1.0) for i in k])
    mag = abs(alpha)
    if mag == 0:
        return fock_state(n_trunc, 0)
    amps = np.exp(k * math.log(mag) - 0.5 * logfact) * np.exp(1j * k * np.angle(alpha))
    return StateVector.normalized(amps)


def tail_weight(psi, n_trunc: int | None = None) -> float:
    """Probability on the top quarter of Fock levels."""
    v = _vec(psi)
    n = v.shape[0] if n_trunc is None else n_trunc
    if n != v.shape[0]:
        raise DimensionError(f"state has dim {v.shape[0]}, cutoff is {n}")
    top = max(1, math.ceil(n / 4))
    return float(np.sum(np.abs(v[n - top:]) ** 2))


def is_truncation_safe(psi, n_trunc: int | None = None) -> bool:
    return tail_weight(psi, n_trunc) < TAIL_WEIGHT_LIMIT


_PRESET = re.compile(r"^(spin|osc)([0-9]+(?:/2)?):(\w+)$")


def parse_complex(z) -> complex:
    """Accept ``[re, im]`` pairs or plain real numbers."""
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise ValueError(f"complex number must be a [re, im] pair, got {z!r}")
        return complex(float(z[0]), float(z[1]))
    if isinstance(z, bool) or not isinstance(z, (int, float)):
        raise ValueError(f"not a number: {z!r}")
    return complex(float(z))


def parse_observable(spec, dim: int | None = None) -> HermitianObservable:
    """Build an observable from a preset name or an explicit matrix.

    Presets follow ``<family><param>:<component>``: ``spin1:Jx``,
    ``spin3/2:Jz``, ``osc16:q``. Explicit matrices are row lists whose
    entries are reals or ``[re, im]`` pairs.
    """
    if isinstance(spec, str):
        m = _PRESET.match(spec.strip())
        if m is None:
            raise ValueError(f"unknown observable preset {spec!r}")
        family, param, comp = m.groups()
        if family == "spin":
            trip = spin_operators(Fraction(param))
            table = {"Jx": trip.Jx, "Jy": trip.Jy, "Jz": trip.Jz}
        else:
            trip = oscillator_triple(int(param))
            table = {"q": trip.q, "p": trip.p, "r": trip.r}
        if comp not in table:
            raise ValueError(f"unknown component {comp!r} for preset family {family!r}")
        obs = table[comp]
    else:
        rows = [[parse_complex(z) for z in row] for row in spec]
        if any(len(r) != len(rows) for r in rows):
            raise DimensionError("explicit observable must be a square matrix")
        obs = HermitianObservable(np.array(rows, dtype=complex))
    if dim is not None and obs.dim != dim:
        raise DimensionError(f"observable {spec if isinstance(spec, str) else 'matrix'} has dim {obs.dim}, session dim is {dim}")
    return obs
