"""Dense complex linear algebra and pure-state moments.

Observables and states are thin immutable wrappers around numpy arrays.
Validation happens once, at construction; every function below is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DimensionError",
    "NonHermitianError",
    "NormalizationError",
    "HermitianObservable",
    "StateVector",
    "OrthonormalFrame",
    "as_observable",
    "as_state",
    "expectation",
    "variance",
    "commutator_mean",
    "anticommutator_mean",
    "deviation_vector",
    "covariance",
    "project_complement",
    "complete_basis",
    "random_state",
    "random_orthogonal_state",
    "random_observable",
]

HERMITICITY_RTOL = 1e-10
NORM_GATE = 1e-8
VARIANCE_CLAMP = 1e-12


class DimensionError(ValueError):
    """Operands live in Hilbert spaces of different dimension."""


class NonHermitianError(ValueError):
    pass


class NormalizationError(ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianObservable:
    """A validated Hermitian matrix.

    Raises :class:`NonHermitianError` naming the worst offending entry when
    ``max |M - M^dagger|`` exceeds ``1e-10 * (1 + max |M_ij|)``.
    """

    matrix: np.ndarray
    hermiticity_defect: float = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionError(f"observable must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("observable has non-finite entries")
        diff = np.abs(m - m.conj().T)
        defect = float(diff.max())
        scale = 1.0 + float(np.abs(m).max())
        if defect > HERMITICITY_RTOL * scale:
            i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
            raise NonHermitianError(
                f"matrix is not Hermitian: entry ({i},{j})={m[i, j]} but "
                f"conj of entry ({j},{i}) is {np.conj(m[j, i])}"
            )
        object.__setattr__(self, "matrix", _readonly(m))
        object.__setattr__(self, "hermiticity_defect", defect)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __neg__(self) -> HermitianObservable:
        return HermitianObservable(-self.matrix)

    def __add__(self, other: HermitianObservable) -> HermitianObservable:
        if not isinstance(other, HermitianObservable):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return HermitianObservable(self.matrix + other.matrix)

    def __sub__(self, other: HermitianObservable) -> HermitianObservable:
        if not isinstance(other, HermitianObservable):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return HermitianObservable(self.matrix - other.matrix)

    def __mul__(self, c: float) -> HermitianObservable:
        return HermitianObservable(float(c) * self.matrix)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"HermitianObservable(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class StateVector:
    """A unit-norm ket.

    Inputs within ``1e-8`` of unit norm are renormalized; anything farther
    off raises :class:`NormalizationError`. Use :meth:`normalized` to
    accept an arbitrary nonzero vector.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex)
        if v.ndim != 1 or v.size < 1:
            raise DimensionError(f"state must be a non-empty 1-d vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("state has non-finite amplitudes")
        n = np.linalg.norm(v)
        if abs(n - 1.0) > NORM_GATE:
            raise NormalizationError(f"state norm {n!r} is not within {NORM_GATE} of 1")
        object.__setattr__(self, "amplitudes", _readonly(v / n))

    @classmethod
    def normalized(cls, v) -> StateVector:
        v = np.asarray(v, dtype=complex)
        n = np.linalg.norm(v)
        if not n > 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(v / n)

    @classmethod
    def basis(cls, dim: int, k: int) -> StateVector:
        v = np.zeros(dim, dtype=complex)
        v[k] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: StateVector) -> complex:
        """``<self|other>``."""
        other = as_state(other)
        _check_dims(self.dim, other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True, eq=False)
class OrthonormalFrame:
    """``base`` together with ``dim - 1`` unit vectors spanning its complement."""

    base: StateVector
    complement: tuple[StateVector, ...]

    @property
    def dim(self) -> int:
        return self.base.dim

    def matrix(self) -> np.ndarray:
        """Columns are ``base`` followed by the complement vectors."""
        cols = [self.base.amplitudes] + [c.amplitudes for c in self.complement]
        return np.column_stack(cols)

    def gram_defect(self) -> float:
        f = self.matrix()
        return float(np.abs(f.conj().T @ f - np.eye(f.shape[1])).max())


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def as_observable(a) -> HermitianObservable:
    return a if isinstance(a, HermitianObservable) else HermitianObservable(a)


def as_state(psi) -> StateVector:
    return psi if isinstance(psi, StateVector) else StateVector(psi)


def _mat(m) -> np.ndarray:
    if isinstance(m, HermitianObservable):
        return m.matrix
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def _vec(psi) -> np.ndarray:
    return psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)


def expectation(psi, m) -> complex:
    """``<psi|M|psi>`` for any square matrix ``M``."""
    v, mm = _vec(psi), _mat(m)
    _check_dims(v.shape[0], mm.shape[0])
    return complex(np.vdot(v, mm @ v))


def deviation_vector(psi, a) -> np.ndarray:
    """``(A - <A>) |psi>``, which is always orthogonal to ``psi``."""
    v, m = _vec(psi), _mat(a)
    _check_dims(v.shape[0], m.shape[0])
    av = m @ v
    return av - np.vdot(v, av) * v


def variance(psi, a) -> float:
    """``<A^2> - <A>^2``, computed as the squared norm of the deviation vector.

    Tiny negative values from rounding in ``[-1e-12, 0)`` are clamped to 0;
    anything more negative indicates a non-Hermitian input and raises.
    """
    v, m = _vec(psi), _mat(a)
    _check_dims(v.shape[0], m.shape[0])
    av = m @ v
    mean = np.vdot(v, av)
    var = float(np.vdot(av, av).real - abs(mean) ** 2)
    if var < 0.0:
        if var < -VARIANCE_CLAMP:
            raise ArithmeticError(f"negative variance {var!r}")
        var = 0.0
    return var


def covariance(psi, a, b) -> complex:
    """``<psi| (A - <A>)(B - <B>) |psi>``."""
    return complex(np.vdot(deviation_vector(psi, a), deviation_vector(psi, b)))


def commutator_mean(psi, a, b) -> complex:
    """``<[A, B]>``; purely imaginary for Hermitian ``A`` and ``B``."""
    ma, mb = _mat(a), _mat(b)
    _check_dims(ma.shape[0], mb.shape[0])
    v = _vec(psi)
    _check_dims(v.shape[0], ma.shape[0])
    av, bv = ma @ v, mb @ v
    # <A psi|B psi> - <B psi|A psi> avoids forming AB
    return complex(np.vdot(av, bv) - np.vdot(bv, av))


def anticommutator_mean(psi, a, b) -> complex:
    """``<{A, B}>``; purely real for Hermitian ``A`` and ``B``."""
    ma, mb = _mat(a), _mat(b)
    _check_dims(ma.shape[0], mb.shape[0])
    v = _vec(psi)
    _check_dims(v.shape[0], ma.shape[0])
    av, bv = ma @ v, mb @ v
    return complex(np.vdot(av, bv) + np.vdot(bv, av))


def project_complement(psi, v) -> np.ndarray:
    """Apply ``I - |psi><psi|`` to ``v``."""
    p = _vec(psi)
    v = np.asarray(v, dtype=complex)
    _check_dims(p.shape[0], v.shape[0])
    out = v - np.vdot(p, v) * p
    # a second pass removes the residual left by cancellation when v is nearly parallel to psi
    return out - np.vdot(p, out) * p


def complete_basis(psi) -> OrthonormalFrame:
    """Extend ``psi`` to an orthonormal basis with a Householder reflection.

    The phase of ``psi`` is rotated so its first amplitude is real and
    nonnegative, then ``H = I - 2 u u^dagger / |u|^2`` with
    ``u = psi' + e_0`` maps ``e_0`` onto ``-psi'``. The remaining columns of
    ``H`` span the complement. ``u[0] >= 1``, so there is no cancellation.
    """
    psi = as_state(psi)
    v = psi.amplitudes
    d = v.shape[0]
    if d == 1:
        return OrthonormalFrame(psi, ())
    phase = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0
    w = v / phase
    u = w.copy()
    u[0] += 1.0
    h = np.eye(d, dtype=complex) - 2.0 * np.outer(u, u.conj()) / np.vdot(u, u).real
    return OrthonormalFrame(psi, tuple(StateVector(h[:, k]) for k in range(1, d)))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_state(dim: int, seed=None) -> StateVector:
    """Haar-random pure state in ``dim`` dimensions.

    ``seed`` may be an int, a SeedSequence or a ``numpy.random.Generator``.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    return StateVector.normalized(_complex_gaussian(_rng(seed), dim))


def random_orthogonal_state(psi, seed=None) -> StateVector:
    """Haar-random unit vector on the orthogonal complement of ``psi``.

    An isotropic complex Gaussian is projected onto the complement and
    normalized.
    """
    psi = as_state(psi)
    if psi.dim < 2:
        raise ValueError("a 1-dimensional space has no orthogonal complement")
    rng = _rng(seed)
    while True:
        v = project_complement(psi, _complex_gaussian(rng, psi.dim))
        n = np.linalg.norm(v)
        if n > 1e-8:
            return StateVector(v / n)


def random_observable(dim: int, seed=None, scale: float = 1.0) -> HermitianObservable:
    """GUE-distributed Hermitian matrix, for fuzzing."""
    g = _complex_gaussian(_rng(seed), (dim, dim))
    return HermitianObservable(scale * 0.5 * (g + g.conj().T))
