"""Spin-1 state families used for the figure sweeps, plus their orthogonal partners.

Basis order is ``(|1>, |0>, |-1>)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qmcore import StateVector

__all__ = ["Fig1Params", "Fig2Params", "fig1_state", "fig2_state", "fig2_perp", "theta_grid", "FIGURE_GRID"]

FIGURE_GRID = 200


def _check_angles(theta: float, phi: float) -> None:
    if not (0.0 <= theta <= math.pi):
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    if not (0.0 <= phi < 2 * math.pi):
        raise ValueError(f"phi must lie in [0, 2pi), got {phi!r}")


@dataclass(frozen=True)
class Fig1Params:
    theta: float
    phi: float

    def __post_init__(self):
        _check_angles(self.theta, self.phi)


@dataclass(frozen=True)
class Fig2Params:
    theta: float
    phi: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        _check_angles(self.theta, self.phi)


def fig1_state(p: Fig1Params) -> StateVector:
    """``cos(theta)|1> + sin(theta) e^{i phi}|-1>``."""
    t, f = p.theta, p.phi
    return StateVector(np.array([math.cos(t), 0.0, math.sin(t) * np.exp(1j * f)]))


def fig2_state(p: Fig2Params) -> StateVector:
    """``sin(theta)cos(phi)|1> + sin(theta)sin(phi)|0> + cos(theta)|-1>``."""
    t, f = p.theta, p.phi
    st = math.sin(t)
    return StateVector(np.array([st * math.cos(f), st * math.sin(f), math.cos(t)], dtype=complex))


def fig2_perp(p: Fig2Params) -> StateVector:
    """Two-parameter family of states orthogonal to :func:`fig2_state`.

    ``beta`` mixes the two real complement directions and ``gamma`` is a
    relative phase. The norm is unity analytically; the constructor's
    renormalization gate absorbs rounding.
    """
    t, f, b, g = p.theta, p.phi, p.beta, p.gamma
    ce = math.cos(b) * np.exp(1j * g)
    sb = math.sin(b)
    amps = np.array(
        [
            math.cos(t) * math.cos(f) * ce - math.sin(f) * sb,
            math.cos(t) * math.sin(f) * ce + math.cos(f) * sb,
            -math.sin(t) * ce,
        ]
    )
    return StateVector(amps)


def theta_grid(n: int = FIGURE_GRID) -> np.ndarray:
    """Uniform grid over ``[0, pi]`` with both endpoints."""
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(0.0, math.pi, n)
