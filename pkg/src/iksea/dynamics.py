"""Non-unitary time evolution and dynamical QFI, block by block.

Because each 2x2 block H satisfies H^2 = eps_sq * I, the propagator has the
closed form

    U(t) = exp(-i H t) = c0(z) I - i t c1(z) H,        z = eps_sq t^2,

with c0(z) = cos(sqrt z) and c1(z) = sin(sqrt z)/sqrt z (cosh / sinh-over-r
for z < 0).  Differentiating in the field h (d eps_sq/dh = 2g, dH/dh =
diag(-1, 1)) gives the analytic propagator derivative

    dU/dh = -g t^2 c1 I  -  i g t^3 c2 H  -  i t c1 diag(-1, 1),

with c2(z) = (c0 - c1)/z, evaluated by series near z = 0 to avoid
cancellation.  The per-mode dynamical QFI of the normalised evolved state
|psi_t> = U|0> / ||U|0>|| is

    F_p = 4 [ <w|w>/n^2 - |<v|w>|^2 / n^4 ],   v = U|0>, w = (dU/dh)|0>,
    n^2 = <v|v>.

That quotient is invariant under a common rescaling of (U, dU), so broken
modes with sqrt(-z) large are evaluated in an exponentially rescaled frame;
their saturation plateau stays representable all the way to the cosh cutoff.
Totals are accumulated with math.fsum in ascending mode order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import (
    EvolutionOverflowError,
    NumericalConsistencyError,
    ParameterError,
)
from .model import ChainParams, block_elements, block_matrix, momentum_grid

__all__ = [
    "BlockPropagator",
    "EvolvedBlockState",
    "DynQfiSeries",
    "block_propagator",
    "propagator_derivative",
    "evolve_block",
    "dynamical_qfi",
    "qfi_time_series",
]

#: cosh/sinh argument beyond which double precision overflows
_OVERFLOW_ARG = 700.0

#: negative per-mode contributions beyond this are treated as real errors
_CLAMP_FLOOR = -1e-10


@dataclass(frozen=True)
class BlockPropagator:
    matrix: np.ndarray   # 2x2 complex
    time: float
    eps_sq: float


@dataclass(frozen=True)
class EvolvedBlockState:
    """Normalised evolved block state with its normalisation bookkeeping.

    raw_norm is ||U(t)|0>||; norm_factor = 1/raw_norm is the multiplier that
    normalises the evolved state (it equals 1 in the Hermitian limit).
    """

    state: np.ndarray
    raw_norm: float
    norm_factor: float
    time: float


@dataclass(frozen=True)
class DynQfiSeries:
    times: np.ndarray
    values: np.ndarray
    params: ChainParams
    derivative: str


def _c012(z: float):
    """Stable evaluation of c0, c1, c2 at real z = eps_sq * t^2."""
    if abs(z) <= 1e-8:
        c0 = 1.0 - z / 2.0 + z * z / 24.0 - z ** 3 / 720.0
        c1 = 1.0 - z / 6.0 + z * z / 120.0 - z ** 3 / 5040.0
    elif z > 0.0:
        r = math.sqrt(z)
        c0 = math.cos(r)
        c1 = math.sin(r) / r
    else:
        r = math.sqrt(-z)
        if r > _OVERFLOW_ARG:
            raise EvolutionOverflowError(
                f"cosh argument {r:.6g} exceeds {_OVERFLOW_ARG:g}; "
                f"the requested time overflows double precision")
        c0 = math.cosh(r)
        c1 = math.sinh(r) / r
    if abs(z) <= 1e-3:
        c2 = -1.0 / 3.0 + z / 30.0 - z * z / 840.0 + z ** 3 / 45360.0
    else:
        c2 = (c0 - c1) / z
    return c0, c1, c2


def block_propagator(params: ChainParams, phi: float, t: float) -> BlockPropagator:
    """Closed-form block propagator U(t) = c0 I - i t c1 H.

    Well defined on every branch, including exactly at exceptional points
    (z = 0).  Raises EvolutionOverflowError when |Im eps| * t would overflow.
    """
    _, _, _, eps_sq = block_elements(params, float(phi))
    eps_sq = float(eps_sq)
    z = eps_sq * t * t
    c0, c1, _ = _c012(z)
    h = block_matrix(params, phi)
    u = c0 * np.eye(2, dtype=complex) - 1j * t * c1 * h
    return BlockPropagator(matrix=u, time=float(t), eps_sq=eps_sq)


def propagator_derivative(params: ChainParams, phi: float, t: float,
                          mode: str = "analytic", fd_step: float = 1e-6) -> np.ndarray:
    """dU/dh at fixed (phi, t), analytic by default.

    mode="fd" uses a central difference of block_propagator with step fd_step;
    it is retained as an independent cross-check of the analytic formula.
    """
    if mode == "fd":
        up = block_propagator(params.replace(h=params.h + fd_step), phi, t).matrix
        um = block_propagator(params.replace(h=params.h - fd_step), phi, t).matrix
        return (up - um) / (2.0 * fd_step)
    if mode != "analytic":
        raise ParameterError(f"unknown derivative mode {mode!r}")
    g, _, _, eps_sq = block_elements(params, float(phi))
    g, eps_sq = float(g), float(eps_sq)
    z = eps_sq * t * t
    _, c1, c2 = _c012(z)
    h = block_matrix(params, phi)
    d = np.diag([-1.0, 1.0]).astype(complex)
    return (-g * t * t * c1) * np.eye(2, dtype=complex) \
        + (-1j * g * t ** 3 * c2) * h + (-1j * t * c1) * d


def evolve_block(params: ChainParams, phi: float, t: float) -> EvolvedBlockState:
    """Evolve the block vacuum [1, 0] and normalise."""
    u = block_propagator(params, phi, t).matrix
    v = u[:, 0].copy()
    raw = float(np.linalg.norm(v))
    return EvolvedBlockState(state=v / raw, raw_norm=raw,
                             norm_factor=1.0 / raw, time=float(t))


def _scaled_columns(params, phi, t, r):
    """First columns of e^{-r} U and e^{-r} dU/dh for a broken mode.

    For sqrt(-z) = r large, U and dU grow like e^r and their squared norms
    overflow long before cosh itself does.  The QFI quotient is invariant
    under a common rescaling of (U, dU), so both are assembled from the
    rescaled coefficients c0 e^{-r}, c1 e^{-r}, c2 e^{-r} instead.
    """
    g, _, _, eps_sq = (float(x) for x in block_elements(params, float(phi)))
    z = eps_sq * t * t
    e = math.exp(-2.0 * r)
    c0 = 0.5 * (1.0 + e)
    c1 = 0.5 * (1.0 - e) / r
    c2 = (c0 - c1) / z
    hm = block_matrix(params, phi).astype(complex)
    eye = np.eye(2, dtype=complex)
    d = np.diag([-1.0, 1.0]).astype(complex)
    u = c0 * eye - 1j * t * c1 * hm
    du = (-g * t * t * c1) * eye + (-1j * g * t ** 3 * c2) * hm \
        + (-1j * t * c1) * d
    return u[:, 0], du[:, 0]


def _mode_dyn_qfi(params, phi, t, mode, fd_step):
    eps_sq = float(block_elements(params, float(phi))[3])
    z = eps_sq * t * t
    r = math.sqrt(-z) if z < 0.0 else 0.0
    if mode == "analytic" and r > 100.0:
        if r > _OVERFLOW_ARG:
            raise EvolutionOverflowError(
                f"cosh argument {r:.6g} exceeds {_OVERFLOW_ARG:g}; "
                f"the requested time overflows double precision")
        v, w = _scaled_columns(params, phi, t, r)
    else:
        v = block_propagator(params, phi, t).matrix[:, 0]
        w = propagator_derivative(params, phi, t, mode=mode,
                                  fd_step=fd_step)[:, 0]
    n2 = float(np.real(np.vdot(v, v)))
    ww = float(np.real(np.vdot(w, w)))
    vw = np.vdot(v, w)
    val = 4.0 * (ww / n2 - (abs(vw) ** 2) / (n2 * n2))
    if not math.isfinite(val):
        raise EvolutionOverflowError(
            f"per-mode dynamical QFI overflowed double precision at "
            f"phi={phi:.12g}, t={t:g} (mode={mode})")
    if val < _CLAMP_FLOOR:
        raise NumericalConsistencyError(
            f"per-mode dynamical QFI {val:.6e} < {_CLAMP_FLOOR:g} at "
            f"phi={phi:.12g}, t={t:g}: beyond round-off, indicates a bug")
    return max(val, 0.0)


def dynamical_qfi(params: ChainParams, t: float, derivative: str = "analytic",
                  fd_step: float = 1e-6) -> float:
    """Total dynamical QFI of the evolved (normalised) state at time t.

    Per-mode contributions in [-1e-10, 0) are clamped to zero (round-off);
    anything more negative raises NumericalConsistencyError.
    """
    phi = momentum_grid(params.n_sites)
    vals = [_mode_dyn_qfi(params, float(f), float(t), derivative, fd_step)
            for f in phi]
    return float(math.fsum(vals))


def qfi_time_series(params: ChainParams, times, derivative: str = "analytic",
                    fd_step: float = 1e-6) -> DynQfiSeries:
    """Dynamical QFI evaluated on a grid of times (ascending recommended)."""
    times = np.asarray(times, dtype=float)
    vals = np.array([dynamical_qfi(params, float(t), derivative, fd_step)
                     for t in times])
    return DynQfiSeries(times=times, values=vals, params=params,
                        derivative=derivative)
