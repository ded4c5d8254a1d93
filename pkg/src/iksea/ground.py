"""Ground-state quantum Fisher information for field estimation.

Per momentum block the right ground eigenvector (eigenvalue -eps, with the
branch fixed in :mod:`iksea.model`) is

    (u, v) = (a_plus, eps - g),      Dirac norm A = |u|^2 + |v|^2,

and the field-estimation QFI of the Dirac-normalised state splits by branch:

    real branch (eps_sq > 0):
        F = sin^2(phi) (gamma^2 - K^2)^2 / [eps_sq (gamma g + eps K)^2]
          = 4 (u v / (eps A))^2
    imaginary branch (eps_sq < 0):
        F = (gamma^2 - K^2) / (-eps_sq gamma^2)

The total over the positive-momentum grid is accumulated with exact
compensated summation (math.fsum) in ascending mode order, so results are
bit-for-bit reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import (
    BranchError,
    DomainError,
    ExceptionalModeError,
    NearSingularWarning,
    ParameterError,
    OutOfWindowError,
)
from .model import (
    ChainParams,
    block_elements,
    exceptional_field,
    exceptional_tolerance,
    momentum_grid,
)

__all__ = [
    "BlockGroundState",
    "ModeContribution",
    "QfiRecord",
    "block_ground_state",
    "block_qfi_real",
    "block_qfi_imag",
    "ground_qfi",
    "asymptotic_qfi",
    "NEAR_SINGULAR_CONTRIB",
]

#: per-mode contributions at or above this value flag the record as near-singular
NEAR_SINGULAR_CONTRIB = np.finfo(float).max / 1e6


@dataclass(frozen=True)
class BlockGroundState:
    """Unnormalised right ground eigenvector of one 2x2 momentum block.

    u, v : components on {|0>, c_p^dag c_{-p}^dag |0>}
    dirac_norm : A = |u|^2 + |v|^2
    energy : ground eigenvalue -eps (largest imaginary part on the broken branch)
    branch : "real" or "imag"
    """

    u: complex
    v: complex
    dirac_norm: float
    energy: complex
    branch: str

    def vector(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=complex)


@dataclass(frozen=True)
class ModeContribution:
    index: int          # p = 1 .. N/2
    phi: float
    branch: str
    value: float
    near_singular: bool


@dataclass(frozen=True)
class QfiRecord:
    total: float
    per_mode: Tuple[ModeContribution, ...]
    params: ChainParams
    flag_near_singular: bool


def _check_not_exceptional(phi, g, ap, am, eps_sq, index=None):
    if abs(eps_sq) <= exceptional_tolerance(g, ap, am):
        raise ExceptionalModeError(phi, mode_index=index)


def block_ground_state(params: ChainParams, phi: float) -> BlockGroundState:
    """Ground eigenvector of the block at angle phi.

    Raises ExceptionalModeError when the block is defective (eps_sq = 0
    within tolerance).  For the diagonal block a_plus = 0 (gamma = K = 0)
    the canonical basis vector is returned.
    """
    g, ap, am, eps_sq = block_elements(params, float(phi))
    g, ap, am, eps_sq = float(g), float(ap), float(am), float(eps_sq)
    _check_not_exceptional(phi, g, ap, am, eps_sq)
    if eps_sq > 0.0:
        eps = complex(math.sqrt(eps_sq))
        branch = "real"
    else:
        eps = -1j * math.sqrt(-eps_sq)
        branch = "imag"
    if ap == 0.0:
        # block is diagonal: ground state is a basis vector.  (On the grid
        # sin(phi) > 0, so this happens only for gamma = K = 0.)
        u, v = (1.0 + 0j, 0j) if g > 0 else (0j, 1.0 + 0j)
        return BlockGroundState(u, v, 1.0, -abs(g), "real")
    u = complex(ap)
    v = eps - g
    norm = abs(u) ** 2 + abs(v) ** 2
    return BlockGroundState(u, v, float(norm), -eps, branch)


def _qfi_real_eigvec(g, ap, eps_sq):
    """Real-branch QFI via 4 (u v / (eps A))^2; regular on gamma = K."""
    eps = np.sqrt(eps_sq)
    u = ap
    v = eps - g
    a = u * u + v * v
    if np.ndim(a) == 0:
        return 0.0 if a == 0.0 else float(4.0 * (u * v) ** 2 / (eps_sq * a * a))
    out = np.zeros_like(np.asarray(a, dtype=float))
    ok = a > 0
    out[ok] = 4.0 * (u[ok] * v[ok]) ** 2 / (eps_sq[ok] * a[ok] * a[ok])
    return out


def block_qfi_real(params: ChainParams, phi: float) -> float:
    """QFI contribution of a real-branch mode (eps_sq > 0)."""
    g, ap, am, eps_sq = block_elements(params, float(phi))
    g, ap, am, eps_sq = float(g), float(ap), float(am), float(eps_sq)
    _check_not_exceptional(phi, g, ap, am, eps_sq)
    if eps_sq < 0.0:
        raise BranchError(
            f"mode at phi={phi:.12g} has eps_sq={eps_sq:.6g} < 0; use block_qfi_imag")
    gam, k = params.gamma, params.k_ksea
    eps = math.sqrt(eps_sq)
    s = math.sin(float(phi))
    den = gam * g + eps * k
    num = gam * gam - k * k
    if abs(den) <= 1e-10 * max(1.0, abs(gam * g), eps * k):
        # den vanishes only on gamma = K with g < 0, where the closed form is
        # 0/0; the eigenvector form gives the regular limit.
        val = _qfi_real_eigvec(g, ap, eps_sq)
    else:
        val = s * s * num * num / (eps_sq * den * den)
    if val >= NEAR_SINGULAR_CONTRIB:
        warnings.warn(NearSingularWarning(
            f"mode at phi={phi:.12g}: QFI contribution {val:.3e} is within 1e6 "
            f"of float overflow"))
    return float(val)


def block_qfi_imag(params: ChainParams, phi: float) -> float:
    """QFI contribution of an imaginary-branch mode (eps_sq < 0)."""
    g, ap, am, eps_sq = block_elements(params, float(phi))
    g, ap, am, eps_sq = float(g), float(ap), float(am), float(eps_sq)
    _check_not_exceptional(phi, g, ap, am, eps_sq)
    if eps_sq > 0.0:
        raise BranchError(
            f"mode at phi={phi:.12g} has eps_sq={eps_sq:.6g} > 0; use block_qfi_real")
    gam, k = params.gamma, params.k_ksea
    val = (gam * gam - k * k) / (-eps_sq * gam * gam)
    if val >= NEAR_SINGULAR_CONTRIB:
        warnings.warn(NearSingularWarning(
            f"mode at phi={phi:.12g}: QFI contribution {val:.3e} is within 1e6 "
            f"of float overflow"))
    return float(val)


def ground_qfi(params: ChainParams) -> QfiRecord:
    """Total ground-state QFI over the positive-momentum grid.

    Vectorised over modes; the per-mode contributions (each >= 0) are summed
    with math.fsum in ascending mode order.  A defective mode anywhere on the
    grid raises ExceptionalModeError naming the offending angle.
    """
    phi = momentum_grid(params.n_sites)
    g, ap, am, eps_sq = block_elements(params, phi)
    tol = exceptional_tolerance(g, ap, am)
    exc = np.abs(eps_sq) <= tol
    if exc.any():
        i = int(np.argmax(exc))
        raise ExceptionalModeError(phi[i], mode_index=i + 1)

    gam, k = params.gamma, params.k_ksea
    s = np.sin(phi)
    vals = np.empty_like(eps_sq)
    real = eps_sq > 0.0

    if real.any():
        er = np.sqrt(eps_sq[real])
        den = gam * g[real] + er * k
        num = gam * gam - k * k
        with np.errstate(divide="ignore", invalid="ignore"):
            fr = s[real] ** 2 * num * num / (eps_sq[real] * den * den)
        bad = ~np.isfinite(fr)
        if bad.any():
            fr[bad] = _qfi_real_eigvec(g[real][bad], ap[real][bad], eps_sq[real][bad])
        vals[real] = fr
    imag = ~real
    if imag.any():
        vals[imag] = (gam * gam - k * k) / (-eps_sq[imag] * gam * gam)

    near = vals >= NEAR_SINGULAR_CONTRIB
    if near.any():
        warnings.warn(NearSingularWarning(
            f"{int(near.sum())} mode(s) contribute within 1e6 of float overflow "
            f"at h={params.h:.12g}"))
    total = math.fsum(vals.tolist())
    per_mode = tuple(
        ModeContribution(int(p + 1), float(phi[p]),
                         "real" if real[p] else "imag",
                         float(vals[p]), bool(near[p]))
        for p in range(phi.size)
    )
    return QfiRecord(total=float(total), per_mode=per_mode, params=params,
                     flag_near_singular=bool(near.any()))


def asymptotic_qfi(params: ChainParams, regime: str) -> float:
    """Leading-order QFI prediction in one of three analysed regimes.

    regime:
      "critical_unbroken"  K > gamma, h = h_c = 1        ->  (N/pi)^2 / K^2
      "exceptional"        K < gamma, h = h_e            ->  (N/pi)^2 / (gamma^2 - K^2)
      "near_degenerate"    h = 1, kappa = |K - gamma|    ->  16 kappa^2 (N/pi)^6,
                           valid only while pi/N > 10 kappa (OutOfWindowError
                           otherwise).
    """
    n = params.n_sites
    gam, k = params.gamma, params.k_ksea
    h = abs(params.h)
    if regime == "critical_unbroken":
        if not k > gam:
            raise DomainError("critical_unbroken regime requires K > gamma")
        if abs(h - 1.0) > 1e-12:
            raise DomainError(f"critical_unbroken regime requires h = 1, got {params.h!r}")
        return float((n / np.pi) ** 2 / (k * k))
    if regime == "exceptional":
        if not gam > k:
            raise DomainError("exceptional regime requires gamma > K")
        he = exceptional_field(params)
        if abs(h - he) > 1e-12 * max(1.0, he):
            raise DomainError(
                f"exceptional regime requires h = h_e = {he!r}, got {params.h!r}")
        return float((n / np.pi) ** 2 / (gam * gam - k * k))
    if regime == "near_degenerate":
        if abs(h - 1.0) > 1e-12:
            raise DomainError(f"near_degenerate regime requires h = 1, got {params.h!r}")
        kappa = abs(k - gam)
        if not np.pi / n > 10.0 * kappa:
            raise OutOfWindowError(
                f"near-degenerate window requires pi/N > 10*kappa: "
                f"pi/N = {np.pi / n:.6g}, 10*kappa = {10 * kappa:.6g}")
        return float(16.0 * kappa ** 2 * (n / np.pi) ** 6)
    raise ParameterError(f"unknown asymptotic regime {regime!r}")
