"""Standard quantum detailed balance with respect to a conjugation (SQDB-theta).

A channel ``F`` with steady state ``sigma`` satisfies SQDB-theta when

    <F^n,HS Y, X>_sigma = <F^n,HS Theta X, Theta Y>_sigma   for all X, Y, n >= 0,

with ``<Y, X>_sigma = tr(Y^dagger sigma^1/2 X sigma^1/2)``. Equivalently
``Theta sigma = sigma`` and ``F = Theta F^Petz Theta``. ``check_sqdb_direct``
tests the first form on every pair of matrix units; ``check_sqdb_theta``
tests the second.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .antiunitary import Conjugation, check_density, q_map, theta_map, unitary_conj_map
from .channel import (
    KrausChannel,
    KrausMap,
    hs_adjoint,
    map_distance,
    petz_map,
    theta_conjugate,
    unitary_superop,
    vec,
)
from .errors import NotSteadyError, ReversalError
from .reversal import PASS_TOL, ReversalModel, check_theorem1, f_channel, g_channel
from .reversal import ReversalReport
from .tensor_core import pd_power

C_RESIDUAL_TOL = 1e-8
PINV_CUTOFF = 1e-12
GRAM_RANK_TOL = 1e-10
STEADY_TOL = 1e-9


def _require_steady(f: KrausMap, sigma: np.ndarray) -> np.ndarray:
    sigma = check_density(sigma)
    residual = np.linalg.norm(f.apply(sigma) - sigma)
    if residual > STEADY_TOL:
        raise NotSteadyError(f"sigma is not steady under the channel (residual {residual:.3e})")
    return sigma


def check_sqdb_theta(f: KrausMap, sigma: np.ndarray, theta: Conjugation, tol: float = PASS_TOL) -> ReversalReport:
    """``Theta sigma = sigma`` and ``F = Theta F^Petz Theta``."""
    sigma = _require_steady(f, sigma)
    state_res = float(np.linalg.norm(theta_map(theta, sigma) - sigma))
    map_res = map_distance(f.superop(), theta_conjugate(petz_map(f, sigma), theta))
    return ReversalReport(
        "sqdb_theta",
        max(state_res, map_res),
        tol,
        {"state_residual": state_res, "petz_residual": map_res},
    )


def _matrix_units(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex).reshape(d * d, d, d)


def check_sqdb_direct(
    f: KrausMap, sigma: np.ndarray, theta: Conjugation, n_max: int = 3, tol: float = PASS_TOL
) -> ReversalReport:
    """Evaluate the defining inner-product identity for ``n = 0..n_max`` on all matrix-unit pairs."""
    if n_max < 0:
        raise ReversalError("n_max must be non-negative")
    sigma = _require_steady(f, sigma)
    d = sigma.shape[0]
    root = pd_power(sigma, 0.5)
    units = _matrix_units(d)
    theta_units = np.stack([theta_map(theta, e) for e in units])
    weighted = np.einsum("ab,xbc,cd->xad", root, units, root)
    weighted_theta = np.einsum("ab,xbc,cd->xad", root, theta_units, root)
    adj = hs_adjoint(f)

    images, images_theta = units, theta_units
    per_n = []
    for n in range(n_max + 1):
        if n:
            images = np.stack([adj.apply(e) for e in images])
            images_theta = np.stack([adj.apply(e) for e in images_theta])
        # lhs[y, x] = <A e_y, e_x>_sigma ; rhs[y, x] = <A Theta e_x, Theta e_y>_sigma
        lhs = np.einsum("yab,xab->yx", images.conj(), weighted)
        rhs = np.einsum("xab,yab->yx", images_theta.conj(), weighted_theta)
        per_n.append(float(np.abs(lhs - rhs).max()))
    worst = int(np.argmax(per_n))
    return ReversalReport("sqdb_direct", per_n[worst], tol, {"per_n": per_n, "worst_n": worst})


@dataclass(frozen=True, eq=False)
class CMatrix:
    """Least-squares solution of ``Q f_j = sum_k c_jk f_k`` with diagnostics."""

    c: np.ndarray
    residual: float
    partial_isometry_defect: float
    involution_defect: float
    unitarity_defect: float | None
    linearly_independent: bool

    @property
    def valid(self) -> bool:
        return self.residual <= C_RESIDUAL_TOL

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "partial_isometry_defect": self.partial_isometry_defect,
            "involution_defect": self.involution_defect,
            "unitarity_defect": self.unitarity_defect,
            "linearly_independent": self.linearly_independent,
            "valid": self.valid,
        }


class NoValidCError(ReversalError):
    def __init__(self, result: CMatrix):
        super().__init__(f"no valid c: Q f_j is outside the span of the Kraus family (residual {result.residual:.3e})")
        self.result = result


def solve_c_matrix(f: KrausMap, sigma: np.ndarray, theta: Conjugation, strict: bool = True) -> CMatrix:
    """Minimal-norm ``c`` with ``Q f_j = sum_k c_jk f_k``.

    Raises NoValidCError when the residual exceeds 1e-8 unless ``strict`` is
    false, in which case the (invalid) result is returned for reporting.
    """
    sigma = _require_steady(f, sigma)
    basis = np.stack([vec(k) for k in f.kraus], axis=1)
    images = np.stack([vec(q_map(sigma, theta, k)) for k in f.kraus], axis=1)
    c_t = np.linalg.pinv(basis, rcond=PINV_CUTOFF) @ images
    c = c_t.T
    residual = float(np.linalg.norm(basis @ c_t - images))
    gram = np.linalg.eigvalsh(basis.conj().T @ basis)
    independent = bool(gram[0] > GRAM_RANK_TOL * gram[-1])
    eye = np.eye(c.shape[0])
    result = CMatrix(
        c=c,
        residual=residual,
        partial_isometry_defect=float(np.linalg.norm(c @ c.conj().T @ c - c)),
        involution_defect=float(np.linalg.norm(c @ c - eye)),
        unitarity_defect=float(np.linalg.norm(c.conj().T @ c - eye)) if independent else None,
        linearly_independent=independent,
    )
    if strict and not result.valid:
        raise NoValidCError(result)
    return result


def reverser_kraus_via_c(f: KrausMap, c: CMatrix | np.ndarray, w: np.ndarray) -> list[np.ndarray]:
    """``g_j = sum_k c_jk W f_k W^dagger``."""
    if isinstance(c, CMatrix):
        if not c.valid:
            raise NoValidCError(c)
        c = c.c
    c = np.asarray(c)
    if c.shape != (len(f), len(f)):
        raise ReversalError(f"c has shape {c.shape} for {len(f)} Kraus operators")
    moved = [unitary_conj_map(w, k) for k in f.kraus]
    return [sum(c[j, k] * moved[k] for k in range(len(moved))) for j in range(len(moved))]


def check_corollary2(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    """Under detailed balance the reverser channel is ``W F W^-1``."""
    s_w = unitary_superop(m.w)
    residual = map_distance(g_channel(m).superop(), s_w @ f_channel(m).superop() @ s_w.conj().T)
    return ReversalReport("corollary2", residual, tol)


def check_corollary3(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    """The reverser channel satisfies SQDB for ``theta~ = W theta W^dagger`` about ``W Theta sigma``."""
    if not check_theorem1(m, tol).passed:
        raise ReversalError("precondition unmet: the model does not satisfy the reversal condition")
    if not check_sqdb_theta(f_channel(m), m.sigma, m.theta, tol).passed:
        raise ReversalError("precondition unmet: system A is not in SQDB-theta")
    theta_b = m.theta.transported(m.w)
    st = m.sigma_tilde
    g = g_channel(m)
    state_res = float(np.linalg.norm(theta_map(theta_b, st) - st))
    map_res = map_distance(g.superop(), theta_conjugate(petz_map(g, st), theta_b))
    return ReversalReport(
        "corollary3",
        max(state_res, map_res),
        tol,
        {"state_residual": state_res, "petz_residual": map_res},
    )


def db_symmetrize(kraus: Sequence[np.ndarray], sigma: np.ndarray, theta: Conjugation) -> KrausChannel:
    """Kraus family of ``(K + Theta K^Petz Theta) / 2``.

    Needs ``K sigma = sigma`` and ``Theta sigma = sigma``; the result then
    satisfies SQDB-theta about ``sigma``.
    """
    k = KrausChannel(kraus)
    sigma = _require_steady(k, sigma)
    if np.linalg.norm(theta_map(theta, sigma) - sigma) > STEADY_TOL:
        raise ReversalError("sigma is not invariant under Theta")
    ops = [x / np.sqrt(2) for x in k.kraus] + [q_map(sigma, theta, x) / np.sqrt(2) for x in k.kraus]
    return KrausChannel(ops)
