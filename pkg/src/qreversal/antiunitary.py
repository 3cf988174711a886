"""Conjugations, antiunitary operators and the operator maps built from them.

A conjugation is stored by the orthonormal basis it fixes; acting on a vector
means changing into that basis, conjugating entrywise and changing back.
Antilinear maps are only ever applied to operators, never flattened into
superoperator matrices (a complex matrix cannot represent antilinearity).

Maps on operators provided here::

    theta_map          X -> theta X theta
    adjoint_map        X -> X^dagger
    unitary_conj_map   X -> W X W^dagger
    modular_pow        X -> sigma^s X sigma^-s
    q_map              X -> Theta(adjoint(sigma^-1/2 X sigma^1/2))
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotFullRankError, NotUnitaryError, ReversalError
from .tensor_core import ATOL, is_unitary, pd_power, unitarity_defect

DENSITY_TRACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Conjugation:
    """Conjugation fixing the columns of ``basis``."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimensionError(f"conjugation basis must be square, got shape {b.shape}")
        if unitarity_defect(b) > 1e-12 * max(1, b.shape[0]):
            raise NotUnitaryError("conjugation basis is not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def standard(cls, d: int) -> "Conjugation":
        return cls(np.eye(d, dtype=complex))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Unitary ``C`` with ``theta psi = C conj(psi)``."""
        return self.basis @ self.basis.T

    def apply(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        if psi.shape[0] != self.dim:
            raise DimensionError(f"vector of length {psi.shape[0]} for conjugation on dim {self.dim}")
        b = self.basis
        return b @ np.conj(b.conj().T @ psi)

    def transported(self, w: np.ndarray) -> "Conjugation":
        """The conjugation ``W theta W^dagger`` on the codomain of ``w``."""
        return Conjugation(np.asarray(w, dtype=complex) @ self.basis)


@dataclass(frozen=True, eq=False)
class AntiunitaryOp:
    """Antiunitary ``T = u theta``."""

    u: np.ndarray
    conj: Conjugation

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (self.conj.dim, self.conj.dim):
            raise DimensionError(f"unitary of shape {u.shape} for conjugation on dim {self.conj.dim}")
        if not is_unitary(u):
            raise NotUnitaryError("antiunitary needs a unitary factor")
        object.__setattr__(self, "u", u)

    def inverse(self) -> "AntiunitaryOp":
        # (u theta)^-1 = theta u^dagger = (theta u^dagger theta) theta
        ud = self.u.conj().T
        return AntiunitaryOp(theta_map(self.conj, ud), self.conj)


def apply_antiunitary(t: AntiunitaryOp, psi: np.ndarray) -> np.ndarray:
    return t.u @ t.conj.apply(psi)


def theta_map(theta: Conjugation, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (theta.dim, theta.dim):
        raise DimensionError(f"operator of shape {x.shape} for conjugation on dim {theta.dim}")
    b = theta.basis
    return b @ np.conj(b.conj().T @ x @ b) @ b.conj().T


def adjoint_map(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).conj().T


def unitary_conj_map(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if not is_unitary(w, ATOL):
        raise NotUnitaryError("unitary_conj_map needs a unitary")
    if np.shape(x) != (w.shape[1], w.shape[1]):
        raise DimensionError(f"operator of shape {np.shape(x)} for unitary of shape {w.shape}")
    return w @ x @ w.conj().T


def check_density(sigma: np.ndarray) -> np.ndarray:
    """Validate a full-rank density operator and return it as a complex array."""
    sigma = np.asarray(sigma, dtype=complex)
    if abs(np.trace(sigma) - 1) > DENSITY_TRACE_TOL:
        raise ReversalError(f"density operator has trace {np.trace(sigma):.12g}")
    pd_power(sigma, 1.0)
    return sigma


def modular_pow(sigma: np.ndarray, s: float, x: np.ndarray) -> np.ndarray:
    sigma = check_density(sigma)
    return pd_power(sigma, s) @ np.asarray(x, dtype=complex) @ pd_power(sigma, -s)


def q_map(sigma: np.ndarray, theta: Conjugation, x: np.ndarray) -> np.ndarray:
    """The linear map ``Theta . adjoint . Delta_sigma^{-1/2}``."""
    return theta_map(theta, adjoint_map(modular_pow(sigma, -0.5, x)))


def q_map_inverse(sigma: np.ndarray, theta: Conjugation, y: np.ndarray) -> np.ndarray:
    return modular_pow(sigma, 0.5, adjoint_map(theta_map(theta, y)))


def is_full_rank(sigma: np.ndarray) -> bool:
    try:
        pd_power(sigma, 1.0)
    except (NotFullRankError, ReversalError):
        return False
    return True
