"""Dense tensor algebra on labelled composite spaces.

Operators and states are plain complex numpy arrays. Composite spaces are
described by a :class:`SpaceLayout`, an ordered list of ``(label, dim)``
pairs; the first-listed factor is the slowest-varying index (row-major
Kronecker ordering, the same convention as ``np.kron``).

The partial ket operator ``|xi>_y`` maps a state ``psi`` on the remaining
factors to ``psi (x) xi`` with ``xi`` placed at the position of ``y`` in the
layout. Its adjoint is the partial bra ``<xi|_y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import DimensionError, NotFullRankError, ReversalError

ATOL = 1e-10
RANK_TOL = 1e-10
STATE_NORM_TOL = 1e-12


@dataclass(frozen=True)
class SpaceLayout:
    spaces: Tuple[Tuple[str, int], ...]

    def __init__(self, spaces: Iterable[Tuple[str, int]]):
        spaces = tuple((str(label), int(dim)) for label, dim in spaces)
        labels = [label for label, _ in spaces]
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate space labels in {labels}")
        if any(dim < 1 for _, dim in spaces):
            raise DimensionError(f"space dimensions must be >= 1, got {spaces}")
        object.__setattr__(self, "spaces", spaces)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.spaces)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(dim for _, dim in self.spaces)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"unknown space label {label!r}; layout has {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def without(self, *labels: str) -> "SpaceLayout":
        for label in labels:
            self.index(label)
        return SpaceLayout((lab, d) for lab, d in self.spaces if lab not in labels)

    def embed(self, op: np.ndarray, on: Sequence[str]) -> np.ndarray:
        """Lift ``op`` acting on the factors ``on`` (in that order) to the full layout."""
        on = list(on)
        idx = [self.index(label) for label in on]
        if len(set(idx)) != len(idx):
            raise DimensionError(f"repeated label in {on}")
        on_dims = [self.dims[i] for i in idx]
        d_on = int(np.prod(on_dims))
        op = np.asarray(op, dtype=complex)
        if op.shape != (d_on, d_on):
            raise DimensionError(f"operator shape {op.shape} does not match factors {on} of dim {d_on}")
        rest = [label for label in self.labels if label not in on]
        rest_dims = [self.dim_of(label) for label in rest]
        full = np.kron(op, np.eye(int(np.prod(rest_dims)), dtype=complex))
        order = on + rest
        n = len(order)
        full = full.reshape(on_dims + rest_dims + on_dims + rest_dims)
        perm = [order.index(label) for label in self.labels]
        full = full.transpose(perm + [p + n for p in perm])
        return full.reshape(self.dim, self.dim)

    def partial_trace(self, x: np.ndarray, over: str | Sequence[str]) -> np.ndarray:
        over = [over] if isinstance(over, str) else list(over)
        x = np.asarray(x)
        if x.shape != (self.dim, self.dim):
            raise DimensionError(f"operator shape {x.shape} does not match layout dim {self.dim}")
        dims = list(self.dims)
        t = x.reshape(dims + dims)
        # trace highest index first so remaining axis positions stay valid
        for k in sorted((self.index(label) for label in over), reverse=True):
            n = t.ndim // 2
            t = np.trace(t, axis1=k, axis2=k + n)
        keep = self.without(*over)
        return t.reshape(keep.dim, keep.dim)

    def partial_ket(self, xi: np.ndarray, on: str) -> np.ndarray:
        """Matrix of ``|xi>_on``: complement of ``on`` -> full layout."""
        k = self.index(on)
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        if xi.shape[0] != self.dims[k]:
            raise DimensionError(f"vector of length {xi.shape[0]} placed on {on!r} of dim {self.dims[k]}")
        comp = self.without(on)
        t = np.kron(xi[:, None], np.eye(comp.dim, dtype=complex))
        t = t.reshape([self.dims[k]] + list(comp.dims) + [comp.dim])
        t = np.moveaxis(t, 0, k)
        return t.reshape(self.dim, comp.dim)

    def partial_bra(self, xi: np.ndarray, on: str) -> np.ndarray:
        return self.partial_ket(xi, on).conj().T


def tensor_product(*ops: np.ndarray) -> np.ndarray:
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def partial_trace(x: np.ndarray, layout: SpaceLayout, over: str | Sequence[str]) -> np.ndarray:
    return layout.partial_trace(x, over)


def partial_ket(xi: np.ndarray, layout: SpaceLayout, on: str) -> np.ndarray:
    return layout.partial_ket(xi, on)


def partial_bra(xi: np.ndarray, layout: SpaceLayout, on: str) -> np.ndarray:
    return layout.partial_bra(xi, on)


def partial_bra_sandwich(j: np.ndarray, u: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """``<j|_E u |chi>_E`` for ``u`` on ``system (x) E`` with E the last factor."""
    j = np.asarray(j, dtype=complex).reshape(-1)
    chi = np.asarray(chi, dtype=complex).reshape(-1)
    if j.shape != chi.shape:
        raise DimensionError(f"bra of length {j.shape[0]} vs ket of length {chi.shape[0]}")
    d_e = chi.shape[0]
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] % d_e:
        raise DimensionError(f"operator of shape {u.shape} is not on a system (x) E({d_e}) space")
    d_s = u.shape[0] // d_e
    t = u.reshape(d_s, d_e, d_s, d_e)
    return np.einsum("e,aebf,f->ab", j.conj(), t, chi)


def hs_inner(y: np.ndarray, x: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``tr(y^dagger x)``, antilinear in ``y``."""
    y = np.asarray(y)
    x = np.asarray(x)
    if y.shape != x.shape:
        raise DimensionError(f"shapes {y.shape} and {x.shape} differ")
    return complex(np.vdot(y, x))


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.linalg.norm(m - m.conj().T) <= atol * max(1.0, np.linalg.norm(m))


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])))


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_defect(u) < atol


def pd_power(m: np.ndarray, s: float, rank_tol: float = RANK_TOL) -> np.ndarray:
    """``m**s`` for Hermitian positive-definite ``m`` via eigendecomposition.

    Raises NotFullRankError when the smallest eigenvalue is below
    ``rank_tol`` times the largest.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise ReversalError("pd_power needs a Hermitian matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w[-1] <= 0 or w[0] <= rank_tol * w[-1]:
        raise NotFullRankError(f"matrix is not positive-definite (eigenvalues {w[0]:.3e} .. {w[-1]:.3e})")
    return (v * w**s) @ v.conj().T


def expm_skew(g: np.ndarray) -> np.ndarray:
    """``exp(g)`` for anti-Hermitian ``g``, through the eigensystem of ``i g``."""
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {g.shape}")
    if np.linalg.norm(g + g.conj().T) > ATOL * max(1.0, np.linalg.norm(g)):
        raise ReversalError("expm_skew needs an anti-Hermitian generator")
    h = 1j * g
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(-1j * w)) @ v.conj().T


def as_state(v: np.ndarray, dim: int | None = None, tol: float = STATE_NORM_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"state has length {v.shape[0]}, expected {dim}")
    if abs(np.linalg.norm(v) - 1) > tol:
        raise ReversalError(f"state is not normalized (norm {np.linalg.norm(v):.15f})")
    return v


def as_frame(frame: Sequence[np.ndarray] | np.ndarray, dim: int | None = None, tol: float = ATOL) -> np.ndarray:
    """Stack an overcomplete system as rows and check ``sum_j |j><j| = I``."""
    f = np.atleast_2d(np.asarray(frame, dtype=complex))
    if dim is not None and f.shape[1] != dim:
        raise DimensionError(f"frame vectors have length {f.shape[1]}, expected {dim}")
    defect = np.linalg.norm(f.T @ f.conj() - np.eye(f.shape[1]))
    if defect > tol:
        raise ReversalError(f"frame is not complete (defect {defect:.3e})")
    return f


def standard_frame(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)
