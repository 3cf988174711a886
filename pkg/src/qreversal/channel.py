"""CPTP maps as Kraus families and as superoperator matrices.

Superoperators use column stacking throughout: ``vec(X)`` stacks the columns
of ``X`` and the map ``X -> A X B`` has matrix ``kron(B.T, A)``. With this
convention the Hilbert-Schmidt inner product is the Euclidean one on vectors,
so the HS adjoint of a superoperator is its conjugate transpose.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .antiunitary import Conjugation, check_density
from .errors import DimensionError, NotFullRankError, ReversalError
from .tensor_core import ATOL, as_frame, as_state, is_unitary, partial_bra_sandwich, pd_power

CP_EIG_TOL = 1e-9
STEADY_TOL = 1e-9
KRAUS_CUTOFF = 1e-10


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v).reshape(-1)
    d = d or int(round(np.sqrt(v.size)))
    return v.reshape(d, -1, order="F")


def lr_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> a X b``."""
    return np.kron(np.asarray(b).T, np.asarray(a))


def superop_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(k.conj(), k) for k in kraus)


def superop_from_map(fn: Callable[[np.ndarray], np.ndarray], d_in: int) -> np.ndarray:
    """Tabulate a linear map column by column on the matrix units."""
    cols = []
    for col in range(d_in * d_in):
        unit = np.zeros(d_in * d_in, dtype=complex)
        unit[col] = 1
        cols.append(vec(fn(unvec(unit, d_in))))
    return np.stack(cols, axis=1)


def apply_superop(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    return unvec(m @ vec(x), int(round(np.sqrt(m.shape[0]))))


def unitary_superop(w: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> W X W^dagger``."""
    w = np.asarray(w, dtype=complex)
    return np.kron(w.conj(), w)


def theta_superop_factor(theta: Conjugation) -> np.ndarray:
    """``S`` with ``vec(Theta X) = S conj(vec X)``."""
    c = theta.matrix
    return np.kron(c.conj(), c)


def theta_conjugate(m: np.ndarray, theta_out: Conjugation, theta_in: Conjugation | None = None) -> np.ndarray:
    """Superoperator of the linear map ``Theta_out . M . Theta_in``."""
    theta_in = theta_in or theta_out
    return theta_superop_factor(theta_out) @ m.conj() @ theta_superop_factor(theta_in).conj()


class KrausMap:
    """Completely positive map ``rho -> sum_j k_j rho k_j^dagger``."""

    def __init__(self, kraus: Sequence[np.ndarray]):
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        if not ks:
            raise ReversalError("a Kraus family needs at least one operator")
        shape = ks[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ks):
            raise DimensionError(f"Kraus operators must share one 2-d shape, got {[k.shape for k in ks]}")
        for k in ks:
            k.setflags(write=False)
        self.kraus = tuple(ks)

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    def __len__(self):
        return len(self.kraus)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.d_in, self.d_in):
            raise DimensionError(f"input of shape {rho.shape} for map on dim {self.d_in}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def superop(self) -> np.ndarray:
        return superop_from_kraus(self.kraus)

    def completeness_defect(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.d_in)))


class KrausChannel(KrausMap):
    """Trace-preserving Kraus family; completeness is checked at construction."""

    def __init__(self, kraus: Sequence[np.ndarray], tol: float = ATOL):
        super().__init__(kraus)
        defect = self.completeness_defect()
        if defect > tol:
            raise ReversalError(f"Kraus family is not trace-preserving (defect {defect:.3e})")

    @classmethod
    def identity(cls, d: int) -> "KrausChannel":
        return cls([np.eye(d)])

    @classmethod
    def unitary(cls, u: np.ndarray) -> "KrausChannel":
        return cls([u])


def apply(c: KrausMap, rho: np.ndarray) -> np.ndarray:
    return c.apply(rho)


def to_superoperator(c: KrausMap) -> np.ndarray:
    return c.superop()


def channel_from_unitary(u: np.ndarray, chi: np.ndarray, frame=None) -> KrausChannel:
    """Kraus family ``<j|_E u |chi>_E`` of the channel ``tr_E[u (rho (x) chi chi^dagger) u^dagger]``.

    ``u`` acts on ``system (x) E`` with E last. ``frame`` is an overcomplete
    system of E given as rows; the standard basis when omitted.
    """
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ReversalError("channel_from_unitary needs a unitary")
    chi = as_state(chi)
    frame = np.eye(chi.shape[0]) if frame is None else as_frame(frame, chi.shape[0])
    return KrausChannel([partial_bra_sandwich(j, u, chi) for j in frame])


def hs_adjoint(c: KrausMap) -> KrausMap:
    """``X -> sum_j k_j^dagger X k_j``; unital when ``c`` is trace-preserving."""
    return KrausMap([k.conj().T for k in c.kraus])


def hs_adjoint_superop(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def sandwich_superop(rho: np.ndarray, power: float = 1.0) -> np.ndarray:
    """Matrix of ``X -> rho^{p/2} X rho^{p/2}``; ``power=-1`` gives the inverse."""
    r = pd_power(rho, power / 2)
    return lr_superop(r, r)


def connes_adjoint(m: np.ndarray, rho: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Adjoint with ``<M Y, X>_rho = <Y, M^Con X>_tau``; ``rho`` on the output of ``m``."""
    rho = check_density(rho)
    tau = check_density(tau)
    return sandwich_superop(tau, -1) @ hs_adjoint_superop(m) @ sandwich_superop(rho)


def petz_map(c: KrausMap | np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Petz recovery map of ``c`` about ``rho`` as a superoperator."""
    m = c.superop() if isinstance(c, KrausMap) else np.asarray(c)
    rho = check_density(rho)
    out = apply_superop(m, rho)
    out = (out + out.conj().T) / 2
    try:
        e_out_inv = sandwich_superop(out, -1)
    except NotFullRankError as exc:
        raise NotFullRankError(f"channel output is not full-rank: {exc}") from None
    return sandwich_superop(rho) @ hs_adjoint_superop(m) @ e_out_inv


def choi_matrix(m: np.ndarray, d_in: int) -> np.ndarray:
    """``sum_ij |i><j| (x) M(|i><j|)`` with the input factor first."""
    d_out = int(round(np.sqrt(m.shape[0])))
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            block = unvec(m[:, i + j * d_in], d_out)
            choi[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = block
    return choi


def is_cptp(m: np.ndarray, d_in: int, tol: float = CP_EIG_TOL) -> bool:
    choi = choi_matrix(m, d_in)
    if np.linalg.norm(choi - choi.conj().T) > tol:
        return False
    if np.linalg.eigvalsh((choi + choi.conj().T) / 2).min() < -tol:
        return False
    d_out = int(round(np.sqrt(m.shape[0])))
    trace_row = vec(np.eye(d_out)).conj() @ m
    return bool(np.linalg.norm(trace_row - vec(np.eye(d_in))) < tol)


def kraus_from_superop(m: np.ndarray, d_in: int, cutoff: float = KRAUS_CUTOFF) -> list[np.ndarray]:
    """Kraus family from the Choi eigendecomposition, dropping eigenvalues below ``cutoff``."""
    choi = choi_matrix(m, d_in)
    w, v = np.linalg.eigh((choi + choi.conj().T) / 2)
    d_out = choi.shape[0] // d_in
    out = []
    for lam, vecs in zip(w[::-1], v[:, ::-1].T):
        if lam < cutoff:
            break
        out.append(np.sqrt(lam) * vecs.reshape(d_in, d_out).T)
    return out


def map_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"superoperators of shape {a.shape} and {b.shape}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True, eq=False)
class SteadyState:
    sigma: np.ndarray
    full_rank: bool
    multiplicity: int
    residual: float


def _null_space(a: np.ndarray, tol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(a)
    return vh[s < tol].conj().T


def steady_state(c: KrausMap | np.ndarray, tol: float = STEADY_TOL) -> SteadyState:
    """Fixed point of a channel from the eigenvalue-1 subspace of its superoperator.

    With several fixed points, the maximally mixed state is projected onto the
    fixed-point space (spectral projector ``R (L^dagger R)^-1 L^dagger`` built
    from right and left null vectors of ``M - I``), which yields the fixed
    state of largest support.
    """
    m = c.superop() if isinstance(c, KrausMap) else np.asarray(c)
    d = int(round(np.sqrt(m.shape[0])))
    a = m - np.eye(d * d)
    right = _null_space(a, tol)
    left = _null_space(a.conj().T, tol)
    if right.shape[1] == 0 or right.shape[1] != left.shape[1]:
        raise ReversalError("no well-separated eigenvalue 1; the map is not a valid channel")
    proj = right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
    sigma = unvec(proj @ vec(np.eye(d) / d), d)
    sigma = (sigma + sigma.conj().T) / 2
    sigma = sigma / np.trace(sigma).real
    residual = float(np.linalg.norm(apply_superop(m, sigma) - sigma))
    if residual > tol:
        raise ReversalError(f"fixed point residual {residual:.3e} exceeds {tol}")
    w = np.linalg.eigvalsh(sigma)
    full_rank = bool(w[0] > 1e-10 * w[-1])
    return SteadyState(sigma=sigma, full_rank=full_rank, multiplicity=right.shape[1], residual=residual)
