"""Generators for the two worked examples.

* Random unitary channel: ``U = exp[-i (H (x) I + X (x) Y) t]`` with
  ``Y = diag(lambda_j)``, so the system-A Kraus operators are
  ``chi_j exp[-i (H + lambda_j X) t]`` and ``sigma = I/d`` is steady.
* Collision model: each field mode is ``J`` bosonic modes truncated at
  ``fock_cutoff`` excitations, coupled for a short time ``dt`` through
  ``exp[dt (-i H (x) I) + sqrt(dt) sum_j (L_j (x) a_j^dagger - L_j^dagger (x) a_j)]``.
  As ``dt -> 0`` the repeated channel approaches the GKSL semigroup
  ``L rho = G rho + rho G^dagger + sum_j L_j rho L_j^dagger`` with
  ``G = -i H - 1/2 sum_j L_j^dagger L_j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .antiunitary import Conjugation, q_map, theta_map, unitary_conj_map
from .channel import KrausChannel, channel_from_unitary, lr_superop, unvec
from .errors import NotSteadyError, ReversalError
from .random_ops import ginibre, random_hermitian, random_state, rng_from
from .reversal import ReversalModel
from .tensor_core import expm_skew, is_hermitian, tensor_product


@dataclass
class RandomUnitarySpec:
    h: np.ndarray
    x: np.ndarray
    lambdas: Sequence[float]
    chi_amps: np.ndarray
    t: float
    c_phase: float = 0.0

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=complex)
        self.x = np.asarray(self.x, dtype=complex)
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.chi_amps = np.asarray(self.chi_amps, dtype=complex)
        if not (is_hermitian(self.h, 1e-12) and is_hermitian(self.x, 1e-12)):
            raise ReversalError("h and x must be Hermitian")
        if self.h.shape != self.x.shape:
            raise ReversalError(f"h {self.h.shape} and x {self.x.shape} differ in shape")
        if self.lambdas.shape != self.chi_amps.shape:
            raise ReversalError("one field amplitude per coupling eigenvalue is required")
        if abs(np.linalg.norm(self.chi_amps) - 1) > 1e-12:
            raise ReversalError("chi amplitudes are not normalized")

    @property
    def d(self) -> int:
        return self.h.shape[0]

    @property
    def d_e(self) -> int:
        return self.lambdas.shape[0]

    @classmethod
    def random(cls, d: int, d_e: int, rng, real: bool = False, t: float | None = None) -> "RandomUnitarySpec":
        """Random instance; ``real=True`` gives real symmetric h, x (time-reversal symmetric)."""
        rng = rng_from(rng)
        h = random_hermitian(d, rng, real=real)
        x = random_hermitian(d, rng, real=real)
        lambdas = rng.uniform(-1, 1, d_e)
        chi = random_state(d_e, rng)
        t = float(rng.uniform(0.2, 1.5)) if t is None else t
        return cls(h=h, x=x, lambdas=lambdas, chi_amps=chi, t=t, c_phase=float(rng.uniform(-1, 1)))

    def coupling_unitary(self, j: int) -> np.ndarray:
        """``u_j = exp[-i (H + lambda_j X) t]``."""
        return expm_skew(-1j * (self.h + self.lambdas[j] * self.x) * self.t)

    def interaction(self) -> np.ndarray:
        gen = tensor_product(self.h, np.eye(self.d_e)) + tensor_product(self.x, np.diag(self.lambdas))
        return expm_skew(-1j * gen * self.t)


def reverser_hamiltonian(h: np.ndarray, w: np.ndarray, theta: Conjugation, c_phase: float = 0.0) -> np.ndarray:
    """``-W Theta(H) W^dagger + c``."""
    return -unitary_conj_map(w, theta_map(theta, h)) + c_phase * np.eye(h.shape[0])


def build_random_unitary_model(
    spec: RandomUnitarySpec, w: np.ndarray | None = None, theta: Conjugation | None = None
) -> ReversalModel:
    """Model with ``sigma = I/d`` and reverser ``V = e^{-ict} sum_j v_j (x) |j><j|``, ``v_j = W Theta(u_j) W^dagger``."""
    d, d_e = spec.d, spec.d_e
    w = np.eye(d, dtype=complex) if w is None else np.asarray(w, dtype=complex)
    theta = Conjugation.standard(d) if theta is None else theta
    phase = np.exp(-1j * spec.c_phase * spec.t)
    v = np.zeros((d * d_e, d * d_e), dtype=complex)
    for j in range(d_e):
        v_j = unitary_conj_map(w, theta_map(theta, spec.coupling_unitary(j)))
        proj = np.zeros((d_e, d_e))
        proj[j, j] = 1
        v += np.kron(v_j, proj)
    return ReversalModel(
        u=spec.interaction(),
        chi=spec.chi_amps,
        sigma=np.eye(d) / d,
        w=w,
        theta=theta,
        v=phase * v,
        chi_tilde=phase * spec.chi_amps,
    )


def build_reverser_variant(
    spec: RandomUnitarySpec, r: float, w: np.ndarray | None = None, theta: Conjugation | None = None, sign: float = -1.0
) -> np.ndarray:
    """``exp[-i (H~ (x) I + X~ (x) Y) tau]`` with ``H~ = r(-W Theta H + c)``, ``X~ = -r W Theta X``, ``tau = t / r``.

    ``sign=+1`` flips the sign of both transported operators (a deliberately
    wrong reverser used as a counterexample).
    """
    if r == 0:
        raise ReversalError("r must be non-zero")
    d, d_e = spec.d, spec.d_e
    w = np.eye(d, dtype=complex) if w is None else np.asarray(w, dtype=complex)
    theta = Conjugation.standard(d) if theta is None else theta
    h_b = r * (sign * unitary_conj_map(w, theta_map(theta, spec.h)) + spec.c_phase * np.eye(d))
    x_b = sign * r * unitary_conj_map(w, theta_map(theta, spec.x))
    gen = tensor_product(h_b, np.eye(d_e)) + tensor_product(x_b, np.diag(spec.lambdas))
    return expm_skew(-1j * gen * (spec.t / r))


@dataclass
class CollisionSpec:
    h: np.ndarray
    jump_ops: list
    dt: float
    fock_cutoff: int = 1
    c_phase: float = 0.0

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=complex)
        self.jump_ops = [np.asarray(op, dtype=complex) for op in self.jump_ops]
        if not is_hermitian(self.h, 1e-12):
            raise ReversalError("h must be Hermitian")
        if self.dt <= 0:
            raise ReversalError("dt must be positive")
        if self.fock_cutoff < 1:
            raise ReversalError("fock_cutoff must be >= 1 to represent a_j^dagger on the vacuum")
        if any(op.shape != self.h.shape for op in self.jump_ops):
            raise ReversalError("jump operators must match the Hamiltonian shape")

    @property
    def d(self) -> int:
        return self.h.shape[0]

    @property
    def n_modes(self) -> int:
        return len(self.jump_ops)

    @property
    def d_e(self) -> int:
        return (self.fock_cutoff + 1) ** self.n_modes

    def with_dt(self, dt: float) -> "CollisionSpec":
        return CollisionSpec(self.h, self.jump_ops, dt, self.fock_cutoff, self.c_phase)

    def drift(self) -> np.ndarray:
        """``G = -i H - 1/2 sum_j L_j^dagger L_j``."""
        return -1j * self.h - 0.5 * sum((op.conj().T @ op for op in self.jump_ops), np.zeros_like(self.h))


def annihilation_ops(n_modes: int, cutoff: int) -> list[np.ndarray]:
    """Truncated ``a_j`` on ``(C^{cutoff+1})^{(x) n_modes}``, mode 1 slowest."""
    n = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)
    eye = np.eye(n)
    return [tensor_product(*[a if k == j else eye for k in range(n_modes)]) for j in range(n_modes)]


def field_basis_order(n_modes: int, cutoff: int) -> list[int]:
    """Field basis indices ordered vacuum, single excitations of modes 1..J, then the rest."""
    n = cutoff + 1
    vac = 0
    singles = [n ** (n_modes - 1 - j) for j in range(n_modes)]
    rest = [k for k in range(n**n_modes) if k != vac and k not in singles]
    return [vac] + singles + rest


def _system_field_generator(h, jump_ops, dt, cutoff) -> np.ndarray:
    ops = annihilation_ops(len(jump_ops), cutoff)
    d_e = (cutoff + 1) ** len(jump_ops)
    gen = dt * tensor_product(-1j * h, np.eye(d_e))
    for lj, aj in zip(jump_ops, ops):
        gen = gen + np.sqrt(dt) * (tensor_product(lj, aj.conj().T) - tensor_product(lj.conj().T, aj))
    return gen


def build_collision_unitary(spec: CollisionSpec) -> tuple[np.ndarray, KrausChannel]:
    """Exact unitary of the collision step and the Kraus family ``<k|U|vac>``.

    The Kraus list follows :func:`field_basis_order`: ``f_0`` for the vacuum,
    ``f_1..f_J`` for single excitations, then multi-excitation terms.
    """
    u = expm_skew(_system_field_generator(spec.h, spec.jump_ops, spec.dt, spec.fock_cutoff))
    frame = np.eye(spec.d_e)[field_basis_order(spec.n_modes, spec.fock_cutoff)]
    vac = np.zeros(spec.d_e)
    vac[0] = 1
    return u, channel_from_unitary(u, vac, frame)


def gksl_apply(spec: CollisionSpec, rho: np.ndarray) -> np.ndarray:
    g = spec.drift()
    rho = np.asarray(rho, dtype=complex)
    return g @ rho + rho @ g.conj().T + sum((op @ rho @ op.conj().T for op in spec.jump_ops), np.zeros_like(rho))


def gksl_superop(spec: CollisionSpec) -> np.ndarray:
    g = spec.drift()
    eye = np.eye(spec.d)
    out = lr_superop(g, eye) + lr_superop(eye, g.conj().T)
    for op in spec.jump_ops:
        out = out + lr_superop(op, op.conj().T)
    return out


@dataclass
class GKSLReverser:
    h: np.ndarray
    jump_ops: list = field(default_factory=list)


def gksl_reverser_ops(
    spec: CollisionSpec, sigma: np.ndarray, w: np.ndarray | None = None, theta: Conjugation | None = None,
    tol: float = 1e-9,
) -> GKSLReverser:
    """``H~ = (i/2)(J W Q G - W Q G) + c`` and ``L~_j = -W Q L_j``."""
    residual = np.linalg.norm(gksl_apply(spec, sigma))
    if residual > tol:
        raise NotSteadyError(f"sigma is not stationary for the generator (residual {residual:.3e})")
    w = np.eye(spec.d, dtype=complex) if w is None else np.asarray(w, dtype=complex)
    theta = Conjugation.standard(spec.d) if theta is None else theta

    def transport(x):
        return unitary_conj_map(w, q_map(sigma, theta, x))

    wqg = transport(spec.drift())
    h_b = 0.5j * (wqg.conj().T - wqg) + spec.c_phase * np.eye(spec.d)
    return GKSLReverser(h=(h_b + h_b.conj().T) / 2, jump_ops=[-transport(op) for op in spec.jump_ops])


def build_collision_reverser(spec: CollisionSpec, rev: GKSLReverser) -> tuple[np.ndarray, np.ndarray]:
    """Reverser unitary ``V`` from ``(H~, L~_j)`` and the final field state ``e^{-ic dt}|vac>``."""
    v = expm_skew(_system_field_generator(rev.h, rev.jump_ops, spec.dt, spec.fock_cutoff))
    chi_tilde = np.zeros(spec.d_e, dtype=complex)
    chi_tilde[0] = np.exp(-1j * spec.c_phase * spec.dt)
    return v, chi_tilde


def collision_kraus_discrepancy(spec: CollisionSpec, sigma: np.ndarray, w=None, theta=None) -> float:
    """``max_j || <j|V^dagger|chi~> - W Q f_j ||`` for the reverser built from the GKSL operators."""
    w = np.eye(spec.d, dtype=complex) if w is None else np.asarray(w, dtype=complex)
    theta = Conjugation.standard(spec.d) if theta is None else theta
    _, f = build_collision_unitary(spec)
    v, chi_tilde = build_collision_reverser(spec, gksl_reverser_ops(spec, sigma, w, theta))
    frame = np.eye(spec.d_e)[field_basis_order(spec.n_modes, spec.fock_cutoff)]
    g = channel_from_unitary(v.conj().T, chi_tilde, frame).kraus
    expected = [unitary_conj_map(w, q_map(sigma, theta, fj)) for fj in f.kraus]
    return max(float(np.linalg.norm(a - b)) for a, b in zip(g, expected))


def thermal_qubit_spec(dt: float, omega: float = 1.0, gamma: float = 0.5, n_th: float = 0.3) -> CollisionSpec:
    """Qubit with Hamiltonian ``omega |1><1|`` exchanging excitations with a thermal bath."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    return CollisionSpec(
        h=np.diag([0.0, omega]),
        jump_ops=[np.sqrt(gamma * (n_th + 1)) * lower, np.sqrt(gamma * n_th) * lower.conj().T],
        dt=dt,
    )


def thermal_qubit_state(n_th: float = 0.3) -> np.ndarray:
    p1 = n_th / (2 * n_th + 1)
    return np.diag([1 - p1, p1]).astype(complex)


def random_collision_spec(d: int, n_jumps: int, dt: float, rng, scale: float = 0.5) -> CollisionSpec:
    """Generic generator with random Hamiltonian and jump operators (no detailed balance)."""
    rng = rng_from(rng)
    h = random_hermitian(d, rng)
    jumps = [scale * ginibre(d, d, rng) for _ in range(n_jumps)]
    return CollisionSpec(h=h, jump_ops=jumps, dt=dt)


def gksl_steady_state(spec: CollisionSpec) -> np.ndarray:
    """Stationary state of the generator from the null vector of its superoperator."""
    _, s, vh = np.linalg.svd(gksl_superop(spec))
    if s[-2] < 1e-9:
        raise ReversalError("generator has a degenerate stationary space")
    sigma = unvec(vh[-1].conj(), spec.d)
    sigma = sigma / np.trace(sigma)
    return (sigma + sigma.conj().T) / 2


def fit_order(xs, ys) -> tuple[float, float]:
    """Slope and R^2 of a least-squares line through ``(log x, log y)``."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    return float(slope), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
