"""System A, a field mode E and a candidate reverser B.

The global state lives on ``A (x) B (x) E`` in that order. System A couples to
the field through ``u`` (on ``A (x) E``), then the reverser couples through
``v`` (on ``B (x) E``), optionally after a field-only unitary ``u_e``. The
joint A-B state is the purification

    |psi> = sum_n sqrt(p_n) |n>_A (x) W theta |n>_A

of the steady state ``sigma = sum_n p_n |n><n|`` of the system-A channel.

Four checkers test the reversal property along independent routes:

* ``check_special_reversal``: statevector simulation of the circuit with no
  intermediate field unitary;
* ``check_theorem3``: reverser Kraus operators against ``W Q f_j``;
* ``check_theorem1``: the reverser channel against the transported Petz map;
* ``check_lemma_fg``: both channels acting on one half of ``|psi><psi|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .antiunitary import Conjugation, check_density, q_map, theta_map, unitary_conj_map
from .channel import (
    KrausChannel,
    channel_from_unitary,
    map_distance,
    petz_map,
    theta_conjugate,
    unitary_superop,
)
from .errors import DimensionError, MissingFieldError, NotSteadyError, NotUnitaryError, ReversalError
from .random_ops import random_unitary
from .tensor_core import SpaceLayout, as_frame, as_state, is_unitary

PASS_TOL = 1e-9
STEADY_TOL = 1e-9
MARGINAL_TOL = 1e-9


def layout(d: int, d_e: int) -> SpaceLayout:
    return SpaceLayout([("A", d), ("B", d), ("E", d_e)])


@dataclass(frozen=True, eq=False)
class ReversalModel:
    """One problem instance; ``w`` defaults to the identity and ``theta`` to standard conjugation."""

    u: np.ndarray
    chi: np.ndarray
    sigma: np.ndarray
    w: np.ndarray | None = None
    theta: Conjugation | None = None
    v: np.ndarray | None = None
    chi_tilde: np.ndarray | None = None
    u_e: np.ndarray | None = None
    frame: np.ndarray | None = None

    def __post_init__(self):
        sigma = check_density(self.sigma)
        d = sigma.shape[0]
        chi = as_state(self.chi)
        d_e = chi.shape[0]
        u = _unitary(self.u, d * d_e, "u")
        w = np.eye(d, dtype=complex) if self.w is None else _unitary(self.w, d, "w")
        theta = Conjugation.standard(d) if self.theta is None else self.theta
        if theta.dim != d:
            raise DimensionError(f"conjugation on dim {theta.dim} for system of dim {d}")
        frame = np.eye(d_e, dtype=complex) if self.frame is None else as_frame(self.frame, d_e)
        for name, value in [("sigma", sigma), ("chi", chi), ("u", u), ("w", w), ("theta", theta), ("frame", frame)]:
            object.__setattr__(self, name, value)
        if self.v is not None:
            object.__setattr__(self, "v", _unitary(self.v, d * d_e, "v"))
        if self.chi_tilde is not None:
            object.__setattr__(self, "chi_tilde", as_state(self.chi_tilde, d_e))
        if self.u_e is not None:
            object.__setattr__(self, "u_e", _unitary(self.u_e, d_e, "u_e"))
        residual = np.linalg.norm(f_channel(self).apply(sigma) - sigma)
        if residual > STEADY_TOL:
            raise NotSteadyError(f"sigma is not steady under F (residual {residual:.3e})")

    @property
    def d_A(self) -> int:
        return self.sigma.shape[0]

    @property
    def d_E(self) -> int:
        return self.chi.shape[0]

    @property
    def layout(self) -> SpaceLayout:
        return layout(self.d_A, self.d_E)

    @property
    def sigma_tilde(self) -> np.ndarray:
        """``W Theta sigma``, the B marginal of the purification."""
        return unitary_conj_map(self.w, theta_map(self.theta, self.sigma))

    def with_reverser(self, v: np.ndarray, chi_tilde: np.ndarray, u_e: np.ndarray | None = None) -> "ReversalModel":
        return replace(self, v=v, chi_tilde=chi_tilde, u_e=u_e)


def _unitary(x, dim: int, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (dim, dim):
        raise DimensionError(f"{name} has shape {x.shape}, expected {(dim, dim)}")
    if not is_unitary(x):
        raise NotUnitaryError(f"{name} is not unitary")
    return x


def _require_reverser(m: ReversalModel):
    if m.v is None or m.chi_tilde is None:
        raise MissingFieldError("this check needs the reverser unitary v and final field state chi_tilde")


@dataclass
class ReversalReport:
    name: str
    residual: float
    tolerance: float
    witnesses: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "witnesses": self.witnesses,
        }


def purify_steady_state(m: ReversalModel) -> np.ndarray:
    """``sum_n sqrt(p_n) |n> (x) W theta |n>`` from the spectral decomposition of sigma."""
    p, vecs = np.linalg.eigh(m.sigma)
    psi = np.zeros(m.d_A * m.d_A, dtype=complex)
    for pn, n in zip(p, vecs.T):
        psi += np.sqrt(pn) * np.kron(n, m.w @ m.theta.apply(n))
    return psi


def f_channel(m: ReversalModel) -> KrausChannel:
    return channel_from_unitary(m.u, m.chi, m.frame)


def g_channel(m: ReversalModel) -> KrausChannel:
    """Kraus operators ``<j|_E v^dagger |chi_tilde>_E``."""
    _require_reverser(m)
    return channel_from_unitary(m.v.conj().T, m.chi_tilde, m.frame)


def reverser_kraus(m: ReversalModel, f: KrausChannel | None = None) -> list[np.ndarray]:
    """Required reverser Kraus operators ``W Q f_j``."""
    f = f_channel(m) if f is None else f
    return [unitary_conj_map(m.w, q_map(m.sigma, m.theta, fj)) for fj in f.kraus]


def _rho_psi(m: ReversalModel) -> np.ndarray:
    psi = purify_steady_state(m)
    return np.outer(psi, psi.conj())


def check_lemma_fg(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    """``(F (x) id)|psi><psi| = (id (x) G)|psi><psi|``."""
    rho = _rho_psi(m)
    eye = np.eye(m.d_A)
    lhs = sum(np.kron(f, eye) @ rho @ np.kron(f, eye).conj().T for f in f_channel(m).kraus)
    rhs = sum(np.kron(eye, g) @ rho @ np.kron(eye, g).conj().T for g in g_channel(m).kraus)
    return ReversalReport("lemma_fg", float(np.linalg.norm(lhs - rhs)), tol)


def transported_petz(m: ReversalModel) -> np.ndarray:
    """Superoperator of ``W Theta F^Petz Theta W^-1``."""
    petz = petz_map(f_channel(m), m.sigma)
    s_w = unitary_superop(m.w)
    return s_w @ theta_conjugate(petz, m.theta) @ s_w.conj().T


def check_theorem1(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    residual = map_distance(g_channel(m).superop(), transported_petz(m))
    return ReversalReport("theorem1", residual, tol)


def check_corollary_steady(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    st = m.sigma_tilde
    residual = float(np.linalg.norm(g_channel(m).apply(st) - st))
    return ReversalReport("corollary_steady", residual, tol)


def _initial_state(m: ReversalModel) -> np.ndarray:
    return np.kron(purify_steady_state(m), m.chi)


def _target_state(m: ReversalModel) -> np.ndarray:
    return np.kron(purify_steady_state(m), m.chi_tilde)


def _compare_states(name: str, out: np.ndarray, target: np.ndarray, tol: float) -> ReversalReport:
    overlap = np.vdot(target, out)
    return ReversalReport(
        name,
        float(np.linalg.norm(out - target)),
        tol,
        {"infidelity": float(max(0.0, 1 - abs(overlap) ** 2))},
    )


def check_special_reversal(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    """Simulate ``(I_A (x) V)(U (x) I_B)|psi>|chi>`` and compare with ``|psi>|chi_tilde>``."""
    _require_reverser(m)
    lay = m.layout
    out = lay.embed(m.v, ["B", "E"]) @ (lay.embed(m.u, ["A", "E"]) @ _initial_state(m))
    return _compare_states("special_reversal", out, _target_state(m), tol)


def check_theorem3(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    g = g_channel(m).kraus
    expected = reverser_kraus(m)
    errs = [float(np.linalg.norm(a - b)) for a, b in zip(g, expected)]
    worst = int(np.argmax(errs))
    return ReversalReport("theorem3", errs[worst], tol, {"worst_kraus_index": worst})


def extract_intermediate_unitary(phi1: np.ndarray, phi2: np.ndarray, d_e: int, tol: float = MARGINAL_TOL) -> np.ndarray:
    """Unitary ``U_E`` with ``(I (x) U_E) phi1 = phi2`` for two purifications (E last).

    Solved as an orthogonal Procrustes problem, which reaches zero residual
    whenever the two states share their reduced state on the other factors.
    """
    m1 = np.asarray(phi1, dtype=complex).reshape(-1, d_e)
    m2 = np.asarray(phi2, dtype=complex).reshape(-1, d_e)
    if m1.shape != m2.shape:
        raise DimensionError(f"states of different lengths {phi1.shape} and {phi2.shape}")
    mismatch = np.linalg.norm(m1 @ m1.conj().T - m2 @ m2.conj().T)
    if mismatch > tol:
        raise ReversalError(f"states are not purifications of the same operator (marginal mismatch {mismatch:.3e})")
    a, _, bh = np.linalg.svd(m1.conj().T @ m2)
    return (a @ bh).T


def _phi1(m: ReversalModel) -> np.ndarray:
    return m.layout.embed(m.u, ["A", "E"]) @ _initial_state(m)


def _phi2(m: ReversalModel) -> np.ndarray:
    return m.layout.embed(m.v.conj().T, ["B", "E"]) @ _target_state(m)


def check_reversal(m: ReversalModel, tol: float = PASS_TOL) -> ReversalReport:
    """General reversal condition, with ``m.u_e`` or else an extracted intermediate unitary."""
    _require_reverser(m)
    phi1, phi2 = _phi1(m), _phi2(m)
    u_e = m.u_e
    if u_e is None:
        try:
            u_e = extract_intermediate_unitary(phi1, phi2, m.d_E, tol=np.inf)
        except ReversalError:
            u_e = np.eye(m.d_E)
    out = m.layout.embed(u_e, ["E"]) @ phi1
    report = _compare_states("reversal", out, phi2, tol)
    report.witnesses["u_e_supplied"] = m.u_e is not None
    return report


def _orthonormal_completion(iso: np.ndarray, rng=None) -> np.ndarray:
    """Columns spanning the orthogonal complement of ``range(iso)``."""
    u, _, _ = np.linalg.svd(iso, full_matrices=True)
    comp = u[:, iso.shape[1]:]
    if rng is not None and comp.shape[1]:
        comp = comp @ random_unitary(comp.shape[1], rng)
    return comp


def _unitary_mapping(source: np.ndarray, target: np.ndarray, rng=None) -> np.ndarray:
    """Unitary sending the orthonormal columns of ``source`` to those of ``target``."""
    for name, iso in [("source", source), ("target", target)]:
        defect = np.linalg.norm(iso.conj().T @ iso - np.eye(iso.shape[1]))
        if defect > 1e-8:
            raise ReversalError(f"{name} columns are not orthonormal (defect {defect:.3e})")
    s = np.hstack([source, _orthonormal_completion(source, rng)])
    t = np.hstack([target, _orthonormal_completion(target)])
    return t @ s.conj().T


def build_reverser_unitary(m: ReversalModel, chi_tilde: np.ndarray | None = None, rng=None) -> np.ndarray:
    """Reverser ``V`` on ``B (x) E`` from the isometry relating two purifications of sigma.

    ``R`` solves ``phi1 = (I_A (x) R) psi``; ``V`` then maps ``R|b>`` to
    ``|b> (x) |chi_tilde>`` and is completed on the orthogonal complement
    (randomly when ``rng`` is given, deterministically otherwise).
    """
    chi_tilde = m.chi if chi_tilde is None else as_state(chi_tilde, m.d_E)
    d, d_e = m.d_A, m.d_E
    psi = purify_steady_state(m).reshape(d, d)
    phi = _phi1(m).reshape(d, d * d_e)
    r = np.linalg.solve(psi, phi).T
    target = np.kron(np.eye(d), chi_tilde.reshape(-1, 1))
    return _unitary_mapping(r, target, rng)


def build_reverser_from_kraus(m: ReversalModel, chi_tilde: np.ndarray | None = None, rng=None) -> np.ndarray:
    """Reverser ``V`` realising ``g_j = W Q f_j`` directly.

    ``V^dagger`` must send ``|b> (x) |chi_tilde>`` to ``sum_j g_j|b> (x) |j>``
    over the model's overcomplete system; the rest is completed.
    """
    chi_tilde = m.chi if chi_tilde is None else as_state(chi_tilde, m.d_E)
    g = reverser_kraus(m)
    iso = sum(np.kron(gj, j.reshape(-1, 1)) for gj, j in zip(g, m.frame))
    source = np.kron(np.eye(m.d_A), chi_tilde.reshape(-1, 1))
    v_dag = _unitary_mapping(source, iso, rng)
    return v_dag.conj().T


CHECKS = {
    "special_reversal": check_special_reversal,
    "theorem3": check_theorem3,
    "theorem1": check_theorem1,
    "lemma_fg": check_lemma_fg,
    "corollary_steady": check_corollary_steady,
    "reversal": check_reversal,
}


def run_checks(m: ReversalModel, names=None, tol: float = PASS_TOL) -> list[ReversalReport]:
    names = list(CHECKS) if names is None else names
    return [CHECKS[name](m, tol=tol) for name in names]
