"""Seeded random instances for tests, sweeps and demos."""
from __future__ import annotations

import numpy as np


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(rows: int, cols: int, rng) -> np.ndarray:
    rng = rng_from(rng)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, rng) -> np.ndarray:
    """Haar-distributed unitary (QR with phase fix)."""
    q, r = np.linalg.qr(ginibre(d, d, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_isometry(rows: int, cols: int, rng) -> np.ndarray:
    return random_unitary(rows, rng)[:, :cols]


def random_hermitian(d: int, rng, scale: float = 1.0, real: bool = False) -> np.ndarray:
    rng = rng_from(rng)
    a = rng.standard_normal((d, d)) if real else ginibre(d, d, rng)
    return scale * (a + a.conj().T) / 2


def random_state(d: int, rng) -> np.ndarray:
    v = ginibre(d, 1, rng).reshape(-1)
    return v / np.linalg.norm(v)


def random_density(d: int, rng, real: bool = False) -> np.ndarray:
    """Full-rank density matrix; eigenvalues kept away from zero."""
    rng = rng_from(rng)
    a = rng.standard_normal((d, d)) if real else ginibre(d, d, rng)
    rho = a @ a.conj().T + 0.1 * np.eye(d)
    return rho / np.trace(rho).real


def random_kraus(d: int, n_kraus: int, rng) -> list[np.ndarray]:
    """Kraus operators of a random CPTP map from a random isometry."""
    iso = random_isometry(d * n_kraus, d, rng)
    return [iso[k * d:(k + 1) * d, :] for k in range(n_kraus)]


def random_frame(d: int, n: int, rng) -> np.ndarray:
    """Overcomplete system of ``n >= d`` vectors (rows) resolving the identity."""
    iso = random_isometry(n, d, rng)
    return iso.conj()
