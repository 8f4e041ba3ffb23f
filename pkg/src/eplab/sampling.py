"""Seeded random operators for tests and the property suite."""

from __future__ import annotations

import numpy as np


def rng_for(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(n: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    rng = rng_for(seed)
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    Q, R = np.linalg.qr(complex_gaussian(rng, (n, n)))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_low_rank(m: int, n: int, r: int, seed=None, sigma_min: float = 0.1, sigma_max: float = 2.0) -> np.ndarray:
    """``U diag(s) W^*`` with ``r`` singular values drawn from ``[sigma_min, sigma_max]``.

    The result is rank ``r`` only up to rounding: its trailing singular values
    are ~1e-16 rather than exactly zero.
    """
    rng = rng_for(seed)
    if not 0 <= r <= min(m, n):
        raise ValueError(f"rank {r} out of range for a {m}x{n} matrix")
    U = random_unitary(m, rng)[:, :r]
    W = random_unitary(n, rng)[:, :r]
    s = np.sort(rng.uniform(sigma_min, sigma_max, r))[::-1]
    return (U * s) @ W.conj().T


def random_exact_rank(m: int, n: int, r: int, seed=None, sigma_min: float = 0.1, bound: int = 4) -> np.ndarray:
    """A matrix whose floating-point entries form an exactly rank-``r`` matrix.

    Built as ``2^-k A B`` with Gaussian-integer factors, so every product is
    exact in double precision and the kernel has no rounding-induced
    singular values. Draws are rejected until the smallest nonzero singular
    value is at least ``sigma_min``; ``sigma_max`` lands in ``[1, 2)``.
    """
    rng = rng_for(seed)
    if not 0 <= r <= min(m, n):
        raise ValueError(f"rank {r} out of range for a {m}x{n} matrix")
    if r == 0:
        return np.zeros((m, n), dtype=np.complex128)
    for _ in range(1000):
        A = rng.integers(-bound, bound + 1, (m, r)) + 1j * rng.integers(-bound, bound + 1, (m, r))
        B = rng.integers(-bound, bound + 1, (r, n)) + 1j * rng.integers(-bound, bound + 1, (r, n))
        T = A @ B
        s = np.linalg.svd(T, compute_uv=False)
        if s[0] == 0:
            continue
        scale = 2.0 ** -np.floor(np.log2(s[0]))
        if s[r - 1] * scale >= sigma_min:
            return T * scale
    raise RuntimeError("could not draw an exact-rank matrix with the requested conditioning")


def random_nilpotent(n: int, seed=None) -> np.ndarray:
    """Unitarily conjugated strictly upper-triangular matrix (never EP unless zero)."""
    if n < 2:
        raise ValueError("nilpotent fixtures need n >= 2")
    rng = rng_for(seed)
    N = np.triu(complex_gaussian(rng, (n, n)), k=1)
    N[0, n - 1] += 1.0  # keeps it nonzero
    Q = random_unitary(n, rng)
    return Q @ N @ Q.conj().T
