"""Classical detectors: zero-forcing, MMSE, and exact maximum likelihood.

The exact detector is a depth-first sphere decoder on the real-valued model
with closest-first (Schnorr-Euchner) child ordering and an initially
unbounded radius that shrinks at each leaf, so it returns the true residual
minimizer. A brute-force enumerator over the full candidate space is kept
alongside as an independent oracle for tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import realify
from .constellation import Constellation, demodulate_symbols, quantize_to_alphabet

__all__ = [
    "DetectionResult",
    "SingularChannelError",
    "SearchBudgetError",
    "zf_detect",
    "mmse_detect",
    "ml_exact",
    "ml_exhaustive",
]


class SingularChannelError(ValueError):
    """Channel matrix is rank deficient; linear inversion is undefined."""


class SearchBudgetError(ValueError):
    """Exact search refused: candidate space exceeds the configured budget."""


@dataclass(frozen=True, eq=False)
class DetectionResult:
    symbols: np.ndarray
    bits: np.ndarray
    residual_energy: float
    method: str


def _result(symbols: np.ndarray, H: np.ndarray, y: np.ndarray, c: Constellation, method: str) -> DetectionResult:
    residual = float(np.linalg.norm(y - H @ symbols) ** 2)
    return DetectionResult(symbols, demodulate_symbols(symbols, c), residual, method)


def zf_detect(H: np.ndarray, y: np.ndarray, c: Constellation) -> DetectionResult:
    """Least-squares inversion followed by per-entry quantization."""
    H = np.asarray(H)
    y = np.asarray(y)
    soft, _, rank, _ = np.linalg.lstsq(H, y, rcond=None)
    if rank < H.shape[1]:
        raise SingularChannelError(
            f"channel has rank {rank} < {H.shape[1]} transmit antennas"
        )
    symbols = quantize_to_alphabet(soft, c)
    return _result(symbols, H, y, c, "zf")


def mmse_detect(
    H: np.ndarray, y: np.ndarray, sigma_sq: float, es: float, c: Constellation
) -> DetectionResult:
    """Regularized inversion (H'H + I sigma^2/Es)^-1 H'y, then quantization."""
    H = np.asarray(H)
    y = np.asarray(y)
    if sigma_sq < 0:
        raise ValueError("sigma_sq must be nonnegative")
    gram = H.conj().T @ H + (sigma_sq / es) * np.eye(H.shape[1])
    try:
        soft = np.linalg.solve(gram, H.conj().T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError(str(exc)) from exc
    symbols = quantize_to_alphabet(soft, c)
    return _result(symbols, H, y, c, "mmse")


def _sphere_decode(r_mat: np.ndarray, z: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """argmin over the level grid of ||z - R x||^2 for upper-triangular R."""
    q = r_mat.shape[0]
    n_lev = levels.size
    x = np.zeros(q)
    cand = np.zeros((q, n_lev), dtype=np.intp)
    pos = np.zeros(q, dtype=np.intp)
    acc = np.zeros(q)  # cost of the fixed tail x[k+1:]
    e = np.zeros(q)  # tail-adjusted target at each depth
    best_x = None
    best_cost = np.inf

    def enter(k: int) -> None:
        e[k] = z[k] - r_mat[k, k + 1 :] @ x[k + 1 :]
        cand[k] = np.argsort(np.abs(levels - e[k] / r_mat[k, k]), kind="stable")
        pos[k] = 0

    k = q - 1
    acc[k] = 0.0
    enter(k)
    while True:
        advanced = False
        while pos[k] < n_lev:
            lev = levels[cand[k, pos[k]]]
            pos[k] += 1
            cost = acc[k] + (e[k] - r_mat[k, k] * lev) ** 2
            if cost < best_cost:
                x[k] = lev
                if k == 0:
                    best_cost = cost
                    best_x = x.copy()
                    # Closest-first ordering: later siblings only cost more.
                    break
                acc[k - 1] = cost
                k -= 1
                enter(k)
                advanced = True
                break
            # Closest-first ordering: prune the remaining siblings too.
            pos[k] = n_lev
        if not advanced:
            k += 1
            if k == q:
                break
    return best_x


def ml_exact(
    H: np.ndarray, y: np.ndarray, c: Constellation, max_search_space: float = 2.0**48
) -> DetectionResult:
    """Exact minimizer of ||y - Hx||^2 over the constellation grid.

    Refuses when order**n_tx exceeds ``max_search_space`` so scripted runs
    cannot start an unbounded exponential search by accident.
    """
    H = np.asarray(H)
    y = np.asarray(y)
    n = H.shape[1]
    space = float(c.order) ** n
    if space > max_search_space:
        raise SearchBudgetError(
            f"search space {c.order}**{n} = {space:.3g} exceeds budget {max_search_space:.3g}"
        )
    rc = realify(H, y, c.order)
    a_mat = rc.h_real
    q_mat, r_mat = np.linalg.qr(a_mat)
    diag = np.abs(np.diag(r_mat))
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise SingularChannelError("real-valued channel is numerically rank deficient")
    z = q_mat.T @ rc.y_real
    x_real = _sphere_decode(r_mat, z, c.levels)
    if c.order == 2:
        symbols = x_real.astype(complex)
    else:
        symbols = x_real[:n] + 1j * x_real[n:]
    return _result(symbols, H, y, c, "ml")


def ml_exhaustive(
    H: np.ndarray, y: np.ndarray, c: Constellation, max_candidates: int = 2**20
) -> DetectionResult:
    """Brute-force minimizer; first candidate in lexicographic alphabet order wins ties."""
    H = np.asarray(H)
    y = np.asarray(y)
    n = H.shape[1]
    space = c.order**n
    if space > max_candidates:
        raise SearchBudgetError(
            f"{c.order}**{n} = {space} candidates exceed budget {max_candidates}"
        )
    grid = np.array(list(itertools.product(c.alphabet, repeat=n)))
    residuals = np.abs(y[None, :] - grid @ H.T) ** 2
    best = int(np.argmin(residuals.sum(axis=1)))
    return _result(grid[best], H, y, c, "ml-exhaustive")
