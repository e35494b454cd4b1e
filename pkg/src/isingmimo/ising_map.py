"""Hamiltonian encodings of a MIMO instance.

Two equivalent encodings of the residual objective ||y - Hx||^2 are built
here: a binary spin model over {-1,+1}^n obtained through a per-axis
binary-expansion transform, and a symbol-native model whose variables take
PAM-level values on two axes (one variable per transmitted symbol). Both
store enough constants that their energies can be compared directly against
residual norms in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RealizedChannel
from .constellation import pam_levels

__all__ = [
    "TransformSpec",
    "BinaryIsingModel",
    "PditModel",
    "build_transform",
    "symbols_to_spins",
    "spins_to_symbols",
    "build_binary_model",
    "binary_energy",
    "build_pdit_model",
    "pdit_energy",
    "pdit_local_field",
    "pdit_delta_energy",
]


@dataclass(frozen=True, eq=False)
class TransformSpec:
    """Spin-to-amplitude transform x_real = t_matrix @ s.

    ``t_matrix`` is sqrt(M) * kron(v, I_2N) with v = [2^-1, ..., 2^-B],
    B = log2(sqrt(M)); the spin vector is laid out as B significance groups
    of 2N spins, most significant group first.
    """

    order: int
    n_sym: int
    b_per_axis: int
    v: np.ndarray
    t_matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class BinaryIsingModel:
    """Spin Hamiltonian -1/2 s'Js - h's whose value + offset is the residual norm."""

    j_matrix: np.ndarray
    h_vector: np.ndarray
    offset: float
    n: int


@dataclass(frozen=True, eq=False)
class PditModel:
    """Symbol-native Hamiltonian over N two-axis variables with PAM-level values.

    Only the (1,1) and (1,2) coupling blocks are stored; the full block
    structure is J22 = J11, J21 = -J12. Couplings depend on the channel
    only; the bias depends on channel and received vector.
    """

    j11: np.ndarray
    j12: np.ndarray
    h_vector: np.ndarray  # shape (N, 2): real-axis and imag-axis biases
    pam_levels: np.ndarray
    n: int


def build_transform(n_sym: int, order: int) -> TransformSpec:
    """Build the spin transform for an n_sym-symbol M-QAM instance."""
    if order < 4:
        raise ValueError("transform is defined for QAM orders >= 4; BPSK bypasses it")
    b = int(round(np.log2(np.sqrt(order))))
    if 4**b != order:
        raise ValueError(f"order must be an even power of 2; got {order}")
    v = 2.0 ** -np.arange(1, b + 1)
    t_matrix = np.sqrt(order) * np.kron(v, np.eye(2 * n_sym))
    return TransformSpec(order, n_sym, b, v, t_matrix)


def symbols_to_spins(x: np.ndarray, order: int) -> np.ndarray:
    """Binarize symbols into the spin layout of :func:`build_transform`.

    BPSK passes through (s = x). For QAM each axis value is peeled into B
    signed halvings: the most significant spin is the sign of the remainder
    at weight sqrt(M)/2, and so on down to weight 1.
    """
    x = np.asarray(x, dtype=complex)
    if order == 2:
        if not np.isin(x.real, (-1.0, 1.0)).all() or (x.imag != 0).any():
            raise ValueError("BPSK symbols must be -1 or +1")
        return x.real.astype(float)
    b = int(round(np.log2(np.sqrt(order))))
    levels = pam_levels(1 << b)
    axes = np.concatenate([x.real, x.imag])
    if not np.isin(axes, levels).all():
        raise ValueError(f"symbol axis values must lie on PAM({1 << b}) levels")
    groups = []
    rem = axes.copy()
    for k in range(1, b + 1):
        weight = np.sqrt(order) * 2.0**-k
        s_k = np.where(rem >= 0, 1.0, -1.0)
        rem = rem - weight * s_k
        groups.append(s_k)
    return np.concatenate(groups)


def spins_to_symbols(s: np.ndarray, n_sym: int, order: int) -> np.ndarray:
    """Inverse of :func:`symbols_to_spins`: apply the transform, recombine axes."""
    s = np.asarray(s, dtype=float)
    if order == 2:
        if s.shape != (n_sym,):
            raise ValueError(f"expected {n_sym} spins for BPSK, got {s.shape}")
        return s.astype(complex)
    t = build_transform(n_sym, order)
    if s.shape != (t.t_matrix.shape[1],):
        raise ValueError(
            f"expected {t.t_matrix.shape[1]} spins for N={n_sym}, M={order}; got {s.shape}"
        )
    x_real = t.t_matrix @ s
    return x_real[:n_sym] + 1j * x_real[n_sym:]


def build_binary_model(
    rc: RealizedChannel, transform: TransformSpec | None = None
) -> BinaryIsingModel:
    """Expand ||y_real - H_real T s||^2 into couplings, biases, and an offset.

    The returned model satisfies binary_energy(s) + offset == residual for
    every spin assignment; the quadratic diagonal (s_i^2 = 1) is folded into
    the offset and the coupling diagonal is zero.
    """
    if transform is None:
        if not rc.bpsk_mode:
            raise ValueError("QAM realization requires a TransformSpec")
        heff = rc.h_real
    else:
        if rc.bpsk_mode:
            raise ValueError("BPSK realization does not take a transform")
        heff = rc.h_real @ transform.t_matrix
    gram = heff.T @ heff
    lin = heff.T @ rc.y_real
    j_matrix = -2.0 * gram
    np.fill_diagonal(j_matrix, 0.0)
    h_vector = 2.0 * lin
    offset = float(np.trace(gram) + rc.y_real @ rc.y_real)
    return BinaryIsingModel(j_matrix, h_vector, offset, n=h_vector.size)


def binary_energy(s: np.ndarray, model: BinaryIsingModel) -> float:
    """-1/2 s'Js - h's for one spin vector."""
    s = np.asarray(s, dtype=float)
    if s.shape != (model.n,):
        raise ValueError(f"expected {model.n} spins, got {s.shape}")
    return float(-0.5 * s @ (model.j_matrix @ s) - model.h_vector @ s)


def build_pdit_model(H: np.ndarray, y: np.ndarray, order: int) -> PditModel:
    """Symbol-native couplings and biases from the complex instance.

    ``order`` fixes only the admissible PAM levels; the couplings depend on
    H alone and the bias on (H, y).
    """
    if order < 4:
        raise ValueError("symbol-native model is defined for QAM orders >= 4")
    H = np.asarray(H)
    y = np.asarray(y)
    h1, h2 = H.real, H.imag
    y1, y2 = y.real, y.imag
    bias_re = 2.0 * (h1.T @ y1 + h2.T @ y2)
    bias_im = 2.0 * (h1.T @ y2 - h2.T @ y1)
    j11 = -2.0 * (h1.T @ h1 + h2.T @ h2)
    j12 = -2.0 * (-h1.T @ h2 + h2.T @ h1)
    n_lev = int(round(np.sqrt(order)))
    return PditModel(
        j11=j11,
        j12=j12,
        h_vector=np.stack([bias_re, bias_im], axis=1),
        pam_levels=pam_levels(n_lev),
        n=H.shape[1],
    )


def _check_state(d: np.ndarray, model: PditModel) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.shape != (model.n, 2):
        raise ValueError(f"state must have shape ({model.n}, 2); got {d.shape}")
    if not np.isin(d, model.pam_levels).all():
        raise ValueError("state values must lie on the model's PAM levels")
    return d


def pdit_energy(d: np.ndarray, model: PditModel) -> float:
    """Full-system energy of a (N, 2) symbol-axis state.

    Equals ||y - H x(d)||^2 - ||y||^2 for models built from an instance,
    with x(d) = d[:, 0] + 1j d[:, 1].
    """
    d = _check_state(d, model)
    d1, d2 = d[:, 0], d[:, 1]
    lin = model.h_vector[:, 0] @ d1 + model.h_vector[:, 1] @ d2
    quad = (
        d1 @ (model.j11 @ d1) + d2 @ (model.j11 @ d2) + 2.0 * (d1 @ (model.j12 @ d2))
    )
    return float(-(lin + 0.5 * quad))


def pdit_local_field(i: int, d: np.ndarray, model: PditModel) -> np.ndarray:
    """Two-axis local field at site i, including the j = i self term."""
    d = _check_state(d, model)
    d1, d2 = d[:, 0], d[:, 1]
    f1 = model.h_vector[i, 0] + model.j11[i] @ d1 + model.j12[i] @ d2
    f2 = model.h_vector[i, 1] - model.j12[i] @ d1 + model.j11[i] @ d2
    return np.array([f1, f2])


def pdit_delta_energy(
    i: int, d0: np.ndarray, d1: np.ndarray, state: np.ndarray, model: PditModel
) -> float:
    """Energy change from moving site i from d0 to d1, via the local field.

    Computed as (d0 - d1) . I_i minus the self-coupling correction, which
    reproduces the direct full-energy difference exactly.
    """
    state = _check_state(state, model)
    d0 = np.asarray(d0, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    if not np.array_equal(state[i], d0):
        raise ValueError(f"d0 {d0} is not the current value of site {i}")
    field = pdit_local_field(i, state, model)
    j_self = np.array(
        [
            [model.j11[i, i], model.j12[i, i]],
            [-model.j12[i, i], model.j11[i, i]],
        ]
    )
    diff = d1 - d0
    correction = d1 @ (j_self @ d1) - 2.0 * (d1 @ (j_self @ d0)) + d0 @ (j_self @ d0)
    return float(-(diff @ field) - 0.5 * correction)
