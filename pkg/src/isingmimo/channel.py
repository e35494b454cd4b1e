"""Random MIMO channels, noisy transmission, and the stacked real-valued form.

All randomness flows through explicit seeds. Derived streams are built from
``numpy.random.SeedSequence((master, role, *indices))`` so that distinct
(role, indices) tuples yield statistically independent, reproducible streams;
role tags are the module-level ``ROLE_*`` constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constellation import Constellation, modulate_bits

__all__ = [
    "MimoInstance",
    "RealizedChannel",
    "SeedInfo",
    "derive_seed",
    "derive_rng",
    "generate_channel",
    "noise_sigma_sq",
    "transmit",
    "realify",
    "realify_symbols",
    "build_instance",
    "dump_instance",
    "load_instance",
    "ROLE_CHANNEL",
    "ROLE_MESSAGE",
    "ROLE_NOISE",
    "ROLE_SOLVER",
]

ROLE_CHANNEL = 0
ROLE_MESSAGE = 1
ROLE_NOISE = 2
ROLE_SOLVER = 3


def derive_seed(master_seed: int, *fields: int) -> np.random.SeedSequence:
    """Independent child seed for (master, role, indices...)."""
    return np.random.SeedSequence((int(master_seed),) + tuple(int(f) for f in fields))


def derive_rng(master_seed: int, *fields: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *fields))


@dataclass(frozen=True)
class SeedInfo:
    """Seed tuples used for the channel, message, and noise draws."""

    channel: tuple
    message: tuple
    noise: tuple


@dataclass(frozen=True, eq=False)
class MimoInstance:
    """One detection problem: y = H x0 + n at a given noise level."""

    n_tx: int
    n_rx: int
    channel: np.ndarray
    tx_symbols: np.ndarray
    rx_vector: np.ndarray
    sigma_sq: float
    ebn0_db: float
    seed_info: SeedInfo | None = None


@dataclass(frozen=True, eq=False)
class RealizedChannel:
    """Real-valued stacking of a complex instance.

    QAM: h_real is the 2Nr x 2Nt block matrix [[Re H, -Im H], [Im H, Re H]]
    and the unknown is [Re x; Im x]. BPSK: h_real is the 2Nr x Nt stack
    [Re H; Im H] and the unknown is the real x itself. In both cases
    y_real = [Re y; Im y] and residual norms match the complex model.
    """

    h_real: np.ndarray
    y_real: np.ndarray
    bpsk_mode: bool


def generate_channel(n_rx: int, n_tx: int, seed) -> np.ndarray:
    """i.i.d. Rayleigh channel: entries CN(0, 1), deterministic given seed."""
    if n_tx < 1 or n_rx < n_tx:
        raise ValueError(f"need n_rx >= n_tx >= 1; got n_rx={n_rx}, n_tx={n_tx}")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(0.5)
    return scale * (
        rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))
    )


def noise_sigma_sq(n_tx: int, es: float, order: int, ebn0_db: float) -> float:
    """Total per-entry complex noise variance for a target Eb/N0 in dB.

    sigma^2 = n_tx * Es / (log2(order) * 10**(ebn0_db / 10)). ``ebn0_db``
    may be +inf (noiseless), giving 0.
    """
    if np.isnan(ebn0_db) or ebn0_db == -np.inf:
        raise ValueError(f"ebn0_db must be a real value or +inf; got {ebn0_db}")
    return n_tx * es / (np.log2(order) * 10.0 ** (ebn0_db / 10.0))


def transmit(H: np.ndarray, x0: np.ndarray, sigma_sq: float, seed) -> np.ndarray:
    """y = H x0 + n with circular complex noise of total variance sigma_sq."""
    H = np.asarray(H)
    x0 = np.asarray(x0)
    if H.ndim != 2 or x0.shape != (H.shape[1],):
        raise ValueError(f"shape mismatch: H {H.shape}, x0 {x0.shape}")
    if sigma_sq < 0:
        raise ValueError("sigma_sq must be nonnegative")
    y = H @ x0
    if sigma_sq > 0:
        rng = np.random.default_rng(seed)
        scale = np.sqrt(sigma_sq / 2)
        n_rx = H.shape[0]
        y = y + scale * (rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx))
    return y


def realify(H: np.ndarray, y: np.ndarray, order: int) -> RealizedChannel:
    """Stack a complex instance into its real-valued form."""
    H = np.asarray(H)
    y = np.asarray(y)
    y_real = np.concatenate([y.real, y.imag])
    if order == 2:
        h_real = np.concatenate([H.real, H.imag], axis=0)
        return RealizedChannel(h_real, y_real, bpsk_mode=True)
    h_real = np.block([[H.real, -H.imag], [H.imag, H.real]])
    return RealizedChannel(h_real, y_real, bpsk_mode=False)


def realify_symbols(x: np.ndarray, order: int) -> np.ndarray:
    """Real-valued unknown matching :func:`realify`: [Re x; Im x], or Re x for BPSK."""
    x = np.asarray(x)
    if order == 2:
        return x.real.astype(float)
    return np.concatenate([x.real, x.imag])


def build_instance(
    c: Constellation,
    n: int,
    ebn0_db: float,
    master_seed: int,
    channel_index: int = 0,
    message_index: int = 0,
    ebn0_index: int = 0,
) -> tuple[MimoInstance, np.ndarray]:
    """Generate a seeded square-channel instance plus its transmitted bits."""
    ch_seed = (master_seed, ROLE_CHANNEL, channel_index)
    msg_seed = (master_seed, ROLE_MESSAGE, channel_index, message_index)
    noise_seed = (master_seed, ROLE_NOISE, channel_index, message_index, ebn0_index)
    H = generate_channel(n, n, derive_seed(*ch_seed))
    bits = derive_rng(*msg_seed).integers(0, 2, n * c.bits_per_symbol)
    x0 = modulate_bits(bits, c)
    sigma_sq = noise_sigma_sq(n, c.symbol_energy, c.order, ebn0_db)
    y = transmit(H, x0, sigma_sq, derive_seed(*noise_seed))
    inst = MimoInstance(
        n_tx=n,
        n_rx=n,
        channel=H,
        tx_symbols=x0,
        rx_vector=y,
        sigma_sq=float(sigma_sq),
        ebn0_db=float(ebn0_db),
        seed_info=SeedInfo(ch_seed, msg_seed, noise_seed),
    )
    return inst, bits


def _fmt(v: float) -> str:
    return repr(float(v))


def dump_instance(inst: MimoInstance, path) -> None:
    """Write an instance as line-oriented text (one matrix entry per line)."""
    lines = [
        "isingmimo-instance v1",
        f"n_rx {inst.n_rx}",
        f"n_tx {inst.n_tx}",
        f"sigma_sq {_fmt(inst.sigma_sq)}",
        f"ebn0_db {_fmt(inst.ebn0_db)}",
    ]
    if inst.seed_info is not None:
        for tag in ("channel", "message", "noise"):
            vals = " ".join(str(int(v)) for v in getattr(inst.seed_info, tag))
            lines.append(f"seed_{tag} {vals}")
    lines.append("H")
    for v in inst.channel.ravel():
        lines.append(f"{_fmt(v.real)} {_fmt(v.imag)}")
    lines.append("x0")
    for v in inst.tx_symbols:
        lines.append(f"{_fmt(v.real)} {_fmt(v.imag)}")
    lines.append("y")
    for v in inst.rx_vector:
        lines.append(f"{_fmt(v.real)} {_fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path) -> MimoInstance:
    """Inverse of :func:`dump_instance`."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "isingmimo-instance v1":
        raise ValueError(f"{path}: not an isingmimo instance file")
    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i] != "H":
        key, _, val = lines[i].partition(" ")
        header[key] = val
        i += 1

    def read_complex(count):
        nonlocal i
        out = np.empty(count, dtype=complex)
        for k in range(count):
            re, im = lines[i].split()
            out[k] = float(re) + 1j * float(im)
            i += 1
        return out

    n_rx = int(header["n_rx"])
    n_tx = int(header["n_tx"])
    i += 1  # skip "H"
    H = read_complex(n_rx * n_tx).reshape(n_rx, n_tx)
    i += 1  # skip "x0"
    x0 = read_complex(n_tx)
    i += 1  # skip "y"
    y = read_complex(n_rx)
    seed_info = None
    if "seed_channel" in header:
        seed_info = SeedInfo(
            tuple(int(v) for v in header["seed_channel"].split()),
            tuple(int(v) for v in header["seed_message"].split()),
            tuple(int(v) for v in header["seed_noise"].split()),
        )
    return MimoInstance(
        n_tx=n_tx,
        n_rx=n_rx,
        channel=H,
        tx_symbols=x0,
        rx_vector=y,
        sigma_sq=float(header["sigma_sq"]),
        ebn0_db=float(header["ebn0_db"]),
        seed_info=seed_info,
    )
