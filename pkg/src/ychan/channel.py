"""MIMO channel realizations and zero-forcing pre/post-coders.

With N relay antennas and M >= N antennas per user, the uplink matrices H_i
(N x M) admit a right pseudo-inverse H^H (H H^H)^-1 and the downlink matrices
D_i (M x N) a left pseudo-inverse (D^H D)^-1 D^H. Pre-coding each user with
the normalized right pseudo-inverse and post-coding each receiver with the
left pseudo-inverse turns the whole system into N parallel scalar
sub-channels: user i reaches the relay with a flat gain alpha_i and hears the
relay with unit gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DegenerateChannelError, RegimeError

RANK_TOL = 1e-8         # relative smallest singular value for "full rank"
IDENTITY_TOL = 1e-10    # max-entry tolerance on H V = alpha I and U D = I


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of all uplink / downlink matrices for a K-user system."""

    K: int
    M: int
    N: int
    uplink: tuple[np.ndarray, ...]      # K matrices, each N x M
    downlink: tuple[np.ndarray, ...]    # K matrices, each M x N
    seed: int


def _full_rank(mat: np.ndarray) -> bool:
    s = np.linalg.svd(mat, compute_uv=False)
    return bool(s[-1] > RANK_TOL * s[0])


def random_channel(k: int, m: int, n: int, seed: int, *,
                   max_retries: int = 64) -> ChannelRealization:
    """Draw i.i.d. circularly-symmetric complex Gaussian channel matrices.

    Matrices are redrawn (from the same deterministic stream) until they pass
    the full-rank check, so the same seed always yields the same realization.
    """
    if k < 2 or m < 1 or n < 1:
        raise ValueError(f"invalid dimensions K={k}, M={m}, N={n}")
    rng = np.random.default_rng(seed)

    def draw(rows: int, cols: int) -> np.ndarray:
        for _ in range(max_retries):
            mat = (rng.standard_normal((rows, cols))
                   + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
            if _full_rank(mat):
                return mat
        raise DegenerateChannelError(
            f"no full-rank {rows}x{cols} draw in {max_retries} tries (seed={seed})")

    uplink = tuple(draw(n, m) for _ in range(k))
    downlink = tuple(draw(m, n) for _ in range(k))
    return ChannelRealization(K=k, M=m, N=n, uplink=uplink, downlink=downlink,
                              seed=seed)


def uplink_precoder(h: np.ndarray) -> tuple[np.ndarray, float]:
    """Normalized right pseudo-inverse of an uplink matrix.

    Returns (V, alpha) with V = alpha * H^H (H H^H)^-1 and alpha the inverse
    Frobenius norm of the pseudo-inverse, so that ||V||_F = 1 (the pre-coded
    signal keeps the transmit power budget) and H V = alpha I.
    """
    n, m = h.shape
    if n > m:
        raise RegimeError(f"uplink matrix is {n}x{m}; need N <= M for a right inverse")
    s = np.linalg.svd(h, compute_uv=False)
    if not s[-1] > RANK_TOL * s[0]:
        raise ConditioningError("uplink Gram matrix is numerically singular")
    gram = h @ h.conj().T
    # solve(G, H) = G^-1 H; its Hermitian transpose is H^H G^-1 since G = G^H
    pinv_right = np.linalg.solve(gram, h).conj().T
    alpha = 1.0 / float(np.linalg.norm(pinv_right))
    return alpha * pinv_right, alpha


def downlink_postcoder(d: np.ndarray) -> np.ndarray:
    """Left pseudo-inverse (D^H D)^-1 D^H of a downlink matrix; U D = I."""
    m, n = d.shape
    if n > m:
        raise RegimeError(f"downlink matrix is {m}x{n}; need N <= M for a left inverse")
    s = np.linalg.svd(d, compute_uv=False)
    if not s[-1] > RANK_TOL * s[0]:
        raise ConditioningError("downlink Gram matrix is numerically singular")
    gram = d.conj().T @ d
    return np.linalg.solve(gram, d.conj().T)


def clamp_antennas(ch: ChannelRealization) -> ChannelRealization:
    """Deactivate surplus relay antennas so the pseudo-inverses exist.

    When N > M the first M relay antennas are kept (rows of the uplink
    matrices, columns of the downlink matrices); otherwise the realization is
    returned unchanged.
    """
    if ch.N <= ch.M:
        return ch
    keep = ch.M
    return ChannelRealization(
        K=ch.K, M=ch.M, N=keep,
        uplink=tuple(h[:keep, :] for h in ch.uplink),
        downlink=tuple(d[:, :keep] for d in ch.downlink),
        seed=ch.seed)


@dataclass(frozen=True)
class CoderSet:
    """Pre-coders, flat uplink gains, and post-coders for every user."""

    precoders: tuple[np.ndarray, ...]   # V_i, M x N
    alphas: tuple[float, ...]
    postcoders: tuple[np.ndarray, ...]  # U_i, N x M


def build_coders(ch: ChannelRealization) -> CoderSet:
    """Construct the full coder set for a realization with N <= M."""
    pre, alphas, post = [], [], []
    for h in ch.uplink:
        v, a = uplink_precoder(h)
        pre.append(v)
        alphas.append(a)
    for d in ch.downlink:
        post.append(downlink_postcoder(d))
    return CoderSet(precoders=tuple(pre), alphas=tuple(alphas),
                    postcoders=tuple(post))


def _matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def _matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows],
                    dtype=complex)


def channel_to_json_dict(ch: ChannelRealization) -> dict:
    """JSON form with complex entries as [re, im] pairs."""
    return {"K": ch.K, "M": ch.M, "N": ch.N, "seed": ch.seed,
            "uplink": [_matrix_to_json(h) for h in ch.uplink],
            "downlink": [_matrix_to_json(d) for d in ch.downlink]}


def channel_from_json_dict(payload: dict) -> ChannelRealization:
    return ChannelRealization(
        K=int(payload["K"]), M=int(payload["M"]), N=int(payload["N"]),
        seed=int(payload["seed"]),
        uplink=tuple(_matrix_from_json(h) for h in payload["uplink"]),
        downlink=tuple(_matrix_from_json(d) for d in payload["downlink"]))
