"""
Polar transform, BEC reliability profiles and the information/frozen split.

Indices carried by :class:`PolarCode` are 1-based (``[1:N]``); the numpy index
arrays derived from them are 0-based.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from typeguard import typechecked

from .exceptions import ArtifactError, BadLength, CapExceeded, OutOfRange, ValidationError
from .gf2 import BitMatrix, rank, select_submatrix
from .util import canonical_json, normalize_index_set, sha256_hex, to_zero_based

logger = logging.getLogger(__name__)

MAX_LOG2_BLOCKLENGTH = 16
MAX_ENUMERATION_LOG2 = 3
# Bounds the dense scratch used while building G_N, in entries.
_TRANSFORM_BLOCK_ENTRIES = 1 << 22

DeltaSpec = Union[float, Sequence[float], np.ndarray]


def _check_log2(n: int):
    if n < 0:
        raise OutOfRange("log2-blocklength must be non-negative, got {}".format(n))
    if n > MAX_LOG2_BLOCKLENGTH:
        raise CapExceeded(n, MAX_LOG2_BLOCKLENGTH, "log2-blocklength")


def _is_power_of_two(N: int) -> bool:
    return N > 0 and (N & (N - 1)) == 0


@typechecked
def polar_transform(n: int) -> BitMatrix:
    """
    The ``N x N`` Kronecker power of ``[[1,0],[1,1]]`` in natural order.

    Entry ``(i, j)`` (0-based) is one iff the bits of ``j`` are a subset of the bits of ``i``.

    :param n: log2 of the blocklength, ``0 <= n <= 16``
    """
    _check_log2(n)
    return _polar_transform(n)


@lru_cache(maxsize=4)
def _polar_transform(n: int) -> BitMatrix:
    N = 1 << n
    cols = np.arange(N, dtype=np.int64)
    step = max(1, _TRANSFORM_BLOCK_ENTRIES // N)
    blocks = []
    for start in range(0, N, step):
        rows = np.arange(start, min(N, start + step), dtype=np.int64)
        dense = (rows[:, None] & cols[None, :]) == cols[None, :]
        blocks.append(BitMatrix.from_dense(dense.astype(np.uint8)).data)
    logger.debug("built G_%d in %d row blocks", N, len(blocks))
    return BitMatrix(N, N, np.vstack(blocks))


def encode_batch(u) -> np.ndarray:
    """
    Compute ``u G_N`` for every row of ``u`` with the in-place butterfly.

    :param u: ``(frames, N)`` array of bits, ``N`` a power of two
    :return: ``(frames, N)`` uint8 array of codewords
    """
    x = np.array(u, dtype=np.uint8)
    if x.ndim != 2:
        raise BadLength("expected a (frames, N) array, got shape {}".format(x.shape))
    frames, N = x.shape
    if not _is_power_of_two(N):
        raise BadLength("blocklength {} is not a power of two".format(N))
    if x.size and x.max() > 1:
        raise ValidationError("input bits must be 0 or 1")
    h = 1
    while h < N:
        view = x.reshape(frames, N // (2 * h), 2, h)
        view[:, :, 0, :] ^= view[:, :, 1, :]
        h *= 2
    return x


def encode(u) -> np.ndarray:
    """Encode a single length-``N`` bit vector, ``x = u G_N``."""
    u = np.asarray(u)
    if u.ndim != 1:
        raise BadLength("expected a bit vector, got shape {}".format(u.shape))
    return encode_batch(u[None, :])[0]


def expand_delta(delta: DeltaSpec, N: int) -> np.ndarray:
    """Turn a scalar or per-coordinate erasure specification into a length-``N`` vector."""
    arr = np.array(delta, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(N, float(arr))
    if arr.ndim != 1 or arr.size != N:
        raise BadLength("expected {} erasure probabilities, got shape {}".format(N, arr.shape))
    if np.isnan(arr).any() or (arr < 0).any() or (arr > 1).any():
        raise OutOfRange("erasure probabilities must lie in [0, 1]")
    return arr


def bec_reliability(n: int, delta: DeltaSpec) -> np.ndarray:
    """
    Bhattacharyya parameters of all ``N`` synthetic channels over BEC uses.

    Leaf ``i`` starts at ``delta[i]``. A block of size ``B`` pairs position ``j``
    with ``j + B/2``; the first half becomes the minus branch ``a + b - ab`` and
    the second half the plus branch ``ab``, then each half recurses.

    :param n: log2 of the blocklength
    :param delta: Scalar or length-``N`` erasure probabilities of the physical channel uses
    :return: Length-``N`` array of Z values in ``[0, 1]``
    """
    _check_log2(n)
    N = 1 << n
    z = expand_delta(delta, N).copy()
    B = N
    while B >= 2:
        view = z.reshape(-1, 2, B // 2)
        a = view[:, 0, :].copy()
        b = view[:, 1, :].copy()
        view[:, 0, :] = np.clip(a + b - a * b, 0.0, 1.0)
        view[:, 1, :] = a * b
        B //= 2
    return z


def erasure_enumeration_reliability(n: int, delta: DeltaSpec) -> np.ndarray:
    """
    Synthetic-channel erasure probabilities by enumerating every erasure pattern.

    Bit ``u_i`` is determined from the delivered coordinates ``S`` and the earlier
    bits iff row ``i`` of ``G[i:, S]`` is independent of the rows below it.
    Only for tiny blocklengths; this is the reference for :func:`bec_reliability`.
    """
    if n > MAX_ENUMERATION_LOG2:
        raise CapExceeded(n, MAX_ENUMERATION_LOG2, "log2-blocklength for enumeration")
    _check_log2(n)
    N = 1 << n
    d = expand_delta(delta, N)
    G = polar_transform(n)
    z = np.zeros(N)
    for pattern in range(1 << N):
        erased = np.array([(pattern >> j) & 1 for j in range(N)], dtype=bool)
        prob = float(np.prod(np.where(erased, d, 1.0 - d)))
        if prob == 0.0:
            continue
        delivered = np.flatnonzero(~erased)
        ranks = [rank(select_submatrix(G, range(i, N), delivered)) for i in range(N + 1)]
        for i in range(N):
            if ranks[i] == ranks[i + 1]:
                z[i] += prob
    return z


@dataclass(frozen=True)
class PolarCode:
    """
    A polar code with its information/frozen split fixed for its lifetime.

    :param n: log2 of the blocklength
    :param info_set: Information set A, ascending 1-based indices
    :param frozen_set: Frozen set F, ascending 1-based indices
    :param z_profile: Bhattacharyya parameter of each synthetic channel
    :param delta: Erasure probability of each physical channel use
    :param optional rate: The rate the code was built from, if any
    :param optional zeta: The reliability threshold the code was built from, if any
    """

    n: int
    info_set: Tuple[int, ...]
    frozen_set: Tuple[int, ...]
    z_profile: Tuple[float, ...]
    delta: Tuple[float, ...]
    rate: Optional[float] = None
    zeta: Optional[float] = None

    def __post_init__(self):
        _check_log2(self.n)
        N = self.N
        info = normalize_index_set(self.info_set, N, "information index")
        frozen = normalize_index_set(self.frozen_set, N, "frozen index")
        if set(info) & set(frozen):
            raise ValidationError("information and frozen sets overlap")
        if len(info) + len(frozen) != N:
            raise ValidationError("information and frozen sets do not cover [1:{}]".format(N))
        if len(self.z_profile) != N or len(self.delta) != N:
            raise BadLength("z_profile and delta must have {} entries".format(N))
        for name, values in (("z_profile", self.z_profile), ("delta", self.delta)):
            if any(not (0.0 <= v <= 1.0) for v in values):
                raise OutOfRange("{} entries must lie in [0, 1]".format(name))
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "frozen_set", frozen)
        object.__setattr__(self, "z_profile", tuple(float(v) for v in self.z_profile))
        object.__setattr__(self, "delta", tuple(float(v) for v in self.delta))

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def K(self) -> int:
        return len(self.info_set)

    @property
    def info_index(self) -> np.ndarray:
        return to_zero_based(self.info_set)

    @property
    def frozen_index(self) -> np.ndarray:
        return to_zero_based(self.frozen_set)

    @property
    def generator(self) -> BitMatrix:
        return polar_transform(self.n)

    @classmethod
    def from_sets(
        cls, n: int, info_set: Iterable[int], delta: DeltaSpec = 0.5
    ) -> "PolarCode":
        """Build a code around an explicitly chosen information set."""
        _check_log2(n)
        N = 1 << n
        info = normalize_index_set(info_set, N, "information index")
        d = expand_delta(delta, N)
        frozen = tuple(i for i in range(1, N + 1) if i not in set(info))
        return cls(n, info, frozen, tuple(bec_reliability(n, d)), tuple(d))

    def to_descriptor(self) -> Dict[str, Any]:
        descriptor = {"n": self.n}
        if self.rate is not None:
            descriptor["rate"] = self.rate
        if self.zeta is not None:
            descriptor["zeta"] = self.zeta
        if len(set(self.delta)) == 1:
            descriptor["delta"] = self.delta[0]
        else:
            descriptor["delta"] = list(self.delta)
        descriptor["info_set"] = list(self.info_set)
        descriptor["frozen_set"] = list(self.frozen_set)
        descriptor["z_profile"] = list(self.z_profile)
        return descriptor

    @classmethod
    def from_descriptor(cls, descriptor: Dict[str, Any]) -> "PolarCode":
        missing = {"n", "delta", "info_set", "frozen_set"} - set(descriptor)
        if missing:
            raise ArtifactError(
                "code descriptor is missing {}".format(", ".join(sorted(missing)))
            )
        n = descriptor["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ArtifactError("code descriptor field n must be an integer")
        _check_log2(n)
        delta = expand_delta(descriptor["delta"], 1 << n)
        z_profile = descriptor.get("z_profile")
        if z_profile is None:
            z_profile = bec_reliability(n, delta)
        return cls(
            n=n,
            info_set=tuple(descriptor["info_set"]),
            frozen_set=tuple(descriptor["frozen_set"]),
            z_profile=tuple(z_profile),
            delta=tuple(delta),
            rate=descriptor.get("rate"),
            zeta=descriptor.get("zeta"),
        )

    def digest(self) -> str:
        return sha256_hex(canonical_json(self.to_descriptor()))


@typechecked
def build_code(n: int, delta: DeltaSpec, rate: float) -> PolarCode:
    """
    Choose ``|A| = floor(N R)`` most reliable synthetic channels as the information set.

    Ties in the reliability profile go to the smaller index.

    :param n: log2 of the blocklength
    :param delta: Scalar or per-coordinate erasure probabilities
    :param rate: Target rate ``R`` in ``[0, 1]``
    """
    if not (0.0 <= rate <= 1.0):
        raise OutOfRange("rate must lie in [0, 1], got {}".format(rate))
    z = bec_reliability(n, delta)
    N = z.size
    K = math.floor(N * rate)
    order = np.argsort(z, kind="stable")
    info = tuple(sorted(int(i) + 1 for i in order[:K]))
    frozen = tuple(sorted(int(i) + 1 for i in order[K:]))
    logger.debug("built code N=%d K=%d from rate %s", N, K, rate)
    return PolarCode(
        n, info, frozen, tuple(z), tuple(expand_delta(delta, N)), rate=float(rate)
    )


@typechecked
def build_code_threshold(n: int, delta: DeltaSpec, zeta: float) -> PolarCode:
    """
    Take every synthetic channel with ``Z <= zeta`` as an information channel.

    :param n: log2 of the blocklength
    :param delta: Scalar or per-coordinate erasure probabilities
    :param zeta: Reliability threshold in ``[0, 1)``
    """
    if not (0.0 <= zeta < 1.0):
        raise OutOfRange("zeta must lie in [0, 1), got {}".format(zeta))
    z = bec_reliability(n, delta)
    info = tuple(int(i) + 1 for i in np.flatnonzero(z <= zeta))
    frozen = tuple(int(i) + 1 for i in np.flatnonzero(z > zeta))
    return PolarCode(
        n, info, frozen, tuple(z), tuple(expand_delta(delta, z.size)), zeta=float(zeta)
    )
