"""
End-to-end model: each coordinate goes out on a public or a private BEC, the
receiver runs successive cancellation knowing the secret frozen bits, and an
eavesdropper applies the extractor to the published symbols before any erasure.

Frames are generated in blocks of :data:`FRAMES_PER_BLOCK`, block ``b`` with its
own Philox stream keyed by ``(seed, 1, b)``, so any split of the blocks over
workers reproduces the serial run bit for bit.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from functools import partial
from typing import Any, Dict, Iterable, Iterator, NamedTuple, Optional, Tuple

import numpy as np
from typeguard import typechecked

from .context import DriverContext, get_default_context
from .exceptions import (
    BadLength,
    DecodeFailure,
    MaskReuseWarning,
    OutOfRange,
    UnverifiedCertificate,
    ValidationError,
)
from .gf2 import BitMatrix, multiply
from .leakage import LeakageCertificate, build_extractor
from .polar import PolarCode, encode_batch
from .util import normalize_index_set, to_zero_based

logger = logging.getLogger(__name__)

ERASED = -1
FRAMES_PER_BLOCK = 256


def _block_rng(seed: int, key: Tuple[int, ...]) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=key))
    )


@dataclass(frozen=True)
class ChannelAssignment:
    """
    Static split of the coordinates between the two links.

    :param public_set: Coordinates sent on the public link, 1-based
    :param delta_pub: Erasure probability of the public link
    :param delta_priv: Erasure probability of the private link
    """

    public_set: Tuple[int, ...]
    delta_pub: float
    delta_priv: float

    def __post_init__(self):
        for name in ("delta_pub", "delta_priv"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise OutOfRange("{} must lie in [0, 1], got {}".format(name, value))
        object.__setattr__(self, "public_set", tuple(self.public_set))

    def erasure_vector(self, N: int) -> np.ndarray:
        P = normalize_index_set(self.public_set, N, "public index")
        delta = np.full(N, float(self.delta_priv))
        delta[to_zero_based(P)] = self.delta_pub
        return delta


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    adversary_checks_passed: int
    seed: int
    decode_failures: int = 0
    info_bits: int = 0
    reuse_mask: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trials": self.trials,
            "frame_errors": self.frame_errors,
            "bit_errors": self.bit_errors,
            "fer": self.fer,
            "ber": self.ber,
            "adversary_checks_passed": self.adversary_checks_passed,
            "decode_failures": self.decode_failures,
            "info_bits": self.info_bits,
            "seed": self.seed,
            "reuse_mask": self.reuse_mask,
        }


def transmit(x, assign: ChannelAssignment, rng: np.random.Generator) -> np.ndarray:
    """
    Pass codewords through the per-coordinate BECs.

    :param x: Length-``N`` codeword or ``(frames, N)`` block
    :return: int8 array of the same shape, erased symbols set to :data:`ERASED`
    """
    x = np.asarray(x, dtype=np.uint8)
    delta = assign.erasure_vector(x.shape[-1])
    erased = rng.random(x.shape) < delta
    y = x.astype(np.int8)
    y[erased] = ERASED
    return y


class BatchDecode(NamedTuple):
    u_hat: np.ndarray
    undetermined: np.ndarray
    first_fail: np.ndarray


def _sc(y: np.ndarray, frozen: np.ndarray, is_frozen: np.ndarray):
    if y.shape[1] == 1:
        if is_frozen[0]:
            u = frozen.copy()
            undetermined = np.zeros(y.shape, dtype=bool)
        else:
            undetermined = y == ERASED
            u = np.where(undetermined, 0, y).astype(np.uint8)
        return u, undetermined, u
    h = y.shape[1] // 2
    y_l, y_r = y[:, :h], y[:, h:]
    known_l, known_r = y_l != ERASED, y_r != ERASED
    a = np.where(known_l & known_r, y_l ^ y_r, ERASED).astype(np.int8)
    u_l, und_l, v = _sc(a, frozen[:, :h], is_frozen[:h])
    b = np.where(known_r, y_r, np.where(known_l, y_l ^ v, ERASED)).astype(np.int8)
    u_r, und_r, w = _sc(b, frozen[:, h:], is_frozen[h:])
    return (
        np.hstack([u_l, u_r]),
        np.hstack([und_l, und_r]),
        np.hstack([v ^ w, w]),
    )


def sc_decode_batch(y, code: PolarCode, frozen_values) -> BatchDecode:
    """
    Successive-cancellation decoding of a block of frames over erasures.

    Undetermined information bits are set to 0 and flagged; ``first_fail`` holds
    the 1-based index of the first one per frame, 0 when the frame decoded.

    :param y: ``(frames, N)`` int8 received symbols
    :param frozen_values: ``(frames, |F|)`` or ``(|F|,)`` frozen bits known to the receiver
    """
    y = np.asarray(y, dtype=np.int8)
    if y.ndim != 2 or y.shape[1] != code.N:
        raise BadLength("expected received symbols of shape (frames, {})".format(code.N))
    frames = y.shape[0]
    fv = np.asarray(frozen_values, dtype=np.uint8)
    if fv.shape[-1:] != (len(code.frozen_set),):
        raise BadLength("expected {} frozen values per frame".format(len(code.frozen_set)))
    frozen = np.zeros((frames, code.N), dtype=np.uint8)
    frozen[:, code.frozen_index] = np.broadcast_to(fv, (frames, len(code.frozen_set)))
    is_frozen = np.zeros(code.N, dtype=bool)
    is_frozen[code.frozen_index] = True
    u_hat, undetermined, _ = _sc(y, frozen, is_frozen)
    failed = undetermined.any(axis=1)
    first_fail = np.where(failed, undetermined.argmax(axis=1) + 1, 0)
    return BatchDecode(u_hat, undetermined, first_fail)


def sc_decode(y, code: PolarCode, frozen_values) -> np.ndarray:
    """
    Decode one frame.

    :raises DecodeFailure: carrying the first undetermined information index
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise BadLength("expected a single frame, got shape {}".format(y.shape))
    result = sc_decode_batch(y[None, :], code, frozen_values)
    if result.first_fail[0]:
        raise DecodeFailure(int(result.first_fail[0]))
    return result.u_hat[0]


def adversary_observe(x, cert: LeakageCertificate) -> np.ndarray:
    """
    Apply the extractor to the published coordinates of ``x``.

    :param x: Codeword of length ``N`` or a ``(frames, N)`` block
    :return: ``x_P R``, length L per frame
    """
    if not cert.verified:
        raise UnverifiedCertificate("refusing to use an unverified certificate")
    x = np.asarray(x, dtype=np.uint8)
    single = x.ndim == 1
    block = x[None, :] if single else x
    x_P = BitMatrix.from_dense(block[:, to_zero_based(cert.public_set)])
    recovered = multiply(x_P, cert.extractor).to_dense()
    return recovered[0] if single else recovered


class FrameBlock(NamedTuple):
    index: int
    u: np.ndarray
    x: np.ndarray
    rng: np.random.Generator


def _frame_block(
    code: PolarCode, seed: int, mask: Optional[np.ndarray], index: int, frames: int
) -> FrameBlock:
    rng = _block_rng(seed, (1, index))
    u = rng.integers(0, 2, size=(frames, code.N), dtype=np.uint8)
    if mask is not None:
        u[:, code.frozen_index] = mask
    return FrameBlock(index, u, encode_batch(u), rng)


def _reuse_mask(code: PolarCode, seed: int) -> np.ndarray:
    return _block_rng(seed, (0,)).integers(
        0, 2, size=len(code.frozen_set), dtype=np.uint8
    )


def _blocks(trials: int) -> Iterable[Tuple[int, int]]:
    for index in range(math.ceil(trials / FRAMES_PER_BLOCK)):
        yield index, min(FRAMES_PER_BLOCK, trials - index * FRAMES_PER_BLOCK)


def iter_frames(
    code: PolarCode, trials: int, seed: int, reuse_mask: bool = False
) -> Iterator[FrameBlock]:
    """
    Seeded blocks of uniformly random inputs ``u`` and their codewords.

    Frozen bits are fresh in every frame unless ``reuse_mask`` pins them to one
    mask for the whole run.
    """
    mask = _reuse_mask(code, seed) if reuse_mask else None
    for index, frames in _blocks(trials):
        yield _frame_block(code, seed, mask, index, frames)


def _run_block(code, assign, cert, seed, mask, block):
    index, frames = block
    _, u, x, rng = _frame_block(code, seed, mask, index, frames)
    y = transmit(x, assign, rng)
    decoded = sc_decode_batch(y, code, u[:, code.frozen_index])
    A = code.info_index
    wrong = (decoded.u_hat[:, A] != u[:, A]) | decoded.undetermined[:, A]
    recovered = adversary_observe(x, cert)
    expected = multiply(
        BitMatrix.from_dense(u[:, A]), cert.leaked_combinations
    ).to_dense()
    return (
        int(wrong.any(axis=1).sum()),
        int(wrong.sum()),
        int((decoded.first_fail > 0).sum()),
        int((recovered == expected).all(axis=1).sum()),
    )


@typechecked
def run_experiment(
    code: PolarCode,
    assign: ChannelAssignment,
    cert: Optional[LeakageCertificate] = None,
    trials: int = 1000,
    seed: int = 0,
    reuse_mask: bool = False,
    context: Optional[DriverContext] = None,
) -> SimulationReport:
    """
    Simulate ``trials`` frames and count receiver errors and adversary checks.

    :param code: The code
    :param assign: Which coordinates go public, and both erasure probabilities
    :param optional cert: Certificate for ``assign.public_set``; built if omitted
    :param optional trials: Number of frames, at least 1
    :param optional seed: Seed of the whole run
    :param optional reuse_mask: Pin the frozen bits to one mask for every frame.
        This breaks the one-time-pad assumption and exists as a negative demo.
    :param optional context: Driver context the frame blocks are mapped over
    """
    if trials < 1:
        raise OutOfRange("trials must be at least 1, got {}".format(trials))
    P = normalize_index_set(assign.public_set, code.N, "public index")
    if cert is None:
        cert = build_extractor(code, P)
    elif tuple(cert.public_set) != P:
        raise ValidationError(
            "certificate is for P = {}, assignment publishes {}".format(
                list(cert.public_set), list(P)
            )
        )
    mask = None
    if reuse_mask:
        warnings.warn(
            "frozen mask reused across frames; leakage certificates do not cover this run",
            MaskReuseWarning,
        )
        mask = _reuse_mask(code, seed)

    context = context or get_default_context()
    counts = context.map(
        partial(_run_block, code, assign, cert, seed, mask), list(_blocks(trials))
    )
    frame_errors, bit_errors, failures, checks = (sum(c) for c in zip(*counts))
    info_bits = trials * code.K
    report = SimulationReport(
        trials=trials,
        frame_errors=frame_errors,
        bit_errors=bit_errors,
        fer=frame_errors / trials,
        ber=bit_errors / info_bits if info_bits else 0.0,
        adversary_checks_passed=checks,
        seed=seed,
        decode_failures=failures,
        info_bits=info_bits,
        reuse_mask=reuse_mask,
    )
    logger.info(
        "simulated %d frames: fer=%.4g ber=%.4g adversary %d/%d",
        trials,
        report.fer,
        report.ber,
        checks,
        trials,
    )
    return report
