from dataclasses import replace
from itertools import product

import numpy as np
import pytest
from rankguard.context import DriverContext
from rankguard.gf2 import rank, select_submatrix
from rankguard.leakage import build_extractor
from rankguard.polar import build_code, encode, encode_batch
from rankguard.simulation import (
    ERASED,
    ChannelAssignment,
    adversary_observe,
    iter_frames,
    run_experiment,
    sc_decode,
    sc_decode_batch,
    transmit,
)
from rankguard.exceptions import (
    DecodeFailure,
    IndexOutOfRange,
    MaskReuseWarning,
    OutOfRange,
    UnverifiedCertificate,
    ValidationError,
)

SERIAL = DriverContext(parallel_mode=None)


def test_transmit_extremes():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, size=(10, 8), dtype=np.uint8)
    clear = transmit(x, ChannelAssignment((1, 2), 0.0, 0.0), rng)
    assert np.array_equal(clear, x)
    dark = transmit(x, ChannelAssignment((1, 2), 1.0, 1.0), rng)
    assert (dark == ERASED).all()


def test_transmit_never_flips():
    rng = np.random.default_rng(1)
    x = rng.integers(0, 2, size=(500, 16), dtype=np.uint8)
    y = transmit(x, ChannelAssignment((1, 5, 9), 0.4, 0.2), rng)
    delivered = y != ERASED
    assert np.array_equal(y[delivered], x[delivered])


def test_transmit_erasure_rate():
    rng = np.random.default_rng(2)
    trials = 100000
    x = np.zeros((trials, 4), dtype=np.uint8)
    y = transmit(x, ChannelAssignment((2,), 0.5, 0.0), rng)
    rate = (y[:, 1] == ERASED).mean()
    assert abs(rate - 0.5) <= 3 * np.sqrt(0.25 / trials)
    assert not (y[:, [0, 2, 3]] == ERASED).any()


def test_channel_assignment_validation():
    with pytest.raises(OutOfRange):
        ChannelAssignment((1,), 1.5, 0.0)
    with pytest.raises(IndexOutOfRange):
        ChannelAssignment((9,), 0.5, 0.0).erasure_vector(8)
    vector = ChannelAssignment((2, 3), 0.7, 0.1).erasure_vector(4)
    assert vector.tolist() == [0.1, 0.7, 0.7, 0.1]


def test_decode_without_erasures():
    rng = np.random.default_rng(3)
    for n in range(1, 8):
        code = build_code(n, 0.5, 0.5)
        u = rng.integers(0, 2, size=(30, code.N), dtype=np.uint8)
        decoded = sc_decode_batch(encode_batch(u), code, u[:, code.frozen_index])
        assert np.array_equal(decoded.u_hat, u)
        assert (decoded.first_fail == 0).all()


def test_decode_toy_with_erased_second_symbol(toy):
    for u1, u2 in product((0, 1), repeat=2):
        x = encode([u1, u2])
        u_hat = sc_decode([x[0], ERASED], toy, [u1])
        assert u_hat[1] == x[0] ^ u1 == u2


def test_decode_all_erased(code_a4):
    with pytest.raises(DecodeFailure) as info:
        sc_decode([ERASED] * 4, code_a4, [0, 0, 0])
    assert info.value.index == 4


def test_decode_matches_rank_determinability():
    rng = np.random.default_rng(4)
    code = build_code(3, 0.5, 0.5)
    G = code.generator
    patterns = np.array(list(product((0, 1), repeat=8)), dtype=bool)
    u = rng.integers(0, 2, size=(len(patterns), 8), dtype=np.uint8)
    y = encode_batch(u).astype(np.int8)
    y[patterns] = ERASED
    decoded = sc_decode_batch(y, code, u[:, code.frozen_index])
    for f, erased in enumerate(patterns):
        delivered = np.flatnonzero(~erased)
        ranks = [rank(select_submatrix(G, range(i, 8), delivered)) for i in range(9)]
        for i in code.info_index:
            undetermined = ranks[i] == ranks[i + 1]
            assert decoded.undetermined[f, i] == undetermined
            if not undetermined and decoded.first_fail[f] == 0:
                assert decoded.u_hat[f, i] == u[f, i]


def test_adversary_on_code_a234(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    for u in product((0, 1), repeat=4):
        recovered = adversary_observe(encode(u), cert)
        assert recovered.tolist() == [u[3] ^ u[1], u[3] ^ u[2]]


def test_adversary_with_nothing_to_learn(code_a4):
    cert = build_extractor(code_a4, [1])
    assert adversary_observe(encode([1, 0, 1, 1]), cert).shape == (0,)


def test_adversary_needs_a_verified_certificate(code_a234):
    cert = replace(build_extractor(code_a234, [1, 2, 3]), verified=False)
    with pytest.raises(UnverifiedCertificate):
        adversary_observe(encode([0, 1, 1, 0]), cert)


def test_experiment_on_a_clean_channel():
    code = build_code(6, 0.5, 0.5)
    assign = ChannelAssignment((1, 2, 3, 40), 0.0, 0.0)
    report = run_experiment(code, assign, trials=1000, seed=5, context=SERIAL)
    assert report.fer == 0
    assert report.ber == 0
    assert report.adversary_checks_passed == 1000
    assert report.info_bits == 1000 * code.K


def test_experiment_on_a_dead_channel():
    code = build_code(4, 0.5, 0.5)
    report = run_experiment(
        code, ChannelAssignment((), 0.0, 1.0), trials=300, seed=6, context=SERIAL
    )
    assert report.fer == 1.0
    assert report.decode_failures == 300
    assert report.bit_errors == 300 * code.K
    assert report.ber == 1.0


def test_experiment_is_deterministic():
    code = build_code(7, 0.3, 0.5)
    assign = ChannelAssignment((1, 2, 3, 4, 100), 0.6, 0.45)
    serial = run_experiment(code, assign, trials=700, seed=7, context=SERIAL)
    again = run_experiment(code, assign, trials=700, seed=7, context=SERIAL)
    threaded = run_experiment(
        code, assign, trials=700, seed=7, context=DriverContext(max_threads=3)
    )
    assert serial == again == threaded
    assert serial.adversary_checks_passed == 700
    assert serial.fer == serial.frame_errors / 700
    assert 0 < serial.fer < 1


def test_experiment_rejects_foreign_certificate(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    with pytest.raises(ValidationError):
        run_experiment(code_a234, ChannelAssignment((1,), 0.1, 0.1), cert=cert, trials=10)
    with pytest.raises(OutOfRange):
        run_experiment(code_a234, ChannelAssignment((1,), 0.1, 0.1), trials=0)


def test_fresh_mask_hides_the_message(toy):
    trials = 100000
    u_A, x_1 = [], []
    for block in iter_frames(toy, trials, seed=8):
        u_A.append(block.u[:, 1])
        x_1.append(block.x[:, 0])
    u_A, x_1 = np.concatenate(u_A), np.concatenate(x_1)
    assert u_A.size == trials
    for value in (0, 1):
        given = u_A[x_1 == value]
        assert abs(given.mean() - 0.5) <= 3 * np.sqrt(0.25 / given.size)


def test_reused_mask(toy):
    blocks = list(iter_frames(toy, 600, seed=9, reuse_mask=True))
    masks = np.concatenate([b.u[:, 0] for b in blocks])
    assert (masks == masks[0]).all()
    # with the mask pinned, x_1 gives u_A away
    u_A = np.concatenate([b.u[:, 1] for b in blocks])
    x_1 = np.concatenate([b.x[:, 0] for b in blocks])
    assert np.array_equal(u_A, x_1 ^ masks[0])

    with pytest.warns(MaskReuseWarning):
        report = run_experiment(
            toy, ChannelAssignment((1,), 0.0, 0.0), trials=50, seed=9, reuse_mask=True
        )
    assert report.reuse_mask
