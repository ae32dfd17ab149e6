import numpy as np
import pytest
from typeguard import TypeCheckError
from rankguard.gf2 import BitMatrix, multiply
from rankguard.polar import (
    PolarCode,
    bec_reliability,
    build_code,
    build_code_threshold,
    encode,
    encode_batch,
    erasure_enumeration_reliability,
    polar_transform,
)
from rankguard.exceptions import (
    ArtifactError,
    BadLength,
    CapExceeded,
    OutOfRange,
    ValidationError,
)


def test_g4():
    assert polar_transform(2).to_row_strings() == ["1000", "1100", "1010", "1111"]
    assert polar_transform(0).to_row_strings() == ["1"]


def test_transform_is_an_involution():
    for n in range(7):
        G = polar_transform(n)
        assert multiply(G, G) == BitMatrix.identity(1 << n)


def test_transform_cap():
    with pytest.raises(CapExceeded):
        polar_transform(17)
    with pytest.raises(OutOfRange):
        polar_transform(-1)
    with pytest.raises(TypeCheckError):
        polar_transform(2.0)


def test_encode_matches_generator():
    rng = np.random.default_rng(0)
    for n in range(8):
        N = 1 << n
        u = rng.integers(0, 2, size=(20, N), dtype=np.uint8)
        expected = multiply(BitMatrix.from_dense(u), polar_transform(n)).to_dense()
        assert np.array_equal(encode_batch(u), expected)
        assert np.array_equal(encode(u[0]), expected[0])


def test_encode_twice_is_identity():
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, size=(50, 256), dtype=np.uint8)
    assert np.array_equal(encode_batch(encode_batch(u)), u)


def test_encode_does_not_modify_input():
    u = np.array([[1, 0, 1, 1]], dtype=np.uint8)
    encode_batch(u)
    assert u.tolist() == [[1, 0, 1, 1]]


def test_encode_errors():
    with pytest.raises(BadLength):
        encode([1, 0, 1])
    with pytest.raises(BadLength):
        encode_batch([1, 0])
    with pytest.raises(ValidationError):
        encode([2, 0])


def test_bec_reliability_n2():
    z = bec_reliability(2, 0.5)
    assert np.allclose(z, [0.9375, 0.5625, 0.4375, 0.0625], atol=1e-12)


def test_bec_reliability_n1():
    assert bec_reliability(1, [0.5, 0.5]).tolist() == [0.75, 0.25]
    assert bec_reliability(1, 0.5).tolist() == [0.75, 0.25]


def test_bec_reliability_orders_every_pair():
    rng = np.random.default_rng(4)
    for n in range(1, 9):
        z = rng.random(1 << n)
        delta = z.copy()
        B = z.size
        while B >= 2:
            view = z.reshape(-1, 2, B // 2)
            a, b = view[:, 0, :].copy(), view[:, 1, :].copy()
            minus = np.clip(a + b - a * b, 0.0, 1.0)
            plus = a * b
            assert (plus <= np.minimum(a, b) + 1e-15).all()
            assert (np.maximum(a, b) <= minus + 1e-15).all()
            view[:, 0, :], view[:, 1, :] = minus, plus
            B //= 2
        assert np.allclose(bec_reliability(n, delta), z, atol=0)


def test_bec_reliability_trivial_cases():
    assert bec_reliability(0, 0.3).tolist() == [0.3]
    assert np.array_equal(bec_reliability(5, 0.0), np.zeros(32))
    assert np.array_equal(bec_reliability(5, 1.0), np.ones(32))


def test_bec_reliability_conserves_total_erasure():
    rng = np.random.default_rng(2)
    for n in range(1, 11):
        delta = rng.random(1 << n)
        z = bec_reliability(n, delta)
        assert np.all((z >= 0) & (z <= 1))
        assert z.sum() == pytest.approx(delta.sum(), abs=1e-9)


def test_bec_reliability_matches_erasure_enumeration():
    rng = np.random.default_rng(3)
    for n in range(4):
        for _ in range(5):
            delta = rng.random(1 << n)
            assert np.allclose(
                bec_reliability(n, delta),
                erasure_enumeration_reliability(n, delta),
                atol=1e-12,
            )


def test_erasure_enumeration_cap():
    with pytest.raises(CapExceeded):
        erasure_enumeration_reliability(4, 0.5)


def test_bec_reliability_errors():
    with pytest.raises(BadLength):
        bec_reliability(2, [0.5, 0.5])
    with pytest.raises(OutOfRange):
        bec_reliability(1, [0.5, 1.5])
    with pytest.raises(OutOfRange):
        bec_reliability(1, float("nan"))


def test_build_code_examples():
    assert build_code(2, 0.5, 0.25).info_set == (4,)
    assert build_code(2, 0.5, 0.75).info_set == (2, 3, 4)
    assert build_code(2, 0.5, 0.0).info_set == ()
    assert build_code(2, 0.5, 1.0).info_set == (1, 2, 3, 4)
    assert build_code(1, [0.2, 0.7], 0.5).info_set == (2,)


def test_build_code_partitions_blocklength():
    for n in range(1, 9):
        for rate in (0.1, 0.33, 0.5, 0.9):
            code = build_code(n, 0.3, rate)
            assert code.K == int(np.floor(code.N * rate))
            assert sorted(code.info_set + code.frozen_set) == list(range(1, code.N + 1))
            worst_info = max((code.z_profile[i - 1] for i in code.info_set), default=0)
            best_frozen = min((code.z_profile[i - 1] for i in code.frozen_set), default=1)
            assert worst_info <= best_frozen


def test_build_code_threshold():
    assert build_code_threshold(2, 0.0, 0.0).info_set == (1, 2, 3, 4)
    assert build_code_threshold(2, 0.5, 0.5).info_set == (3, 4)
    with pytest.raises(OutOfRange):
        build_code_threshold(2, 0.5, 1.0)


def test_build_code_errors():
    with pytest.raises(OutOfRange):
        build_code(2, 0.5, 1.5)
    with pytest.raises(CapExceeded):
        build_code(20, 0.5, 0.5)


def test_from_sets():
    code = PolarCode.from_sets(2, [4, 3, 2])
    assert code.info_set == (2, 3, 4)
    assert code.frozen_set == (1,)
    assert code.info_index.tolist() == [1, 2, 3]
    assert code.frozen_index.tolist() == [0]


def test_descriptor_round_trip():
    code = build_code(3, 0.4, 0.5)
    descriptor = code.to_descriptor()
    assert descriptor["delta"] == 0.4
    assert PolarCode.from_descriptor(descriptor) == code
    assert PolarCode.from_descriptor(descriptor).digest() == code.digest()

    mixed = build_code(1, [0.2, 0.7], 0.5)
    assert PolarCode.from_descriptor(mixed.to_descriptor()) == mixed


def test_descriptor_validation():
    descriptor = build_code(2, 0.5, 0.5).to_descriptor()
    with pytest.raises(ArtifactError):
        PolarCode.from_descriptor({k: v for k, v in descriptor.items() if k != "info_set"})
    with pytest.raises(ValidationError):
        PolarCode.from_descriptor(dict(descriptor, info_set=[1, 3, 4]))
    with pytest.raises(ValidationError):
        PolarCode.from_descriptor(dict(descriptor, info_set=[3, 4], frozen_set=[1]))
    with pytest.raises(ValidationError):
        PolarCode.from_descriptor(dict(descriptor, info_set=[3, 5]))
