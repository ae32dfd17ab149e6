from dataclasses import replace
from itertools import product

import numpy as np
import pytest
from rankguard.context import DriverContext
from rankguard.gf2 import BitMatrix, hstack, multiply, rank, select_submatrix
from rankguard.leakage import (
    DEFAULT_AUDIT_SEED,
    LeakageCertificate,
    build_extractor,
    certify_many,
    exhaustive_mi_oracle,
    leaked_equation_report,
    leakage,
    verify_certificate,
    zero_leakage_criterion,
)
from rankguard.polar import PolarCode, build_code
from rankguard.exceptions import (
    CapExceeded,
    CodeMismatch,
    DimensionMismatch,
    DuplicateIndex,
    IndexOutOfRange,
)


def random_case(rng, n):
    code = build_code(n, 0.5, float(rng.uniform(0.1, 0.9)))
    size = int(rng.integers(0, code.N + 1))
    P = sorted(int(i) + 1 for i in rng.choice(code.N, size=size, replace=False))
    return code, P


def test_worked_example_leakage(code_a4, code_a234):
    assert leakage(code_a4, [4]) == (1, 1, 0)
    assert leakage(code_a4, [1]) == (0, 1, 1)
    assert leakage(code_a234, [1, 2, 3]) == (2, 3, 1)
    assert leakage(code_a234, [1])[0] == 0
    assert leakage(code_a234, []) == (0, 0, 0)


def test_public_set_validation(code_a4):
    with pytest.raises(IndexOutOfRange):
        leakage(code_a4, [5])
    with pytest.raises(IndexOutOfRange):
        leakage(code_a4, [0])
    with pytest.raises(DuplicateIndex):
        leakage(code_a4, [1, 1])


def test_oracle_on_the_two_bit_toy(toy):
    assert exhaustive_mi_oracle(toy, [1]) == pytest.approx(0.0, abs=1e-9)
    assert exhaustive_mi_oracle(toy, [2]) == pytest.approx(1.0, abs=1e-9)


def test_oracle_on_worked_examples(code_a4, code_a234):
    assert exhaustive_mi_oracle(code_a4, [4]) == pytest.approx(1.0, abs=1e-9)
    assert exhaustive_mi_oracle(code_a4, [1]) == pytest.approx(0.0, abs=1e-9)
    assert exhaustive_mi_oracle(code_a234, [1, 2, 3]) == pytest.approx(2.0, abs=1e-9)


def test_oracle_agrees_with_rank_identity():
    rng = np.random.default_rng(10)
    for n in (2, 3):
        for _ in range(50):
            code, P = random_case(rng, n)
            mi = exhaustive_mi_oracle(code, P)
            assert abs(mi - round(mi)) < 1e-9
            assert leakage(code, P)[0] == round(mi)


def test_oracle_cap():
    with pytest.raises(CapExceeded):
        exhaustive_mi_oracle(build_code(5, 0.5, 0.5), [1])


def test_leakage_bounds_and_monotonicity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        code, P = random_case(rng, int(rng.integers(1, 7)))
        L, rank_GP, rank_GFP = leakage(code, P)
        assert 0 <= L <= min(code.K, len(P))
        assert rank_GP >= rank_GFP
        extra = [i for i in range(1, code.N + 1) if i not in P]
        bigger = sorted(P + list(rng.choice(extra, size=len(extra) // 2, replace=False)))
        assert L <= leakage(code, [int(i) for i in bigger])[0]


def test_zero_leakage_criterion_agrees_with_leakage(code_a234):
    assert zero_leakage_criterion(code_a234, [1])
    assert not zero_leakage_criterion(code_a234, [1, 2, 3])
    rng = np.random.default_rng(12)
    seen = set()
    for _ in range(200):
        code, P = random_case(rng, int(rng.integers(1, 6)))
        zero = leakage(code, P)[0] == 0
        assert zero_leakage_criterion(code, P) == zero
        seen.add(zero)
    assert seen == {True, False}


def test_code_a234_extractor(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    assert cert.verified
    assert cert.L == 2
    assert cert.extractor.shape == (3, 2)
    assert cert.leaked_combinations.shape == (3, 2)
    assert rank(cert.leaked_combinations) == 2
    assert cert.extractor.to_row_strings()[0] == "00"
    assert cert.extractor.to_row_strings() == ["00", "10", "01"]
    assert leaked_equation_report(cert) == ["x_2 = u_2 ⊕ u_4", "x_3 = u_3 ⊕ u_4"]
    assert cert.seed == DEFAULT_AUDIT_SEED


def test_code_a4_extractor(code_a4):
    cert = build_extractor(code_a4, [4])
    assert cert.L == 1
    assert leaked_equation_report(cert) == ["x_4 = u_4"]


def test_zero_leakage_certificate(code_a4):
    cert = build_extractor(code_a4, [1])
    assert cert.verified
    assert cert.extractor.shape == (1, 0)
    assert cert.leaked_combinations.shape == (1, 0)
    assert leaked_equation_report(cert) == []
    assert verify_certificate(cert).passed

    empty = build_extractor(code_a4, [])
    assert empty.extractor.shape == (0, 0)
    assert empty.verified


def test_extractor_invariants_on_random_codes():
    rng = np.random.default_rng(13)
    checked = 0
    while checked < 40:
        code, P = random_case(rng, int(rng.integers(2, 7)))
        cert = build_extractor(code, P)
        cols = [i - 1 for i in P]
        G_AP = select_submatrix(code.generator, code.info_index, cols)
        G_FP = select_submatrix(code.generator, code.frozen_index, cols)
        assert multiply(G_FP, cert.extractor).is_zero()
        assert rank(multiply(G_AP, cert.extractor)) == cert.L
        assert cert.leaked_combinations == multiply(G_AP, cert.extractor)
        assert cert.verified
        checked += cert.L > 0


def test_extractor_recovers_everything_there_is():
    rng = np.random.default_rng(14)
    for _ in range(10):
        code = build_code(4, 0.5, float(rng.uniform(0.2, 0.8)))
        P = sorted(int(i) + 1 for i in rng.choice(code.N, size=8, replace=False))
        cert = build_extractor(code, P)
        cols = [i - 1 for i in P]
        G_AP = select_submatrix(code.generator, code.info_index, cols)
        G_FP = select_submatrix(code.generator, code.frozen_index, cols)
        GR = multiply(G_AP, cert.extractor)
        for bits in product((0, 1), repeat=len(P)):
            c = BitMatrix.from_dense(np.array(bits, dtype=np.uint8)[:, None])
            if not multiply(G_FP, c).is_zero():
                continue
            assert rank(hstack(GR, multiply(G_AP, c))) <= cert.L


def test_flipped_extractor_fails_frozen_annihilation(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    tampered = replace(cert, extractor=BitMatrix.from_rows(["10", "10", "01"]))
    result = verify_certificate(tampered)
    assert not result.passed
    failed = {check.name for check in result.failures}
    assert "frozen_annihilation" in failed
    assert "rank_identity" not in failed


def test_tampered_leakage_fails_rank_identity(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    result = verify_certificate(replace(cert, leakage=3))
    assert not result
    assert any("rank identity mismatch" in line for line in result.diagnostics())


def test_verify_dimension_checks(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    with pytest.raises(DimensionMismatch):
        verify_certificate(replace(cert, extractor=BitMatrix.zeros(2, 2)))
    with pytest.raises(DimensionMismatch):
        verify_certificate(replace(cert, leaked_combinations=BitMatrix.zeros(2, 2)))
    with pytest.raises(DimensionMismatch):
        verify_certificate(cert, BitMatrix.identity(8))


def test_certificate_dict_round_trip(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    data = cert.to_dict()
    assert data["R"] == ["00", "10", "01"]
    assert data["code"]["digest"] == code_a234.digest()
    loaded = LeakageCertificate.from_dict(data, code_a234)
    assert loaded == cert
    assert loaded.to_dict() == data


def test_certificate_dict_zero_width(code_a4):
    cert = build_extractor(code_a4, [])
    assert LeakageCertificate.from_dict(cert.to_dict(), code_a4) == cert


def test_certificate_needs_its_code(code_a4, code_a234):
    data = build_extractor(code_a234, [1, 2, 3]).to_dict()
    with pytest.raises(CodeMismatch):
        LeakageCertificate.from_dict(data, code_a4)


def test_certify_many_is_scheduling_independent():
    code = build_code(4, 0.5, 0.5)
    sets = [[1], [16], [1, 2, 3], list(range(1, 17)), [], [5, 9, 13]]
    serial = certify_many(code, sets, context=DriverContext(parallel_mode=None))
    threaded = certify_many(code, sets, context=DriverContext(max_threads=3))
    assert serial == threaded
    assert [c.public_set for c in serial] == [tuple(P) for P in sets]
    assert serial[3].L == code.K


def test_certificate_load_sorts_public_set(code_a234):
    cert = build_extractor(code_a234, [1, 2, 3])
    data = cert.to_dict()
    data["P"] = [3, 1, 2]
    data["R"] = ["01", "00", "10"]
    loaded = LeakageCertificate.from_dict(data, code_a234)
    assert loaded.public_set == (1, 2, 3)
    assert loaded.extractor.to_row_strings() == ["00", "10", "01"]
    assert loaded == cert
    assert leaked_equation_report(loaded) == ["x_2 = u_2 ⊕ u_4", "x_3 = u_3 ⊕ u_4"]


def test_reordered_public_set_with_stale_rows_fails(code_a234):
    data = build_extractor(code_a234, [1, 2, 3]).to_dict()
    data["P"] = [3, 2, 1]
    loaded = LeakageCertificate.from_dict(data, code_a234)
    assert loaded.public_set == (1, 2, 3)
    result = verify_certificate(loaded)
    assert "frozen_annihilation" in {check.name for check in result.failures}


def test_certificate_load_rejects_bad_public_set(code_a234):
    data = build_extractor(code_a234, [1, 2, 3]).to_dict()
    with pytest.raises(DuplicateIndex):
        LeakageCertificate.from_dict(dict(data, P=[1, 1, 2]), code_a234)
    with pytest.raises(IndexOutOfRange):
        LeakageCertificate.from_dict(dict(data, P=[1, 2, 9]), code_a234)
