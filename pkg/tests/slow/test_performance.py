import math
from time import perf_counter

import numpy as np
from rankguard.context import DriverContext
from rankguard.gf2 import BitMatrix, rank
from rankguard.polar import build_code
from rankguard.selection import brute_force_min_leakage, score_greedy


def timed(fn, *args, **kwargs):
    start = perf_counter()
    result = fn(*args, **kwargs)
    return result, perf_counter() - start


def test_score_greedy_at_4096():
    code = build_code(12, 0.5, 0.5)
    code.generator  # warm the transform cache
    result, seconds = timed(score_greedy, code, 16)
    assert len(result.P) == 16
    assert seconds < 2


def test_rank_of_a_4096_by_2048_matrix():
    rng = np.random.default_rng(0)
    m = BitMatrix.from_dense(rng.integers(0, 2, size=(4096, 2048), dtype=np.uint8))
    r, seconds = timed(rank, m)
    # a uniform random matrix this wide is full rank with overwhelming probability
    assert r == 2048
    assert seconds < 5


def test_brute_force_at_16():
    code = build_code(4, 0.5, 0.5)
    result, seconds = timed(
        brute_force_min_leakage,
        code,
        4,
        short_circuit=False,
        context=DriverContext(parallel_mode=None),
    )
    assert result.work == math.comb(16, 4) == 1820
    assert seconds < 10
