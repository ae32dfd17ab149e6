"""
Choosing which coordinates to publish.

Each coordinate ``i`` gets a score ``s_i = f_i - a_i`` from the ones of column
``i`` of ``G_N`` that sit in frozen rows (``f_i``) and information rows
(``a_i``). Any published set satisfies
``L(P) <= rank(G_{A,P}) <= sum_{i in P} a_i``; the greedy rule picks the ``k``
highest scores, brute force finds the true minimum for small instances.
"""
import csv
import logging
import math
import time
import warnings
from dataclasses import dataclass
from functools import partial
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional, TextIO, Tuple, Union

import numpy as np
from typeguard import typechecked

from .context import DriverContext, get_default_context
from .exceptions import ArtifactError, BadBudget, BudgetWarning, CapExceeded
from .gf2 import rank, select_submatrix
from .leakage import leakage
from .polar import PolarCode
from .util import to_zero_based

logger = logging.getLogger(__name__)

DEFAULT_CANDIDATE_CAP = 10 ** 7
SWEEP_COLUMNS = ("k", "L_greedy", "bound", "L_opt", "gap", "t_greedy_ms", "t_bf_ms")


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Per-coordinate counts ``a``, ``f`` and scores ``s = f - a``, 0-based arrays."""

    a: np.ndarray
    f: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    """
    A published set and where it sits in the leakage chain.

    :param P: Published coordinates, ascending 1-based indices
    :param leakage: Exact leakage of P
    :param bound: ``sum_{i in P} a_i``
    :param method: One of greedy, brute_force, min_bound
    :param work: Candidate sets examined
    :param info_rank: ``rank(G_{A,P})``
    """

    P: Tuple[int, ...]
    leakage: int
    bound: int
    method: str
    work: int
    info_rank: int

    @property
    def k(self) -> int:
        return len(self.P)

    def chain_holds(self) -> bool:
        return self.leakage <= self.info_rank <= self.bound

    def to_dict(self) -> Dict[str, Any]:
        return {
            "P": list(self.P),
            "k": self.k,
            "leakage": self.leakage,
            "info_rank": self.info_rank,
            "bound": self.bound,
            "method": self.method,
            "work": self.work,
        }


def score_table(code: PolarCode) -> ScoreTable:
    G = code.generator
    a = G.take_rows(code.info_index).column_weights()
    f = G.take_rows(code.frozen_index).column_weights()
    return ScoreTable(a=a, f=f, s=f - a)


def _check_budget(code: PolarCode, k: int, lowest: int):
    if k < lowest or k > code.N:
        raise BadBudget("budget k = {} outside [{}:{}]".format(k, lowest, code.N))


def _result(
    code: PolarCode, P: Iterable[int], table: ScoreTable, method: str, work: int
) -> SelectionResult:
    P = tuple(sorted(int(i) for i in P))
    cols = to_zero_based(P)
    L, _, _ = leakage(code, P)
    info_rank = rank(select_submatrix(code.generator, code.info_index, cols))
    return SelectionResult(
        P=P,
        leakage=L,
        bound=int(table.a[cols].sum()),
        method=method,
        work=work,
        info_rank=info_rank,
    )


@typechecked
def score_greedy(code: PolarCode, k: int) -> SelectionResult:
    """
    Publish the ``k`` coordinates with the largest scores, ties to the smaller index.

    :param code: The code
    :param k: Budget, ``1 <= k <= N``. The leakage bound is stated for ``k <= |F|``;
        larger budgets warn with :class:`BudgetWarning`.
    """
    _check_budget(code, k, 1)
    if k > len(code.frozen_set):
        warnings.warn(
            "budget k = {} exceeds |F| = {}".format(k, len(code.frozen_set)),
            BudgetWarning,
        )
    table = score_table(code)
    order = np.argsort(-table.s, kind="stable")
    return _result(code, order[:k] + 1, table, "greedy", code.N)


@typechecked
def min_bound_selection(code: PolarCode, k: int) -> SelectionResult:
    """Publish the ``k`` coordinates with the smallest ``a_i``, which minimizes the bound."""
    _check_budget(code, k, 1)
    table = score_table(code)
    order = np.argsort(table.a, kind="stable")
    return _result(code, order[:k] + 1, table, "min_bound", code.N)


def _scan_chunk(
    code: PolarCode, k: int, short_circuit: bool, first: int
) -> Tuple[Optional[int], Tuple[int, ...], int]:
    best, best_P, examined = None, (), 0
    for rest in combinations(range(first + 1, code.N + 1), k - 1):
        P = (first,) + rest
        L, _, _ = leakage(code, P)
        examined += 1
        if best is None or L < best:
            best, best_P = L, P
            if L == 0 and short_circuit:
                break
    return best, best_P, examined


@typechecked
def brute_force_min_leakage(
    code: PolarCode,
    k: int,
    cap: int = DEFAULT_CANDIDATE_CAP,
    short_circuit: bool = True,
    context: Optional[DriverContext] = None,
) -> SelectionResult:
    """
    The lexicographically first ``k``-set of minimum leakage.

    Candidates are split by their first element, one task each, and the chunk
    results are reduced in lexicographic order. With ``short_circuit`` the scan
    stops at the first zero-leakage set and ``work`` counts the candidates
    examined up to it.

    :raises CapExceeded: if ``C(N, k) > cap``
    """
    _check_budget(code, k, 0)
    total = math.comb(code.N, k)
    if total > cap:
        raise CapExceeded(total, cap)
    table = score_table(code)
    if k == 0:
        return _result(code, (), table, "brute_force", 1)

    context = context or get_default_context()
    firsts = list(range(1, code.N - k + 2))
    chunks = context.map(partial(_scan_chunk, code, k, short_circuit), firsts)

    best, best_P, work = None, (), 0
    for L, P, examined in chunks:
        work += examined
        if best is None or L < best:
            best, best_P = L, P
        if short_circuit and best == 0:
            break
    logger.info(
        "brute force N=%d k=%d: leakage %d after %d of %d candidates",
        code.N,
        k,
        best,
        work,
        total,
    )
    return _result(code, best_P, table, "brute_force", work)


@dataclass(frozen=True)
class SweepRow:
    k: int
    L_greedy: int
    bound: int
    L_opt: int
    gap: int
    t_greedy_ms: float
    t_bf_ms: float


def sweep_report(
    code: PolarCode,
    ks: Union[int, Iterable[int], None] = None,
    cap: int = DEFAULT_CANDIDATE_CAP,
    context: Optional[DriverContext] = None,
) -> List[SweepRow]:
    """
    Greedy against brute force for every budget in ``ks``.

    :param ks: Budgets to compare; an integer ``k`` means ``1..k``, None means ``1..N``
    """
    if ks is None:
        ks = range(1, code.N + 1)
    elif isinstance(ks, int):
        ks = range(1, ks + 1)
    rows = []
    for k in ks:
        k = int(k)
        started = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BudgetWarning)
            greedy = score_greedy(code, k)
        t_greedy = (time.perf_counter() - started) * 1000
        started = time.perf_counter()
        best = brute_force_min_leakage(code, k, cap=cap, context=context)
        t_bf = (time.perf_counter() - started) * 1000
        rows.append(
            SweepRow(
                k=k,
                L_greedy=greedy.leakage,
                bound=greedy.bound,
                L_opt=best.leakage,
                gap=greedy.leakage - best.leakage,
                t_greedy_ms=t_greedy,
                t_bf_ms=t_bf,
            )
        )
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], stream: TextIO, manifest_hash: str = None):
    if manifest_hash is not None:
        stream.write("# manifest {}\n".format(manifest_hash))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.k,
                row.L_greedy,
                row.bound,
                row.L_opt,
                row.gap,
                "{:.3f}".format(row.t_greedy_ms),
                "{:.3f}".format(row.t_bf_ms),
            ]
        )


def read_sweep_csv(stream: TextIO) -> List[SweepRow]:
    lines = [line for line in stream if not line.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
        raise ArtifactError("sweep table header must be {}".format(",".join(SWEEP_COLUMNS)))
    try:
        return [
            SweepRow(
                k=int(r["k"]),
                L_greedy=int(r["L_greedy"]),
                bound=int(r["bound"]),
                L_opt=int(r["L_opt"]),
                gap=int(r["gap"]),
                t_greedy_ms=float(r["t_greedy_ms"]),
                t_bf_ms=float(r["t_bf_ms"]),
            )
            for r in reader
        ]
    except (TypeError, ValueError) as e:
        raise ArtifactError("malformed sweep table: {}".format(e))
