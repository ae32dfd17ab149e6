"""
Exact leakage of polar-code information bits through published coordinates.

With uniform frozen bits, publishing the coordinates ``P`` of ``x = u G_N``
leaks ``L(P) = rank(G_P) - rank(G_{F,P})`` bits about the information bits,
where ``G_P`` stacks ``G_{A,P}`` over ``G_{F,P}``. A certificate carries that
number together with an extractor ``R`` for which ``x_P R = u_A (G_{A,P} R)``
holds for every frame, whatever the frozen bits are.
"""
import logging
from dataclasses import dataclass, replace
from functools import partial
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .context import DriverContext, get_default_context
from .exceptions import (
    ArtifactError,
    CapExceeded,
    CodeMismatch,
    DimensionMismatch,
    SeriousErrorThatYouShouldOpenAnIssueForIfYouGet,
)
from .gf2 import (
    BitMatrix,
    extend_basis,
    independent_rows,
    invert,
    multiply,
    rank,
    row_reduce,
    select_submatrix,
    vstack,
)
from .polar import PolarCode, encode_batch
from .util import normalize_index_set, to_zero_based

logger = logging.getLogger(__name__)

FROZEN_ASSUMPTION = "frozen bits are uniform and drawn fresh for every frame"
DEFAULT_AUDIT_SEED = 1729
AUDIT_FRAMES = 100
MAX_ORACLE_BLOCKLENGTH = 20

_CERTIFICATE_FIELDS = {"code", "P", "rank_GP", "rank_GFP", "L", "R", "M", "verified", "seed"}


def _public_set(code: PolarCode, P: Iterable[int]) -> Tuple[int, ...]:
    return normalize_index_set(P, code.N, "public index")


def _split(code: PolarCode, P: Tuple[int, ...], G: Optional[BitMatrix] = None):
    G = code.generator if G is None else G
    cols = to_zero_based(P)
    G_AP = select_submatrix(G, code.info_index, cols)
    G_FP = select_submatrix(G, code.frozen_index, cols)
    return G_AP, G_FP


@dataclass(frozen=True)
class LeakageCertificate:
    """
    The exact leakage of one published set, with the adversary's extractor.

    :param code: The code the certificate speaks about
    :param public_set: Published coordinates P, ascending 1-based indices
    :param rank_GP: rank of ``G_P``
    :param rank_GFP: rank of ``G_{F,P}``
    :param leakage: ``rank_GP - rank_GFP`` bits
    :param extractor: ``|P| x L`` matrix R
    :param leaked_combinations: ``|A| x L`` matrix ``M = G_{A,P} R``
    :param verified: Whether :func:`verify_certificate` passed
    :param seed: Seed of the random-frame audit
    :param assumption: What the leakage figure is conditional on
    """

    code: PolarCode
    public_set: Tuple[int, ...]
    rank_GP: int
    rank_GFP: int
    leakage: int
    extractor: BitMatrix
    leaked_combinations: BitMatrix
    verified: bool = False
    seed: int = DEFAULT_AUDIT_SEED
    assumption: str = FROZEN_ASSUMPTION

    @property
    def L(self) -> int:
        return self.leakage

    @property
    def code_ref(self) -> Dict[str, Any]:
        return {
            "n": self.code.n,
            "info_set": list(self.code.info_set),
            "digest": self.code.digest(),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "code": self.code_ref,
            "P": list(self.public_set),
            "rank_GP": self.rank_GP,
            "rank_GFP": self.rank_GFP,
            "L": self.leakage,
            "R": self.extractor.to_row_strings(),
            "M": self.leaked_combinations.to_row_strings(),
            "verified": self.verified,
            "seed": self.seed,
            "assumption": self.assumption,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], code: PolarCode) -> "LeakageCertificate":
        """
        Load a certificate against the code it references.

        Only the structure is checked here; the numbers are audited by
        :func:`verify_certificate`, so a tampered certificate still loads.
        ``P`` is sorted on load and the rows of R are permuted with it.
        """
        missing = _CERTIFICATE_FIELDS - set(data)
        if missing:
            raise ArtifactError(
                "certificate is missing {}".format(", ".join(sorted(missing)))
            )
        ref = data["code"]
        if not isinstance(ref, dict) or ref.get("digest") != code.digest():
            raise CodeMismatch("certificate does not reference the supplied code")
        for key in ("rank_GP", "rank_GFP", "L", "seed"):
            if not isinstance(data[key], int) or isinstance(data[key], bool):
                raise ArtifactError("certificate field {} must be an integer".format(key))
        if not isinstance(data["verified"], bool):
            raise ArtifactError("certificate field verified must be a boolean")
        if not all(isinstance(i, int) for i in data["P"]):
            raise ArtifactError("certificate field P must list integers")
        P = list(data["P"])
        public_set = normalize_index_set(P, code.N, "public index")
        R = _matrix_from_rows(data["R"], data["L"])
        M = _matrix_from_rows(data["M"], R.cols)
        if R.rows == len(P):
            R = R.take_rows(sorted(range(len(P)), key=P.__getitem__))
        return cls(
            code=code,
            public_set=public_set,
            rank_GP=data["rank_GP"],
            rank_GFP=data["rank_GFP"],
            leakage=data["L"],
            extractor=R,
            leaked_combinations=M,
            verified=data["verified"],
            seed=data["seed"],
            assumption=data.get("assumption", FROZEN_ASSUMPTION),
        )


def _matrix_from_rows(rows: Sequence[str], fallback_cols: int) -> BitMatrix:
    if not isinstance(rows, list) or not all(isinstance(r, str) for r in rows):
        raise ArtifactError("matrices are stored as lists of row strings")
    cols = len(rows[0].strip()) if rows else fallback_cols
    return BitMatrix.from_rows(rows, max(cols, 0))


def leakage(
    code: PolarCode, P: Iterable[int], G: Optional[BitMatrix] = None
) -> Tuple[int, int, int]:
    """
    Exact leakage of publishing the coordinates ``P``.

    :param code: The code
    :param P: 1-based coordinate indices
    :return: ``(L, rank_GP, rank_GFP)``
    """
    P = _public_set(code, P)
    G_AP, G_FP = _split(code, P, G)
    rank_GP = rank(vstack(G_AP, G_FP))
    rank_GFP = rank(G_FP)
    return rank_GP - rank_GFP, rank_GP, rank_GFP


def zero_leakage_criterion(code: PolarCode, P: Iterable[int]) -> bool:
    """
    Whether every row of ``G_{A,P}`` lies in the row space of ``G_{F,P}``.

    Decided by membership tests, without going through the rank difference.
    """
    P = _public_set(code, P)
    G_AP, G_FP = _split(code, P)
    return bool(row_reduce(G_FP).contains(G_AP).all())


def _extractor(G_AP: BitMatrix, G_FP: BitMatrix) -> Tuple[BitMatrix, int, int]:
    width = G_FP.cols
    V = row_reduce(G_FP)
    Q = row_reduce(vstack(G_AP, G_FP))
    L = Q.rank - V.rank
    if L == 0:
        return BitMatrix.zeros(width, 0), Q.rank, V.rank
    q_bar = extend_basis(V, Q)
    stacked = vstack(V.matrix, q_bar, BitMatrix.identity(width))
    keep = independent_rows(stacked)
    head = V.rank + L
    if keep[:head] != list(range(head)) or len(keep) != width:
        raise SeriousErrorThatYouShouldOpenAnIssueForIfYouGet(
            "basis completion kept rows {} of {}".format(keep, stacked.rows)
        )
    basis = stacked.take_rows(keep)
    phi = np.zeros((width, L), dtype=np.uint8)
    phi[np.arange(V.rank, head), np.arange(L)] = 1
    R = multiply(invert(basis), BitMatrix.from_dense(phi))
    return R, Q.rank, V.rank


def build_extractor(
    code: PolarCode,
    P: Iterable[int],
    seed: int = DEFAULT_AUDIT_SEED,
    G: Optional[BitMatrix] = None,
) -> LeakageCertificate:
    """
    Certify the leakage of ``P`` and construct the adversary's extractor.

    ``R`` sends a basis of ``rowspace(G_{F,P})`` to zero and the coset
    representatives completing it to ``rowspace(G_P)`` to unit vectors; the
    remaining directions are filled with unit vectors and also sent to zero.

    :param code: The code
    :param P: 1-based coordinate indices
    :param optional seed: Seed of the random-frame audit
    :param optional G: Generator to use instead of the code's own
    :return: A certificate, audited by :func:`verify_certificate`
    """
    P = _public_set(code, P)
    G_AP, G_FP = _split(code, P, G)
    R, rank_GP, rank_GFP = _extractor(G_AP, G_FP)
    cert = LeakageCertificate(
        code=code,
        public_set=P,
        rank_GP=rank_GP,
        rank_GFP=rank_GFP,
        leakage=rank_GP - rank_GFP,
        extractor=R,
        leaked_combinations=multiply(G_AP, R),
        seed=seed,
    )
    result = verify_certificate(cert, G)
    if not result.passed:
        raise SeriousErrorThatYouShouldOpenAnIssueForIfYouGet(
            "freshly built certificate failed its audit: {}".format(
                "; ".join(result.diagnostics())
            )
        )
    logger.debug("certified |P|=%d with L=%d", len(P), cert.leakage)
    return replace(cert, verified=True)


def certify_many(
    code: PolarCode,
    public_sets: Iterable[Iterable[int]],
    context: Optional[DriverContext] = None,
) -> List[LeakageCertificate]:
    """Certify several published sets; results come back in input order."""
    context = context or get_default_context()
    tasks = [tuple(P) for P in public_sets]
    return context.map(partial(build_extractor, code), tasks)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerificationResult:
    checks: Tuple[CheckOutcome, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> Tuple[CheckOutcome, ...]:
        return tuple(check for check in self.checks if not check.passed)

    def diagnostics(self) -> List[str]:
        return [check.detail for check in self.failures]

    def __bool__(self):
        return self.passed


def verify_certificate(
    cert: LeakageCertificate,
    G: Optional[BitMatrix] = None,
    frames: int = AUDIT_FRAMES,
) -> VerificationResult:
    """
    Re-audit a certificate from scratch.

    Recomputes both ranks, checks the extractor annihilates the frozen part,
    that ``G_{A,P} R`` has rank L and equals the stored M, and that
    ``x_P R == u_A M`` on ``frames`` random frames drawn with the certificate's seed.

    :raises DimensionMismatch: if the certificate cannot belong to ``G`` and the code's split
    """
    code = cert.code
    G = code.generator if G is None else G
    if G.shape != (code.N, code.N):
        raise DimensionMismatch(
            "generator is {}x{}, code has N = {}".format(G.rows, G.cols, code.N)
        )
    P = _public_set(code, cert.public_set)
    R = cert.extractor
    M = cert.leaked_combinations
    if R.rows != len(P):
        raise DimensionMismatch("extractor has {} rows, |P| = {}".format(R.rows, len(P)))
    if M.rows != code.K:
        raise DimensionMismatch(
            "leaked-combination matrix has {} rows, |A| = {}".format(M.rows, code.K)
        )

    G_AP, G_FP = _split(code, P, G)
    rank_GP = rank(vstack(G_AP, G_FP))
    rank_GFP = rank(G_FP)
    L = rank_GP - rank_GFP
    checks = []

    checks.append(
        CheckOutcome(
            "rank_identity",
            (cert.rank_GP, cert.rank_GFP, cert.leakage) == (rank_GP, rank_GFP, L),
            "rank identity mismatch: certificate says L = {} - {} = {}, "
            "recomputed L = {} - {} = {}".format(
                cert.rank_GP, cert.rank_GFP, cert.leakage, rank_GP, rank_GFP, L
            ),
        )
    )
    checks.append(
        CheckOutcome(
            "extractor_shape",
            R.cols == cert.leakage and M.cols == R.cols,
            "extractor shape mismatch: R has {} columns, M has {}, L = {}".format(
                R.cols, M.cols, cert.leakage
            ),
        )
    )
    checks.append(
        CheckOutcome(
            "frozen_annihilation",
            multiply(G_FP, R).is_zero(),
            "frozen annihilation failed: G_FP R is not zero",
        )
    )
    GR = multiply(G_AP, R)
    leaked_rank = rank(GR)
    checks.append(
        CheckOutcome(
            "leaked_rank",
            leaked_rank == L,
            "leaked rank mismatch: rank(G_AP R) = {}, L = {}".format(leaked_rank, L),
        )
    )
    checks.append(
        CheckOutcome(
            "leaked_matrix",
            GR == M,
            "leaked matrix mismatch: M differs from G_AP R",
        )
    )
    if M.cols == R.cols:
        bad = _frame_mismatches(code, P, G, R, M, cert.seed, frames)
        checks.append(
            CheckOutcome(
                "frame_consistency",
                bad == 0,
                "frame consistency failed: x_P R != u_A M in {} of {} frames".format(
                    bad, frames
                ),
            )
        )
    else:
        checks.append(
            CheckOutcome(
                "frame_consistency",
                False,
                "frame consistency skipped: R and M widths differ",
            )
        )
    result = VerificationResult(tuple(checks))
    if not result.passed:
        logger.info("certificate failed %s", ", ".join(c.name for c in result.failures))
    return result


def _frame_mismatches(code, P, G, R, M, seed, frames) -> int:
    rng = np.random.default_rng(seed)
    U = rng.integers(0, 2, size=(frames, code.N), dtype=np.uint8)
    X = multiply(BitMatrix.from_dense(U), G).to_dense()
    x_P = BitMatrix.from_dense(X[:, to_zero_based(P)])
    u_A = BitMatrix.from_dense(U[:, code.info_index])
    lhs = multiply(x_P, R).data
    rhs = multiply(u_A, M).data
    return int((lhs != rhs).any(axis=1).sum())


def _keys(bits: np.ndarray) -> np.ndarray:
    weights = np.left_shift(np.int64(1), np.arange(bits.shape[1], dtype=np.int64))
    return bits.astype(np.int64) @ weights


def _entropy(keys: np.ndarray) -> float:
    _, counts = np.unique(keys, return_counts=True)
    p = counts / keys.size
    return float(-(p * np.log2(p)).sum())


def exhaustive_mi_oracle(code: PolarCode, P: Iterable[int]) -> float:
    """
    ``I(u_A; x_P)`` in bits, by enumerating every input ``u`` with equal weight.

    Independent of the rank identity, so it serves as its ground truth.
    Only for ``N <= 20``.
    """
    if code.N > MAX_ORACLE_BLOCKLENGTH:
        raise CapExceeded(code.N, MAX_ORACLE_BLOCKLENGTH, "blocklength for enumeration")
    P = _public_set(code, P)
    N = code.N
    idx = np.arange(1 << N, dtype=np.int64)
    U = ((idx[:, None] >> np.arange(N, dtype=np.int64)) & 1).astype(np.uint8)
    X = encode_batch(U)
    keys_A = _keys(U[:, code.info_index])
    keys_P = _keys(X[:, to_zero_based(P)])
    joint = (keys_A << len(P)) | keys_P
    return _entropy(keys_P) + _entropy(keys_A) - _entropy(joint)


def leaked_equation_report(cert: LeakageCertificate) -> List[str]:
    """
    One XOR equation per extractor column, e.g. ``x_2 = u_2 ⊕ u_4``.

    The left side lists the published coordinates the column of R selects, the
    right side the information bits the matching column of M selects.
    """
    R = cert.extractor.to_dense()
    M = cert.leaked_combinations.to_dense()
    lines = []
    for col in range(cert.extractor.cols):
        lhs = [cert.public_set[i] for i in np.flatnonzero(R[:, col])]
        rhs = [cert.code.info_set[j] for j in np.flatnonzero(M[:, col])]
        lines.append(
            "{} = {}".format(
                " ⊕ ".join("x_{}".format(i) for i in lhs) or "0",
                " ⊕ ".join("u_{}".format(j) for j in rhs) or "0",
            )
        )
    return lines
