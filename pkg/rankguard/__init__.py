from .job import TOOL_VERSION as __version__
from .gf2 import BitMatrix, RowBasis, rank, row_reduce, multiply, invert
from .polar import (
    PolarCode,
    polar_transform,
    encode,
    encode_batch,
    bec_reliability,
    build_code,
    build_code_threshold,
)
from .leakage import (
    LeakageCertificate,
    leakage,
    build_extractor,
    verify_certificate,
    exhaustive_mi_oracle,
    leaked_equation_report,
    certify_many,
)
from .selection import (
    score_table,
    score_greedy,
    brute_force_min_leakage,
    sweep_report,
)
from .simulation import (
    ChannelAssignment,
    SimulationReport,
    transmit,
    sc_decode,
    adversary_observe,
    run_experiment,
)
from .context import DriverContext
from .tag import InputTag, OutputTag
from .job import Job, RunManifest
from .cli import main
