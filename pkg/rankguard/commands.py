"""
The jobs behind each ``rankguard`` subcommand.

Indices on the command line and in every artifact are 1-based. JSON artifacts
carry a ``"manifest"`` object; the CSV and text-matrix artifacts start with a
``# manifest <hash>`` line.
"""
import json
import logging
import posixpath
import re
from typing import Any, Dict, List, Union

import fsspec

from .exceptions import ArtifactError, ValidationError
from .gf2 import format_matrix_text
from .job import Job
from .leakage import (
    DEFAULT_AUDIT_SEED,
    LeakageCertificate,
    build_extractor,
    leaked_equation_report,
    verify_certificate,
)
from .polar import PolarCode, build_code, build_code_threshold
from .selection import (
    DEFAULT_CANDIDATE_CAP,
    brute_force_min_leakage,
    min_bound_selection,
    score_greedy,
    sweep_report,
    write_sweep_csv,
)
from .simulation import ChannelAssignment, run_experiment
from .tag import InputTag, OutputTag
from .util import parse_index_list

logger = logging.getLogger(__name__)


def parse_delta_spec(text: str) -> Union[float, List[float]]:
    """
    A scalar erasure probability, or ``@path`` to a file holding a JSON list or
    whitespace/comma separated numbers.
    """
    text = text.strip()
    if not text.startswith("@"):
        try:
            return float(text)
        except ValueError:
            raise ValidationError("bad erasure probability {!r}".format(text))
    path = text[1:]
    try:
        with fsspec.open(path, "r") as f:
            content = f.read()
    except OSError as e:
        raise ArtifactError("cannot read erasure probabilities from {}: {}".format(path, e))
    try:
        values = json.loads(content)
    except ValueError:
        values = [part for part in re.split(r"[\s,]+", content.strip()) if part]
    if not isinstance(values, list):
        values = [values]
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError):
        raise ValidationError("bad erasure probabilities in {}".format(path))


def read_json(tag) -> Dict[str, Any]:
    with tag.open() as f:
        try:
            data = json.load(f)
        except ValueError as e:
            raise ArtifactError("{} is not valid JSON: {}".format(tag.path, e))
    if not isinstance(data, dict):
        raise ArtifactError("{} must hold a JSON object".format(tag.path))
    return data


def write_json(tag, data: Dict[str, Any]):
    with tag.open() as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def load_code(tag) -> PolarCode:
    return PolarCode.from_descriptor(read_json(tag))


def _add_public_argument(parser):
    parser.add_argument(
        "--public",
        dest="public",
        type=parse_index_list,
        required=True,
        help="Published coordinates, comma separated 1-based indices",
    )


def _add_seed_argument(parser, default):
    parser.add_argument(
        "--seed", dest="seed", type=int, default=default, help="Seed for reproducibility"
    )


class ConstructJob(Job):
    command = "construct"
    description = "Build a polar code for a BEC and write its descriptor"

    code = OutputTag("code")

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--n", dest="n", type=int, required=True, help="log2 blocklength")
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument("--rate", dest="rate", type=float, help="Target rate")
        group.add_argument("--zeta", dest="zeta", type=float, help="Reliability threshold")
        parser.add_argument(
            "--delta",
            dest="delta",
            type=parse_delta_spec,
            required=True,
            help="Erasure probability, or @file of per-coordinate values",
        )

    @classmethod
    def params_from_args(cls, args):
        return {"n": args.n, "rate": args.rate, "zeta": args.zeta, "delta": args.delta}

    def script(self):
        n, rate, zeta = self.params["n"], self.params.get("rate"), self.params.get("zeta")
        delta = self.params["delta"]
        if (rate is None) == (zeta is None):
            raise ValidationError("exactly one of rate and zeta must be given")
        if rate is not None:
            code = build_code(n, delta, float(rate))
        else:
            code = build_code_threshold(n, delta, float(zeta))
        descriptor = code.to_descriptor()
        descriptor["manifest"] = self.manifest.stamp()
        write_json(self.code, descriptor)
        print("N = {}, |A| = {}".format(code.N, code.K))
        print("A = {}".format(",".join(str(i) for i in code.info_set)))
        return 0


class CertifyJob(Job):
    command = "certify"
    description = "Certify the leakage of a published set"

    code = InputTag("code")
    certificate = OutputTag("certificate")

    @classmethod
    def add_arguments(cls, parser):
        _add_public_argument(parser)
        _add_seed_argument(parser, DEFAULT_AUDIT_SEED)

    @classmethod
    def params_from_args(cls, args):
        return {"public": list(args.public), "seed": args.seed}

    def script(self):
        code = load_code(self.code)
        cert = build_extractor(code, self.params["public"], seed=self.params["seed"])
        data = cert.to_dict()
        data["manifest"] = self.manifest.stamp()
        write_json(self.certificate, data)
        print("rank(G_P) = {}, rank(G_FP) = {}".format(cert.rank_GP, cert.rank_GFP))
        print("L = {}".format(cert.leakage))
        for line in leaked_equation_report(cert):
            print("  {}".format(line))
        return 0


class ExtractJob(Job):
    command = "extract"
    description = "Write the adversary's extractor R as a text matrix"

    code = InputTag("code")
    extractor = OutputTag("extractor")

    @classmethod
    def add_arguments(cls, parser):
        _add_public_argument(parser)
        _add_seed_argument(parser, DEFAULT_AUDIT_SEED)

    @classmethod
    def params_from_args(cls, args):
        return {"public": list(args.public), "seed": args.seed}

    def script(self):
        code = load_code(self.code)
        cert = build_extractor(code, self.params["public"], seed=self.params["seed"])
        comments = [
            "manifest {}".format(self.manifest.digest),
            "P = {}".format(",".join(str(i) for i in cert.public_set)),
            "L = {}".format(cert.leakage),
        ] + leaked_equation_report(cert)
        with self.extractor.open() as f:
            f.write(format_matrix_text(cert.extractor, comments))
        print("L = {}".format(cert.leakage))
        return 0


class SelectJob(Job):
    command = "select"
    description = "Choose k coordinates to publish"

    code = InputTag("code")
    selection = OutputTag("selection")

    METHODS = ("greedy", "brute", "both", "min_bound")

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--k", dest="k", type=int, required=True, help="Budget")
        parser.add_argument(
            "--method", dest="method", choices=cls.METHODS, default="greedy"
        )
        parser.add_argument(
            "--cap",
            dest="cap",
            type=int,
            default=DEFAULT_CANDIDATE_CAP,
            help="Most candidate sets brute force may examine",
        )

    @classmethod
    def params_from_args(cls, args):
        return {"k": args.k, "method": args.method, "cap": args.cap}

    def script(self):
        code = load_code(self.code)
        k, method = self.params["k"], self.params.get("method", "greedy")
        if method not in self.METHODS:
            raise ValidationError("unknown selection method {!r}".format(method))
        results = []
        if method in ("greedy", "both"):
            results.append(score_greedy(code, k))
        if method in ("brute", "both"):
            cap = self.params.get("cap", DEFAULT_CANDIDATE_CAP)
            results.append(brute_force_min_leakage(code, k, cap=cap))
        if method == "min_bound":
            results.append(min_bound_selection(code, k))
        write_json(
            self.selection,
            {
                "results": [r.to_dict() for r in results],
                "manifest": self.manifest.stamp(),
            },
        )
        for r in results:
            print(
                "{}: P = {}, L = {}, bound = {}".format(
                    r.method, ",".join(str(i) for i in r.P), r.leakage, r.bound
                )
            )
        return 0


class SweepJob(Job):
    command = "sweep"
    description = "Compare greedy and brute-force selection across budgets"

    code = InputTag("code")
    sweep = OutputTag("sweep")

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument(
            "--k", dest="k", type=int, default=None, help="Largest budget; defaults to N"
        )
        parser.add_argument("--cap", dest="cap", type=int, default=DEFAULT_CANDIDATE_CAP)

    @classmethod
    def params_from_args(cls, args):
        return {"k": args.k, "cap": args.cap}

    def script(self):
        code = load_code(self.code)
        rows = sweep_report(
            code,
            self.params.get("k"),
            cap=self.params.get("cap", DEFAULT_CANDIDATE_CAP),
        )
        with self.sweep.open() as f:
            write_sweep_csv(rows, f, self.manifest.digest)
        worst = max((r.gap for r in rows), default=0)
        print("{} budgets, largest greedy gap {}".format(len(rows), worst))
        return 0


class SimulateJob(Job):
    command = "simulate"
    description = "Simulate public/private BEC transmission with an eavesdropper"

    config = InputTag("config")
    code = InputTag("code")
    report = OutputTag("report")

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--trials", dest="trials", type=int, default=None)
        _add_seed_argument(parser, None)

    @classmethod
    def params_from_args(cls, args):
        params = {}
        if args.trials is not None:
            params["trials"] = args.trials
        if args.seed is not None:
            params["seed"] = args.seed
        return params

    @staticmethod
    def resolve_code_path(config_path: str) -> str:
        """The ``code`` field of a config, relative paths taken from the config's directory."""
        try:
            with fsspec.open(config_path, "r") as f:
                config = json.load(f)
        except (OSError, ValueError) as e:
            raise ArtifactError("cannot read simulation config {}: {}".format(config_path, e))
        if not isinstance(config, dict) or not isinstance(config.get("code"), str):
            raise ArtifactError("simulation config needs a code path")
        path = config["code"]
        if "://" in path or posixpath.isabs(path):
            return path
        return posixpath.join(posixpath.dirname(config_path), path)

    def _build_manifest(self):
        # Tags are not bound yet while the manifest is built.
        config = read_json(self.input_files["config"])
        for key in ("P", "delta_pub", "delta_priv"):
            if key not in config:
                raise ArtifactError("simulation config is missing {}".format(key))
        self.params = {
            "P": config["P"],
            "delta_pub": config["delta_pub"],
            "delta_priv": config["delta_priv"],
            "trials": self.params.get("trials", config.get("trials", 1000)),
            "seed": self.params.get("seed", config.get("seed", 0)),
            "reuse_mask": bool(config.get("reuse_mask", False)),
        }
        return super()._build_manifest()

    def script(self):
        code = load_code(self.code)
        p = self.params
        assign = ChannelAssignment(
            tuple(p["P"]), float(p["delta_pub"]), float(p["delta_priv"])
        )
        report = run_experiment(
            code,
            assign,
            trials=int(p["trials"]),
            seed=int(p["seed"]),
            reuse_mask=p["reuse_mask"],
        )
        data = report.to_dict()
        data["manifest"] = self.manifest.stamp()
        write_json(self.report, data)
        print(
            "fer = {:.6g}, ber = {:.6g}, adversary checks {}/{}".format(
                report.fer, report.ber, report.adversary_checks_passed, report.trials
            )
        )
        return 0


class VerifyJob(Job):
    command = "verify"
    description = "Re-audit a stored certificate against its code"

    certificate = InputTag("certificate")
    code = InputTag("code")

    def script(self):
        code = load_code(self.code)
        cert = LeakageCertificate.from_dict(read_json(self.certificate), code)
        result = verify_certificate(cert)
        for check in result.checks:
            print("  {:<20} {}".format(check.name, "ok" if check.passed else "FAILED"))
        if not result.passed:
            for line in result.diagnostics():
                print(line)
            return 1
        print("certificate verified: L = {}".format(cert.leakage))
        return 0


JOBS = {
    job.command: job
    for job in (
        ConstructJob,
        CertifyJob,
        ExtractJob,
        SelectJob,
        SweepJob,
        SimulateJob,
        VerifyJob,
    )
}
