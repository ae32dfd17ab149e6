import argparse
import logging
import sys
from time import time
from typing import List, Optional

from .commands import JOBS, SimulateJob
from .exceptions import ConfigurationError, RankGuardError, ValidationError
from .job import TOOL_VERSION

logger = logging.getLogger(__name__)

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rankguard",
        description="Exact leakage certificates for polar codes with published coordinates. "
        "All indices are 1-based.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + TOOL_VERSION)
    parser.add_argument(
        "-v",
        "--verbose",
        dest="verbose",
        action="count",
        default=0,
        help="Log more; repeat for debug output",
    )
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    for command, Job in JOBS.items():
        sub = subparsers.add_parser(command, help=Job.description)
        for tag in sorted(Job.input_tags):
            sub.add_argument(
                "--{}".format(tag),
                dest=tag,
                action="store",
                type=str,
                # simulate falls back to the code path in its config
                required=not (Job is SimulateJob and tag == "code"),
                help="Path for input tag {}".format(tag),
            )
        for tag in sorted(Job.output_tags):
            sub.add_argument(
                "--{}".format(tag),
                "--out",
                dest=tag,
                action="store",
                type=str,
                required=True,
                help="Path for output tag {}".format(tag),
            )
        sub.add_argument(
            "--overwrite",
            dest="__overwrite__",
            action="store_true",
            help="Whether to overwrite any existing output files",
        )
        Job.add_arguments(sub)
    return parser


def _make_job(args):
    Job = JOBS[args.command]
    input_paths = {tag: getattr(args, tag) for tag in Job.input_tags}
    if Job is SimulateJob and input_paths["code"] is None:
        input_paths["code"] = SimulateJob.resolve_code_path(input_paths["config"])
    output_paths = {tag: getattr(args, tag) for tag in Job.output_tags}
    return Job(
        input_paths,
        output_paths,
        params=Job.params_from_args(args),
        overwrite=args.__overwrite__,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the ``rankguard`` command.

    :return: 0 on success, 1 when a verification fails, 2 on invalid input
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    except (ValidationError, ConfigurationError) as e:
        print("error: {}".format(e), file=sys.stderr)
        return 2

    logging.basicConfig(
        level=LOG_LEVELS[min(args.verbose, len(LOG_LEVELS) - 1)],
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )

    try:
        job = _make_job(args)
        print("[ RankGuard ]")
        print("Running {} with following configuration:".format(job.command))
        print("  Inputs:")
        for tag, path in sorted(job.input_paths.items()):
            print("    {}\t\t{}".format(tag, path))
        print("  Outputs:")
        for tag, path in sorted(job.output_paths.items()):
            print("    {}\t\t{}".format(tag, path))
        start = time()

        status = job.run()

        end = time()
        seconds = round((end - start) * 1000) / 1000
        print("Finished! (took {} seconds)".format(seconds))
        return status
    except (ValidationError, ConfigurationError) as e:
        print("error: {}".format(e), file=sys.stderr)
        return 2
    except RankGuardError as e:
        print("error: {}".format(e), file=sys.stderr)
        return 1


def run():
    sys.exit(main())
