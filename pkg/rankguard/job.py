import logging
from abc import abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
from warnings import warn

from typeguard import typechecked

from .exceptions import ArtifactError, TagSetError, UnusedArtifactWarning
from .fileref import FileRef
from .tag import InputTag, OutputTag, input_files_ctx, output_files_ctx
from .util import canonical_json, classproperty, sha256_hex

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"

PathDict = Dict[str, str]
FileDict = Dict[str, FileRef]


@dataclass(frozen=True)
class RunManifest:
    """
    What a job ran on, embedded in every artifact it writes.

    :param command: The job's command name
    :param inputs: Input tag to path
    :param input_digests: Input tag to sha256 of the file's bytes
    :param outputs: Output tag to path
    :param params: The job's parameters, JSON-serializable
    :param seed: The seed the job ran with, if any
    :param tool_version: Version of rankguard that wrote the artifact
    """

    command: str
    inputs: Dict[str, str] = field(default_factory=dict)
    input_digests: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    tool_version: str = TOOL_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "inputs": dict(self.inputs),
            "input_digests": dict(self.input_digests),
            "outputs": dict(self.outputs),
            "params": dict(self.params),
            "seed": self.seed,
            "tool_version": self.tool_version,
        }

    @property
    def digest(self) -> str:
        return sha256_hex(canonical_json(self.to_dict()))

    def stamp(self) -> Dict[str, Any]:
        """The manifest as embedded in JSON artifacts, hash included."""
        stamped = self.to_dict()
        stamped["hash"] = self.digest
        return stamped


class Job:
    """
    Abstract base class for every rankguard command

    Subclasses declare their artifacts as ``InputTag``/``OutputTag`` class
    attributes and implement :meth:`script`.

    :param input_paths: Dictionary of input tags to files.
    :param output_paths: Dictionary of output tags to files.
    :param optional params: The command's parameters, recorded in the manifest.
    :param optional overwrite: Whether or not to overwrite existing output files.
    """

    command = None
    description = ""

    @typechecked
    def __init__(
        self,
        input_paths: PathDict,
        output_paths: PathDict,
        params: Optional[Dict[str, Any]] = None,
        overwrite: bool = False,
    ):
        self.input_paths = input_paths
        self.output_paths = output_paths
        self.params = dict(params or {})
        self.overwrite = overwrite

        self.input_files: FileDict = {}
        self.output_files: FileDict = {}
        self.manifest: Optional[RunManifest] = None

    @classproperty
    def input_tags(cls):
        return {
            value.name
            for klass in cls.__mro__
            for value in vars(klass).values()
            if isinstance(value, InputTag)
        }

    @classproperty
    def output_tags(cls):
        return {
            value.name
            for klass in cls.__mro__
            for value in vars(klass).values()
            if isinstance(value, OutputTag)
        }

    @classproperty
    def name(cls):
        return cls.__name__

    @classmethod
    def add_arguments(cls, parser):
        """Add the job's own command-line flags to its subparser."""
        pass

    @classmethod
    def params_from_args(cls, args) -> Dict[str, Any]:
        return {}

    def _init_file_dicts(self, input_paths: PathDict, output_paths: PathDict):
        if set(input_paths) != self.input_tags:
            raise TagSetError(set(input_paths), self.input_tags)

        if set(output_paths) != self.output_tags:
            raise TagSetError(set(output_paths), self.output_tags)

        intersection = set(input_paths.values()) & set(output_paths.values())
        if len(intersection):
            raise ArtifactError(
                "File included as both input and output: {}".format(
                    ", ".join(sorted(intersection))
                )
            )

        self.input_files = {
            tag: FileRef(path, read_bit=True, write_bit=False)
            for tag, path in input_paths.items()
        }
        self.output_files = {
            tag: FileRef(path, read_bit=False, write_bit=True)
            for tag, path in output_paths.items()
        }

    def _validate_file_existence(self):
        for ref in self.input_files.values():
            if not ref.exists():
                raise ArtifactError(
                    "Referenced input path {} does not exist!".format(ref.path)
                )

        if self.overwrite:
            return
        for ref in self.output_files.values():
            if ref.exists():
                raise ArtifactError(
                    "Referenced output path {} already exists, and overwrite is not enabled".format(
                        ref.path
                    )
                )

    def _build_manifest(self) -> RunManifest:
        return RunManifest(
            command=self.command or self.name,
            inputs=dict(self.input_paths),
            input_digests={
                tag: ref.digest() for tag, ref in sorted(self.input_files.items())
            },
            outputs=dict(self.output_paths),
            params=dict(self.params),
            seed=self.params.get("seed"),
        )

    def run(self) -> int:
        """
        Run the job.

        :return: The command's exit status, 0 on success
        """
        self._init_file_dicts(self.input_paths, self.output_paths)
        self._validate_file_existence()
        self.manifest = self._build_manifest()
        logger.info("running %s (manifest %s)", self.name, self.manifest.digest[:12])

        input_token = input_files_ctx.set(self.input_files)
        output_token = output_files_ctx.set(self.output_files)
        try:
            status = self.script()
            self._warn_if_files_untouched()
        finally:
            input_files_ctx.reset(input_token)
            output_files_ctx.reset(output_token)
        return status

    def _warn_if_files_untouched(self):
        refs: List[Tuple[str, FileRef]] = list(self.input_files.items()) + list(
            self.output_files.items()
        )
        for tag, ref in refs:
            if not ref.opened:
                warn(
                    "Unused file for tag {}: {}".format(tag, ref.path),
                    UnusedArtifactWarning,
                )

    @abstractmethod
    def script(self) -> int:
        """
        What the job actually does. Reads and writes artifacts through the
        tags and returns the exit status.
        """
        pass
