from base64 import b64decode
from io import StringIO
from typing import IO

import fsspec

from .exceptions import ArtifactError
from .util import sha256_hex


class FileRef:
    """Represents a reference to an artifact. Jobs get these through their tags in script()"""

    def __init__(self, path: str, read_bit: bool, write_bit: bool):
        self.path = path
        self._read = read_bit
        self._write = write_bit
        self.opened = False

    def exists(self) -> bool:
        """
        Determine whether the file specified by the FileRef exists

        :return: Whether the file exists
        """
        if self._get_protocol() == "data":
            return True

        try:
            with fsspec.open(self.path):
                pass
        except (OSError, ValueError):
            return False
        return True

    def open(self) -> IO[str]:
        """
        Open the FileRef for use with textual data

        :return: The stream object for interacting with the FileRef
        """
        return self._open_helper()

    def touch(self):
        """Mark the FileRef as being opened, without actually opening it."""
        self.opened = True

    def read_bytes(self) -> bytes:
        """Contents of the file. Does not mark the FileRef as opened."""
        if self._get_protocol() == "data":
            return self._data()
        with fsspec.open(self.path, "rb") as f:
            return f.read()

    def digest(self) -> str:
        return sha256_hex(self.read_bytes())

    def _data(self) -> bytes:
        return b64decode(self.path.split("://", 1)[1])

    def _open_helper(self):
        self.touch()

        if self._get_protocol() == "data":
            if self._write:
                raise ArtifactError("Cannot write to data protocol")
            return StringIO(initial_value=self._data().decode("utf-8"))

        mode = ""
        if self._read:
            mode = mode + "r"
        if self._write:
            mode = mode + "w"
        return fsspec.open(self.path, mode)

    def _get_protocol(self):
        if "://" in self.path:
            return self.path.split("://")[0]
        return None
