import contextvars

from .exceptions import RankGuardError

input_files_ctx = contextvars.ContextVar("input_files")
output_files_ctx = contextvars.ContextVar("output_files")


class BaseTag:
    def __init__(self, name):
        self.name = name

    def open(self, *args, **kwargs):
        return self.ref.open(*args, **kwargs)

    def touch(self):
        self.ref.touch()

    @property
    def path(self):
        return self.ref.path

    @property
    def ref(self):
        try:
            files = self._files_ctx.get()
        except LookupError:
            raise RankGuardError(
                "Cannot reference artifact {} outside of a running job!".format(self.name)
            )
        return files[self.name]


class InputTag(BaseTag):
    _files_ctx = input_files_ctx


class OutputTag(BaseTag):
    _files_ctx = output_files_ctx
