from typing import Iterable, Set


class RankGuardError(Exception):
    pass


class ConfigurationError(RankGuardError):
    pass


class ValidationError(RankGuardError):
    """Raised for bad user input. The CLI maps these to exit code 2."""

    pass


class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    def __init__(
        self, indices: Iterable[int], upper: int, name: str = "index", base: int = 0
    ):
        self.indices = sorted(indices)
        self.upper = upper
        super().__init__(
            "{} out of range [{}:{}]: {}".format(
                name,
                base,
                upper - 1 + base,
                ", ".join(str(i) for i in self.indices),
            )
        )


class DuplicateIndex(ValidationError):
    def __init__(self, indices: Iterable[int], name: str = "index"):
        self.indices = sorted(indices)
        super().__init__(
            "duplicate {}: {}".format(name, ", ".join(str(i) for i in self.indices))
        )


class BadLength(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class CapExceeded(ValidationError):
    def __init__(self, required: int, cap: int, what: str = "candidates"):
        self.required = required
        self.cap = cap
        super().__init__("{} {} exceeds cap {}".format(required, what, cap))


class BadBudget(ValidationError):
    pass


class CodeMismatch(ValidationError):
    pass


class ArtifactError(ValidationError):
    pass


class TagSetError(ArtifactError):
    def __init__(self, actual: Set[str], expected: Set[str]):
        messages = []
        if len(actual - expected) > 0:
            messages.append("Extra files: {}".format(", ".join(sorted(actual - expected))))
        if len(expected - actual) > 0:
            messages.append(
                "Missing files: {}".format(", ".join(sorted(expected - actual)))
            )
        super().__init__("; ".join(messages))


class SingularMatrix(RankGuardError):
    pass


class NotASubspace(RankGuardError):
    pass


class DecodeFailure(RankGuardError):
    def __init__(self, index: int):
        self.index = index
        super().__init__("information bit u_{} is undetermined".format(index))


class UnverifiedCertificate(RankGuardError):
    pass


class SeriousErrorThatYouShouldOpenAnIssueForIfYouGet(RankGuardError):
    pass


class UnusedArtifactWarning(Warning):
    pass


class BudgetWarning(Warning):
    pass


class MaskReuseWarning(Warning):
    pass
