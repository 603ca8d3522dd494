"""Exception and warning types shared across the package."""


class SpacAttackError(Exception):
    """Base class for all package errors."""


class IsolatedNodeError(SpacAttackError):
    """A node has degree zero where a positive degree is required."""

    def __init__(self, node: int):
        self.node = node
        super().__init__(f"node {node} is isolated (degree 0)")


class ShapeMismatchError(SpacAttackError):
    """An array argument has the wrong shape."""


class DomainError(SpacAttackError):
    """An array argument has entries outside its allowed range."""


class LengthMismatchError(SpacAttackError):
    """Two vectors that must align have different lengths."""


class ConvergenceFailureError(SpacAttackError):
    """An iterative eigensolver failed to converge."""


class ZeroDistanceError(SpacAttackError):
    """Spectral distance is zero; its gradient is undefined there."""


class DegenerateEigenvaluesError(SpacAttackError):
    """A used eigenvalue has multiplicity > 1 and strict mode was requested."""


class BudgetTooSmallError(SpacAttackError):
    """The flip budget rounds down to zero edges."""


class BudgetTooLargeError(SpacAttackError):
    """The flip budget exceeds the number of available pairs."""


class MissingLabelsError(SpacAttackError):
    """The operation needs node labels the graph does not carry."""


class MissingFeaturesError(SpacAttackError):
    """The operation needs node features the graph does not carry."""


class UnlabeledTargetError(SpacAttackError):
    """An attack objective targets nodes without labels."""


class ParseError(SpacAttackError):
    """A dataset file failed to parse."""

    def __init__(self, path, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class InconsistentDimsError(SpacAttackError):
    """Dataset files disagree about the number of nodes or features."""


class DegenerateSpectrumWarning(UserWarning):
    """A requested boundary eigenvalue is repeated; eigenvector basis is arbitrary."""


class DuplicateEdgeWarning(UserWarning):
    """An edge list contains duplicate pairs; they were deduplicated."""


class DisconnectedOutputWarning(UserWarning):
    """A generated graph contained an isolated node that was patched."""
