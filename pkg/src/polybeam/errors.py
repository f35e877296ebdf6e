class DomainError(ValueError):
    """Input outside an operation's domain."""


class EmptyTruncationError(DomainError):
    """Thresholding removed every term."""

    def __init__(self, message="empty truncation"):
        super().__init__(message)


class DegenerateSystemError(RuntimeError):
    """The linearized resultant pencil is numerically singular."""

    def __init__(self, message="degenerate system"):
        super().__init__(message)


class NonIsolatedRootsError(RuntimeError):
    """The two polynomials share a common curve of zeros."""

    def __init__(self, message="non-isolated roots"):
        super().__init__(message)
