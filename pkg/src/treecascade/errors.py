"""Exception hierarchy shared by all structures."""


class TreeCascadeError(Exception):
    """Base class for every error raised by the library."""


class StructuralError(TreeCascadeError, ValueError):
    """Malformed tree: cycle, several roots, unknown parent, or degree above the limit."""


class DuplicateKeyError(TreeCascadeError, KeyError):
    pass


class InvalidHandleError(TreeCascadeError, KeyError):
    """A handle no longer addresses a live entry of the expected node."""


class NotFoundError(TreeCascadeError, KeyError):
    pass


class DomainError(TreeCascadeError, ValueError):
    """Arguments outside the operation's domain (bad range, non-ancestor, ...)."""


class TraceParseError(TreeCascadeError, ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
