class PfpError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(PfpError):
    """Input text could not be turned into a well-formed TextBuffer."""

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} at offset {offset}")
        self.offset = offset


class RankOverflowError(PfpError):
    pass


class StructuralError(PfpError):
    """Derived structures are mutually inconsistent (parsing or build bug, or corrupt input)."""


class IndexFormatError(PfpError):
    pass


class VersionMismatchError(IndexFormatError):
    pass
