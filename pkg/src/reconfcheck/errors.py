"""Shared exception types, kept small so the CLI can map them to exit codes."""


class InputError(Exception):
    """Bad user input: malformed file, unknown name, invalid model."""


class ParseError(InputError):
    """Syntax error in one of the text formats, with position context."""

    def __init__(self, message, *, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {column}" if column is not None else "")
        if source:
            where += f" in {source}"
        super().__init__(message + where)


class ResourceCapExceeded(InputError):
    """An enumeration grew past its configured cap."""
