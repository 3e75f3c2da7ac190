"""
Compiler error hierarchy.
Library code raises these; only the command-line entry point maps them to exit codes.
"""


class CompileError(Exception):
    """Base class for every error raised while compiling a loop program."""


class ParseError(CompileError):
    """Syntax or name-resolution error with a source position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        self.detail = message
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ValidationError(CompileError):
    """Semantically invalid input, e.g. an out-of-bounds index or a degenerate CZ."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class SchedulingError(CompileError):
    """No legal placement was found at the requested initiation interval."""

    def __init__(self, message, ii=None):
        self.ii = ii
        super().__init__(message)


class VerificationError(CompileError):
    """The compiled program is not equivalent to the source program."""

    def __init__(self, message, deviation=None):
        self.deviation = deviation
        super().__init__(message)
