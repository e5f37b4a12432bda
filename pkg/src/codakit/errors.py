"""Exception types shared across the toolkit."""


class CodaError(ValueError):
    """Raised when input data violate an operation's preconditions."""


class CsvFormatError(CodaError):
    """Malformed CSV input; carries the 1-based line number of the offence."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
