class ValidationError(ValueError):
    """An input violates an invariant of the type it is supposed to build."""


class StepError(ValueError):
    def __init__(self, index, message):
        self.index = index
        super(StepError, self).__init__(f"step {index}: {message}")


class SequenceParseError(ValueError):
    def __init__(self, line_number, message):
        self.line_number = line_number
        super(SequenceParseError, self).__init__(f"line {line_number}: {message}")


class OracleError(RuntimeError):
    pass
