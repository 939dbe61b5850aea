"""Exceptions raised by the model, the engine and the litmus parser."""


class ModelError(Exception):
    pass


class UnknownRule(ModelError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown rule {self.name!r}"


class RuleNotEnabled(ModelError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"rule {self.name!r} is not enabled in this state"


class ScheduleStuck(ModelError):
    """A scheduled rule was not enabled; carries the state it failed on."""

    def __init__(self, index, rule, state, trace=None):
        super().__init__(index, rule)
        self.index = index
        self.rule = rule
        self.state = state
        self.trace = trace

    def __str__(self):
        return f"schedule stuck at step {self.index}: {self.rule!r} not enabled"


class UnknownProperty(ModelError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown property {self.name!r}"


class ParseError(ModelError, ValueError):
    def __init__(self, message, line=0, column=0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.message}"


class UnknownRuleName(ParseError):
    pass


class UnknownField(ParseError):
    pass
