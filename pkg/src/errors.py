"""Exception hierarchy for the backscatter link simulator"""


class BackscatterSimError(Exception):
    """Base class for every error raised by the simulator"""


class ParameterError(BackscatterSimError, ValueError):
    """A physical or numeric parameter is outside its valid range"""


class DomainError(ParameterError):
    """A function was evaluated where it is undefined"""


class FramingError(BackscatterSimError, ValueError):
    """A chip or sample sequence does not split into whole symbols"""


class InvalidCodeError(BackscatterSimError, ValueError):
    """A chip pair is not a legal Manchester symbol"""


class TrainingError(BackscatterSimError):
    """A detector could not be trained from the supplied pilots"""


class ConfigError(BackscatterSimError):
    """An experiment configuration is malformed or inconsistent"""

    def __init__(self, message: str, key: str = None):
        super().__init__(message)
        self.key = key
