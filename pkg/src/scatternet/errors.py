class ScatternetError(ValueError):
    """Base class for invalid inputs and parameters."""


class InvalidDimension(ScatternetError):
    pass


class RadiusOutOfRange(ScatternetError):
    pass


class InvalidParameters(ScatternetError):
    pass


class NTooSmall(ScatternetError):
    pass


class NotConnected(ScatternetError):
    pass
