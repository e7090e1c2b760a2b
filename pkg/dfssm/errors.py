class DFSSMError(Exception):
    pass


class DimensionError(DFSSMError, ValueError):
    pass


class NumericError(DFSSMError, ArithmeticError):
    pass


class UsageError(DFSSMError):
    pass


class ConfigError(DFSSMError, ValueError):
    pass


class ImageFormatError(DFSSMError, ValueError):
    pass


class ImageIOError(DFSSMError, OSError):
    def __init__(self, path: str, reason: str):
        OSError.__init__(self, f'Image I/O failed for {path!r} - {reason}')
        self.path = path
        self.reason = reason


class CheckpointFormatError(DFSSMError, ValueError):
    pass


class CheckpointMismatchError(DFSSMError):
    def __init__(self, name: str, reason: str):
        DFSSMError.__init__(self, f'Checkpoint mismatch on parameter {name!r} - {reason}')
        self.name = name
        self.reason = reason
