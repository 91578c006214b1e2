"""Exception types raised by the simulator."""


class SoftArmError(Exception):
    pass


class StraightSingularity(SoftArmError):
    """The arc parameters are undefined because all actuators have (nearly) equal length."""


class Unreachable(SoftArmError):
    pass


class IllConditioned(SoftArmError):
    pass


class Diverged(SoftArmError):
    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class ConfigError(SoftArmError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class IncompatibleScenarios(SoftArmError):
    pass
