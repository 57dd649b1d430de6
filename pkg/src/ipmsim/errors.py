"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when inputs violate an operation's domain (bad parameter,
    out-of-range state, unavailable analytic form, ...)."""


class ConfigError(ValueError):
    """Raised for malformed or inconsistent scenario configuration."""


class IntegrationError(RuntimeError):
    """Raised when the hybrid integrator cannot continue.

    Carries the time at which integration failed.
    """

    def __init__(self, message: str, t_fail: float):
        super().__init__(f"{message} (t = {t_fail:.6g})")
        self.t_fail = t_fail
