"""Exception types mapped to CLI exit codes (config=1, numerical=2, infeasible=3)."""


class ConfigError(Exception):
    """Malformed or inconsistent configuration input."""


class NumericalError(Exception):
    """A numerical routine failed to converge or hit a singularity."""


class InfeasibleError(Exception):
    """A solver target cannot be met; carries the offending spreading factor."""

    def __init__(self, message, sf=None):
        super().__init__(message)
        self.sf = sf


class StatisticsError(Exception):
    """Not enough simulated samples to form the requested estimate."""

    def __init__(self, message, ring=None):
        super().__init__(message)
        self.ring = ring
