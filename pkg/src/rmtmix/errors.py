"""Exception types shared across the package."""


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


class DiagonalizationError(Exception):
    """Eigensolver failed to converge on a Hermitian input."""


class UnfoldingError(Exception):
    """Spectral unfolding could not produce a usable staircase fit."""


class RankDeficiencyError(Exception):
    """Normal matrix of a least-squares fit is singular."""


class ResourceLimitError(Exception):
    """Estimated cost of a run exceeds the configured budget."""
