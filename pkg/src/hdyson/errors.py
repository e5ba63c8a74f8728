"""Exception hierarchy shared by every hdyson module.

The command-line front end maps these onto process exit codes
(input error -> 2, resource cap -> 3, convergence failure -> 4).
"""


class InputError(ValueError):
    """Invalid argument: out-of-range index, bad shape, inconsistent mode."""


class SingularLimitError(InputError):
    """A sigma = 0 value hit a formula that diverges there.

    The sigma = 0 dynamics is well defined; use the dedicated closed forms
    (`analytic.sigma_zero`, `analytic.sigma_zero_probability`) instead.
    """


class ResourceLimitError(RuntimeError):
    """Requested system size exceeds a dense/sparse safety cap."""


class ConvergenceError(RuntimeError):
    """Adaptive time stepping failed to reach its local error target."""
