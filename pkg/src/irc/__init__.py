"""Rational-agent parameter recovery for firefly-navigation POMDP tasks.

Train one value function / policy over a whole box of internal-model
parameters, simulate agents from it, then recover an agent's parameters
from observable state-action trajectories by maximum likelihood with
Fisher-information confidence intervals.
"""

__version__ = "0.1.0"

from .kernels import active_backend

__all__ = ["active_backend", "__version__"]
