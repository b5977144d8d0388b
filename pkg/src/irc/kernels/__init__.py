"""Hot numerical kernels with a compiled core and a pure-numpy fallback.

The per-step recursions that dominate runtime (world/belief rollouts and
trajectory log-likelihood accumulation with parameter gradients) exist in
two interchangeable implementations:

* ``irc.kernels._core``  -- Cython extension, built at install time,
* ``irc.kernels.pure``   -- straightforward numpy, always available.

Selection happens once at import.  Set ``IRC_BACKEND=pure`` or
``IRC_BACKEND=compiled`` to force a backend (``compiled`` raises if the
extension is missing); the default ``auto`` prefers the extension.  Both
backends draw no randomness themselves: callers pass pre-drawn noise, so
results agree across backends up to floating-point rounding.
"""

from __future__ import annotations

import os

from . import pure

_choice = os.environ.get("IRC_BACKEND", "auto").lower()
if _choice not in ("auto", "pure", "compiled"):
    raise RuntimeError(f"IRC_BACKEND must be auto|pure|compiled, got {_choice!r}")

_impl = pure
_backend_name = "pure"
if _choice in ("auto", "compiled"):
    try:
        from . import _core

        _impl = _core
        _backend_name = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise RuntimeError("IRC_BACKEND=compiled but the extension is not built")


def active_backend() -> str:
    """Name of the kernel implementation in use: 'compiled' or 'pure'."""
    return _backend_name


def get_backend(name: str = "active"):
    """Kernel module by name ('active', 'pure', or 'compiled')."""
    if name == "active":
        return _impl
    if name == "pure":
        return pure
    if name == "compiled":
        if _backend_name != "compiled":
            try:
                from . import _core

                return _core
            except ImportError as exc:
                raise RuntimeError("compiled kernels are not built") from exc
        return _impl
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    out = ["pure"]
    try:
        from . import _core  # noqa: F401

        out.append("compiled")
    except ImportError:
        pass
    return out


rollout_discrete = _impl.rollout_discrete
rollout_continuous = _impl.rollout_continuous
loglik_discrete = _impl.loglik_discrete
loglik_continuous = _impl.loglik_continuous
