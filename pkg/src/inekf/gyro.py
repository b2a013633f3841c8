"""
Linear Kalman filter fusing two angular-velocity sources.

The state is ``x = [omega, b]``. Propagation adds the change of the primary
source between consecutive samples (its bias cancels); corrections use a
second source through ``H = [I I]`` when that reading carries the bias ``b``
or ``H = [I 0]`` when it does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonMonotonicStamp
from .filter import floor_covariance, joseph_update, kalman_gain

DEFAULT_OMEGA_Q = 1e-5
DEFAULT_BIAS_Q = 1e-6

_H_BIASED = np.hstack([np.eye(3), np.eye(3)])
_H_UNBIASED = np.hstack([np.eye(3), np.zeros((3, 3))])


def default_process_noise(omega_q=DEFAULT_OMEGA_Q, bias_q=DEFAULT_BIAS_Q):
    """Per-step process noise ``diag(omega_q I, bias_q I)``."""
    return np.diag([omega_q] * 3 + [bias_q] * 3)


@dataclass(frozen=True, eq=False)
class GyroFilterState:
    omega: np.ndarray
    bias: np.ndarray
    P: np.ndarray
    last_alpha: np.ndarray
    stamp: float

    @classmethod
    def initial(cls, alpha, stamp, omega_var=1e-2, bias_var=1e-2, omega=None):
        """Start from the first primary reading (used as the rate estimate unless given)."""
        alpha = np.asarray(alpha, dtype=float)
        omega = alpha.copy() if omega is None else np.asarray(omega, dtype=float)
        P = np.diag([omega_var] * 3 + [bias_var] * 3)
        return cls(omega, np.zeros(3), P, alpha.copy(), stamp)


def gf_propagate(s, alpha, stamp, Q):
    """Shift ``omega`` by the change in the primary reading; ``P += Q``."""
    if not stamp > s.stamp:
        raise NonMonotonicStamp(f"stamp {stamp} does not follow {s.stamp}")
    alpha = np.asarray(alpha, dtype=float)
    return replace(
        s,
        omega=s.omega + (alpha - s.last_alpha),
        P=s.P + Q,
        last_alpha=alpha,
        stamp=stamp,
    )


def gf_correct(s, beta, biased, R, axes=None):
    """
    Standard Kalman correction with a secondary reading ``beta``.

    ``axes`` optionally restricts the correction to a subset of axes (boolean
    mask or index list); ``beta`` and ``R`` are then indexed accordingly.

    Raises
    ------
    SingularInnovation
        If the innovation covariance is singular.
    """
    H = _H_BIASED if biased else _H_UNBIASED
    x = np.concatenate([s.omega, s.bias])
    beta = np.asarray(beta, dtype=float)
    R = np.asarray(R, dtype=float)
    if axes is not None:
        idx = np.arange(3)[np.asarray(axes)]
        H = H[idx]
        if beta.size == 3:
            beta = beta[idx]
        if R.shape == (3, 3):
            R = R[np.ix_(idx, idx)]
    L = kalman_gain(s.P, H, R)
    x = x + L @ (beta - H @ x)
    P = floor_covariance(joseph_update(s.P, L, H, R))
    return replace(s, omega=x[:3], bias=x[3:], P=P)


def matched_process_noise(alpha_sigma, bias_q=1e-10):
    """
    Per-step process noise matched to a white-noise primary source.

    Differencing consecutive readings of standard deviation ``alpha_sigma``
    injects ``2 alpha_sigma**2`` into the rate state each step; ``bias_q`` is
    the per-step bias drift variance.
    """
    return default_process_noise(2.0 * alpha_sigma ** 2 + 1e-12, bias_q)
