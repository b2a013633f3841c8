"""
Right-invariant observation builders and contact-slot bookkeeping.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .errors import AlreadyAugmented, NotAugmented
from .filter import Frame, LinearObservation, switch_frame
from .liegroup import SEK3
from .measurements import VelocityMeasurement
from .propagation import GRAVITY, _base_A, discretize

DEFAULT_FORWARD_SIGMA = 0.05
DEFAULT_LATERAL_SIGMA = 0.05
DEFAULT_VERTICAL_SIGMA = 0.05


def wheel_pseudo_velocity(w, lateral_sigma=DEFAULT_LATERAL_SIGMA,
                          vertical_sigma=DEFAULT_VERTICAL_SIGMA,
                          forward_sigma=DEFAULT_FORWARD_SIGMA):
    """
    Body velocity of a differential-drive base under the nonholonomic constraint.

    The forward speed is the mean wheel rim speed; lateral and vertical
    velocities are pseudo-measured as zero.

    Parameters
    ----------
    w : WheelRates
    lateral_sigma, vertical_sigma, forward_sigma : float
        Standard deviations (m/s) placed on the diagonal of the covariance.

    Returns
    -------
    VelocityMeasurement
    """
    forward = w.wheel_radius * (w.qdot_r + w.qdot_l) / 2.0
    cov = np.diag([forward_sigma ** 2, lateral_sigma ** 2, vertical_sigma ** 2])
    return VelocityMeasurement(w.stamp, np.array([forward, 0.0, 0.0]), cov)


def _selector(n, blocks):
    H = np.zeros((3, n))
    for col, sign in blocks:
        H[0, col] = sign
        H[1, col + 1] = sign
        H[2, col + 2] = sign
    return H


def velocity_observation(s, m):
    """
    Right-invariant observation of a body-frame velocity.

    ``b = (0, -1, 0, ...)``, ``Y = (v_body, -1, 0, ...)``, ``H`` selects the
    velocity block and ``N = R cov R^T``.
    """
    k = s.X.k
    b = np.zeros(3 + k)
    b[3] = -1.0
    Y = b.copy()
    Y[:3] = m.v_body
    H = _selector(s.dim, [(3, 1.0)])
    R = s.X.R
    return LinearObservation(b, Y, H, R @ m.cov @ R.T, Frame.RIGHT)


def contact_observation(s, kin):
    """
    Right-invariant observation of a stance foot through leg kinematics.

    ``b = (0, 0, 1, ..., -1, ...)`` with ``-1`` on the leg's contact column,
    ``H = [0 0 -I ... I ...]`` and ``N = R J Cov J^T R^T``.

    Raises
    ------
    NotAugmented
        If the leg has no contact slot.
    """
    blk = s.slot_column(kin.leg_id)
    if blk is None:
        raise NotAugmented(f"leg {kin.leg_id} has no contact slot")
    k = s.X.k
    b = np.zeros(3 + k)
    b[4] = 1.0
    b[3 + blk - 1] = -1.0
    Y = b.copy()
    Y[:3] = kin.foot_pos_body
    H = _selector(s.dim, [(6, -1.0), (3 * blk, 1.0)])
    R = s.X.R
    N = R @ kin.foot_cov_body() @ R.T
    return LinearObservation(b, Y, H, N, Frame.RIGHT)


def _in_right_frame(fn):
    def wrapper(s, *args, **kwargs):
        original = s.error_frame
        if original is Frame.RIGHT:
            return fn(s, *args, **kwargs)
        out = fn(switch_frame(s, Frame.RIGHT), *args, **kwargs)
        return switch_frame(out, original)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_in_right_frame
def contact_augment(s, kin):
    """
    Append the stance foot of ``kin.leg_id`` to the state.

    The new column is ``d = p + R h_p``. The covariance grows by
    ``F P F^T + G Cov G^T`` where ``F`` duplicates the position block and
    ``G = R J`` feeds the encoder noise into the new block. Bias rows stay last.

    Raises
    ------
    AlreadyAugmented
        If the leg already owns a slot.
    """
    if kin.leg_id in s.slots:
        raise AlreadyAugmented(f"leg {kin.leg_id} already has a contact slot")
    X = s.X
    d = X.p + X.R @ kin.foot_pos_body
    m = X.dim
    n = s.dim
    # old index -> new index; the new block (m..m+2) copies position rows 6..8
    idx = np.concatenate([np.arange(m), np.arange(6, 9), np.arange(m, n)])
    P = s.P[np.ix_(idx, idx)].copy()
    G = X.R @ kin.jacobian
    P[m:m + 3, m:m + 3] += G @ kin.encoder_cov @ G.T
    X_new = SEK3(X.R, np.column_stack([X.cols, d]))
    return replace(s, X=X_new, P=P, slots=s.slots + (kin.leg_id,))


@_in_right_frame
def contact_marginalize(s, leg_id):
    """
    Drop a leg's contact column and the matching covariance rows and columns.

    Raises
    ------
    NotAugmented
        If the leg has no contact slot.
    """
    blk = s.slot_column(leg_id)
    if blk is None:
        raise NotAugmented(f"leg {leg_id} has no contact slot")
    keep = np.r_[0:3 * blk, 3 * blk + 3:s.dim]
    P = s.P[np.ix_(keep, keep)]
    cols = np.delete(s.X.cols, blk - 1, axis=1)
    slots = tuple(leg for leg in s.slots if leg != leg_id)
    return replace(s, X=SEK3(s.X.R, cols), P=P, slots=slots)


def observability_matrix(dt, n_steps, gravity=GRAVITY):
    """
    Stacked ``[H; H Phi; H Phi^2; ...]`` of the bias-free velocity-correction model.

    ``n_steps`` is the number of stacked blocks. Yaw and the three position
    directions lie in the null space, leaving rank 5.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    A = _base_A(9, 2, np.asarray(gravity, dtype=float))
    Phi = discretize(A, dt)
    H = _selector(9, [(3, 1.0)])
    rows = []
    M = H
    for _ in range(n_steps):
        rows.append(M)
        M = M @ Phi
    return np.vstack(rows)
