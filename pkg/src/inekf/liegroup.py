"""
Matrix Lie group operations for SO(3) and SE_k(3).

An element of SE_k(3) is stored as a rotation matrix ``R`` together with a
``(3, k)`` array of translation-like columns. Column 0 is the velocity,
column 1 the position and columns 2.. are augmented contact points. The
embedding as a ``(3 + k) x (3 + k)`` matrix is::

    [ R  v  p  d_1 ... d_l ]
    [ 0        I_k         ]

Tangent vectors have length ``3 (k + 1)`` and are ordered
``(omega, v, p, d_1, ..., d_l)``. Every matrix built in this package
(adjoint, error dynamics, measurement Jacobians) follows that ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NearAngularSingularity, SlotMismatch

# Below this angle the trigonometric coefficients are evaluated by their Taylor
# series. The closed forms lose up to eps / theta**2 in absolute precision.
_SERIES_ANGLE = 0.1
_ORTHO_TOL = 1e-9
LOG_ANGLE_LIMIT = math.pi - 1e-6


def skew(v):
    """
    Skew-symmetric matrix of a 3-vector, such that ``skew(v) @ w == cross(v, w)``.

    Parameters
    ----------
    v : array-like, shape (3,)

    Returns
    -------
    numpy.ndarray, shape (3, 3)
    """
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee3(S):
    """Inverse of :func:`skew` (no skew-symmetry check)."""
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def _coefficients(theta):
    # (sin t / t, (1 - cos t) / t^2, (t - sin t) / t^3, (t^2 + 2 cos t - 2) / (2 t^4))
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        t4 = t2 * t2
        t6 = t4 * t2
        t8 = t4 * t4
        c1 = 1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0 + t8 / 362880.0
        c2 = 0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0 + t8 / 3628800.0
        c3 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0 + t8 / 39916800.0
        c4 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0 - t6 / 3628800.0 + t8 / 479001600.0
        return c1, c2, c3, c4
    s = math.sin(theta)
    c = math.cos(theta)
    t2 = theta * theta
    c1 = s / theta
    c2 = (1.0 - c) / t2
    c3 = (theta - s) / (t2 * theta)
    c4 = (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2)
    return c1, c2, c3, c4


def gammas(phi):
    """
    Evaluate the three SO(3) integration kernels at once.

    ``Gamma_m(phi) = sum_n skew(phi)^n / (n + m)!`` for ``m = 0, 1, 2``;
    ``Gamma_0`` is the exponential map, ``Gamma_1`` its integral over the unit
    interval (the left Jacobian) and ``Gamma_2`` the double integral.

    Parameters
    ----------
    phi : array-like, shape (3,)

    Returns
    -------
    tuple of numpy.ndarray
        ``(Gamma_0, Gamma_1, Gamma_2)``, each of shape (3, 3).
    """
    phi = np.asarray(phi, dtype=float)
    theta = math.sqrt(phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2])
    c1, c2, c3, c4 = _coefficients(theta)
    K = skew(phi)
    K2 = K @ K
    eye = np.eye(3)
    G0 = eye + c1 * K + c2 * K2
    G1 = eye + c2 * K + c3 * K2
    G2 = 0.5 * eye + c3 * K + c4 * K2
    return G0, G1, G2


def gamma(m, phi):
    """
    Single SO(3) integration kernel ``Gamma_m(phi)``, ``m`` in ``{0, 1, 2}``.

    See :func:`gammas`.
    """
    if m not in (0, 1, 2):
        raise ValueError(f"gamma order must be 0, 1 or 2, got {m!r}")
    return gammas(phi)[m]


def so3_exp(phi):
    """Rodrigues formula, ``Gamma_0``."""
    phi = np.asarray(phi, dtype=float)
    theta = float(np.linalg.norm(phi))
    c1, c2, _, _ = _coefficients(theta)
    K = skew(phi)
    return np.eye(3) + c1 * K + c2 * (K @ K)


def so3_log(R):
    """
    Logarithm of a rotation matrix as a rotation vector.

    Raises
    ------
    NearAngularSingularity
        If the rotation angle is within 1e-6 of pi.
    """
    w = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = float(np.linalg.norm(w))
    c = 0.5 * (R[0, 0] + R[1, 1] + R[2, 2] - 1.0)
    theta = math.atan2(s, c)
    if theta >= LOG_ANGLE_LIMIT:
        raise NearAngularSingularity(
            f"rotation angle {theta:.9f} rad is too close to pi for the logarithm"
        )
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        # theta / sin(theta)
        scale = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0 + 31.0 * t2**3 / 15120.0
    else:
        scale = theta / s
    return scale * w


def gamma1_inverse(phi):
    """Closed-form inverse of ``Gamma_1(phi)`` (inverse left Jacobian)."""
    phi = np.asarray(phi, dtype=float)
    theta = float(np.linalg.norm(phi))
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2**3 / 1209600.0
    else:
        c = 1.0 / (theta * theta) - (1.0 + math.cos(theta)) / (
            2.0 * theta * math.sin(theta)
        )
    K = skew(phi)
    return np.eye(3) - 0.5 * K + c * (K @ K)


def frozen(a):
    """Read-only float array; already read-only float arrays are shared, others copied."""
    if isinstance(a, np.ndarray) and a.dtype == np.float64 and not a.flags.writeable:
        return a
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def freeze(a):
    """Mark a freshly computed array read-only in place and return it."""
    a.flags.writeable = False
    return a


def _reorthonormalize(R):
    E = R.T @ R
    E[0, 0] -= 1.0
    E[1, 1] -= 1.0
    E[2, 2] -= 1.0
    if np.sqrt(np.sum(E * E)) <= _ORTHO_TOL:
        return R
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0.0:
        U[:, -1] *= -1.0
        Q = U @ Vt
    return Q


@dataclass(frozen=True, eq=False)
class SEK3:
    """
    Element of SE_k(3).

    Parameters
    ----------
    R : numpy.ndarray, shape (3, 3)
        Rotation taking body-frame vectors to the world frame.
    cols : numpy.ndarray, shape (3, k)
        Translation-like columns ``[v, p, d_1, ..., d_l]`` with ``k >= 2``.

    Instances are treated as immutable; the arrays are made read-only.
    """

    R: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        R = frozen(self.R)
        cols = frozen(self.cols)
        if R.shape != (3, 3):
            raise DimensionMismatch(f"rotation must be 3x3, got {R.shape}")
        if cols.ndim != 2 or cols.shape[0] != 3 or cols.shape[1] < 2:
            raise DimensionMismatch(f"columns must be 3 x k with k >= 2, got {cols.shape}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def identity(cls, k=2):
        return cls(np.eye(3), np.zeros((3, k)))

    @classmethod
    def from_parts(cls, R, v, p, contacts=()):
        cols = [np.asarray(v, dtype=float), np.asarray(p, dtype=float)]
        cols.extend(np.asarray(d, dtype=float) for d in contacts)
        return cls(R, np.column_stack(cols))

    @classmethod
    def from_matrix(cls, M):
        M = np.asarray(M, dtype=float)
        return cls(M[:3, :3], M[:3, 3:])

    @property
    def k(self):
        return self.cols.shape[1]

    @property
    def dim(self):
        """Tangent-space dimension ``3 (k + 1)``."""
        return 3 * (self.k + 1)

    @property
    def v(self):
        return self.cols[:, 0]

    @property
    def p(self):
        return self.cols[:, 1]

    @property
    def contacts(self):
        return self.cols[:, 2:]

    def matrix(self):
        """Embedding as a ``(3 + k) x (3 + k)`` homogeneous matrix."""
        k = self.k
        M = np.eye(3 + k)
        M[:3, :3] = self.R
        M[:3, 3:] = self.cols
        return M

    def __matmul__(self, other):
        if isinstance(other, SEK3):
            return compose(self, other)
        return NotImplemented

    def __repr__(self):
        return f"SEK3(k={self.k}, R={self.R.tolist()}, cols={self.cols.tolist()})"


def hat(xi):
    """Lie algebra matrix of a tangent vector of length ``3 (k + 1)``."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or xi.size % 3 or xi.size < 9:
        raise DimensionMismatch(f"tangent length must be 3(k+1) with k >= 2, got {xi.size}")
    k = xi.size // 3 - 1
    M = np.zeros((3 + k, 3 + k))
    M[:3, :3] = skew(xi[:3])
    M[:3, 3:] = xi[3:].reshape(k, 3).T
    return M


def vee(M):
    """Inverse of :func:`hat`."""
    M = np.asarray(M, dtype=float)
    k = M.shape[0] - 3
    return np.concatenate([vee3(M[:3, :3]), M[:3, 3:].T.reshape(3 * k)])


def exp_sek3(xi):
    """
    Exponential map of SE_k(3).

    The rotation is ``Gamma_0(omega)`` and every translational block is
    ``Gamma_1(omega) @ xi_block``.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or xi.size % 3 or xi.size < 9:
        raise DimensionMismatch(f"tangent length must be 3(k+1) with k >= 2, got {xi.size}")
    k = xi.size // 3 - 1
    G0, G1, _ = gammas(xi[:3])
    return SEK3(G0, G1 @ xi[3:].reshape(k, 3).T)


def log_sek3(X):
    """
    Logarithm of SE_k(3), inverse of :func:`exp_sek3`.

    Raises
    ------
    NearAngularSingularity
        If the rotation angle is within 1e-6 of pi.
    """
    phi = so3_log(X.R)
    J_inv = gamma1_inverse(phi)
    return np.concatenate([phi, (J_inv @ X.cols).T.reshape(-1)])


def compose(X, Y):
    """Group product ``X Y``; the rotation is re-projected onto SO(3) if it drifts."""
    if X.k != Y.k:
        raise SlotMismatch(f"cannot compose SE_{X.k}(3) with SE_{Y.k}(3)")
    R = _reorthonormalize(X.R @ Y.R)
    return SEK3(R, X.R @ Y.cols + X.cols)


def inverse(X):
    """Group inverse ``X^-1``."""
    Rt = X.R.T
    return SEK3(Rt, -(Rt @ X.cols))


def adjoint(X):
    """
    Adjoint matrix of ``X`` acting on tangent vectors.

    ``adjoint(X) @ xi == vee(X.matrix() @ hat(xi) @ inverse(X).matrix())``.
    The block layout is ``R`` on the diagonal and ``skew(col) @ R`` in the
    first block column.
    """
    k = X.k
    n = 3 * (k + 1)
    R = X.R
    Ad = np.zeros((n, n))
    for i in range(k + 1):
        Ad[3 * i:3 * i + 3, 3 * i:3 * i + 3] = R
    for j in range(k):
        Ad[3 * (j + 1):3 * (j + 2), 0:3] = skew(X.cols[:, j]) @ R
    return Ad


def random_sek3(rng, k=2, angle_max=math.pi * 0.9, scale=1.0):
    """Draw a random element; handy for tests and demos."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    R = so3_exp(axis * rng.uniform(0.0, angle_max))
    return SEK3(R, scale * rng.normal(size=(3, k)))
