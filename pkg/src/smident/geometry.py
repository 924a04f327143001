"""Minimal SO(3) kernel: skew operator, exp/log maps, quaternion conversion.

Conventions: Hamilton quaternions, scalar first (w, x, y, z).  Tangent
vectors are axis-angle 3-vectors in radians; the canonical representative
satisfies ||w|| <= pi.  Batched helpers (suffix ``_many``) operate on the
leading axis and are used by the simulation and optimization hot paths.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidRotation, NonUnitQuaternion

# Small-angle switch points: below these the closed forms lose digits and
# the series expansions are exact to < 1e-12 relative error.
_EXP_SMALL = 1e-8
_LOG_SMALL = 1e-7
_LOG_NEAR_PI = np.pi - 1e-6

_ORTHO_TOL = 1e-6
_QUAT_TOL = 1e-3


def skew(v) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == cross(v, u)."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def exp_so3(omega) -> np.ndarray:
    """Rodrigues map from an axis-angle 3-vector to a rotation matrix."""
    omega = np.asarray(omega, dtype=float)
    theta2 = float(omega @ omega)
    w = skew(omega)
    if theta2 < _EXP_SMALL * _EXP_SMALL:
        # second-order series in omega
        return np.eye(3) + w + 0.5 * (w @ w)
    theta = np.sqrt(theta2)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta2
    return np.eye(3) + a * w + b * (w @ w)


def _check_rotation(r: np.ndarray) -> None:
    if r.shape != (3, 3):
        raise InvalidRotation(f"expected 3x3 matrix, got {r.shape}")
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > _ORTHO_TOL:
        raise InvalidRotation(f"R^T R deviates from identity by {err:.3e}")
    if abs(np.linalg.det(r) - 1.0) > _ORTHO_TOL:
        raise InvalidRotation(f"det(R) = {np.linalg.det(r):.6f}")


def log_so3(r) -> np.ndarray:
    """Canonical logarithm of a rotation matrix, ||result|| in [0, pi].

    The angle-pi branch picks the axis from the largest diagonal entry of
    (R + I)/2 and fixes its sign so the leading nonzero component is
    positive, which makes results reproducible at the boundary.
    """
    r = np.asarray(r, dtype=float)
    _check_rotation(r)
    cos_angle = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    angle = float(np.arccos(cos_angle))
    vee = 0.5 * np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    if angle < _LOG_SMALL:
        # log(R) ~ vee * (1 + theta^2/6 + 7 theta^4/360)
        return vee * (1.0 + angle * angle / 6.0 + 7.0 * angle**4 / 360.0)
    if angle > _LOG_NEAR_PI:
        s = 0.5 * (r + np.eye(3))  # == axis axis^T at angle pi
        k = int(np.argmax(np.diag(s)))
        axis = s[:, k] / np.sqrt(s[k, k])
        for c in axis:
            if abs(c) > 1e-9:
                if c < 0.0:
                    axis = -axis
                break
        axis = axis / np.linalg.norm(axis)
        return angle * axis
    return (angle / np.sin(angle)) * vee


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix of a Hamilton (w, x, y, z) unit quaternion."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if abs(n - 1.0) > _QUAT_TOL:
        raise NonUnitQuaternion(f"quaternion norm {n:.6f} outside tolerance")
    w, x, y, z = q / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(r) -> np.ndarray:
    """Unit quaternion (w >= 0) of a rotation matrix, Shepperd's method."""
    r = np.asarray(r, dtype=float)
    t = np.trace(r)
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (r[2, 1] - r[1, 2]) / s,
                      (r[0, 2] - r[2, 0]) / s,
                      (r[1, 0] - r[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(r[i, i] - r[j, j] - r[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def geodesic_error(omega_a, omega_b) -> float:
    """Geodesic angle between two rotations given in tangent space.

    ||log(exp(a) exp(b)^T)||, always in [0, pi].
    """
    rel = exp_so3(omega_a) @ exp_so3(omega_b).T
    return float(np.linalg.norm(log_so3(rel)))


# ---------------------------------------------------------------------------
# Batched helpers.


def skew_many(v: np.ndarray) -> np.ndarray:
    """(n, 3) -> (n, 3, 3) stack of cross-product matrices."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def exp_so3_many(omega: np.ndarray) -> np.ndarray:
    """(n, 3) tangent vectors -> (n, 3, 3) rotation matrices."""
    omega = np.asarray(omega, dtype=float)
    theta2 = np.einsum("ni,ni->n", omega, omega)
    theta = np.sqrt(theta2)
    small = theta < _EXP_SMALL
    safe2 = np.where(small, 1.0, theta2)
    a = np.where(small, 1.0 - theta2 / 6.0, np.sin(theta) / np.sqrt(safe2))
    b = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(theta)) / safe2)
    w = skew_many(omega)
    w2 = w @ w
    return np.eye(3) + a[:, None, None] * w + b[:, None, None] * w2


def log_so3_many(r: np.ndarray) -> np.ndarray:
    """(n, 3, 3) rotation matrices -> (n, 3) canonical tangent vectors.

    Rows with angle near pi fall back to the scalar branch; they are rare
    in the hot paths and need the deterministic axis selection anyway.
    """
    r = np.asarray(r, dtype=float)
    tr = np.einsum("nii->n", r)
    cos_angle = np.clip((tr - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(cos_angle)
    vee = 0.5 * np.stack([
        r[:, 2, 1] - r[:, 1, 2],
        r[:, 0, 2] - r[:, 2, 0],
        r[:, 1, 0] - r[:, 0, 1],
    ], axis=1)
    small = angle < _LOG_SMALL
    big = angle > _LOG_NEAR_PI
    generic = ~(small | big)
    scale = np.ones_like(angle)
    scale[generic] = angle[generic] / np.sin(angle[generic])
    scale[small] = 1.0 + angle[small] ** 2 / 6.0 + 7.0 * angle[small] ** 4 / 360.0
    out = vee * scale[:, None]
    if np.any(big):
        for i in np.flatnonzero(big):
            out[i] = log_so3(r[i])
    return out


def quat_to_matrix_many(q: np.ndarray) -> np.ndarray:
    """(n, 4) scalar-first quaternions -> (n, 3, 3); rows are renormalized."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=1)
    if np.any(n < 1e-12):
        raise NonUnitQuaternion("zero-norm quaternion in series")
    w, x, y, z = (q / n[:, None]).T
    out = np.empty((q.shape[0], 3, 3))
    out[:, 0, 0] = 1 - 2 * (y * y + z * z)
    out[:, 0, 1] = 2 * (x * y - w * z)
    out[:, 0, 2] = 2 * (x * z + w * y)
    out[:, 1, 0] = 2 * (x * y + w * z)
    out[:, 1, 1] = 1 - 2 * (x * x + z * z)
    out[:, 1, 2] = 2 * (y * z - w * x)
    out[:, 2, 0] = 2 * (x * z - w * y)
    out[:, 2, 1] = 2 * (y * z + w * x)
    out[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def matrix_to_quat_many(r: np.ndarray) -> np.ndarray:
    """(n, 3, 3) -> (n, 4) scalar-first unit quaternions with w >= 0."""
    r = np.asarray(r, dtype=float)
    return np.stack([matrix_to_quat(ri) for ri in r])


def quat_to_rotvec_many(q: np.ndarray) -> np.ndarray:
    """(n, 4) quaternions -> (n, 3) canonical tangent vectors, ||w|| <= pi.

    Rows are renormalized first; a quaternion's scale carries no rotation
    information, so near-unit sensor streams are accepted as-is.
    """
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=1)
    if np.any(n < 1e-12):
        raise NonUnitQuaternion("zero-norm quaternion in series")
    q = q / n[:, None]
    q = np.where(q[:, :1] < 0.0, -q, q)  # shortest-arc representative
    vnorm = np.linalg.norm(q[:, 1:], axis=1)
    angle = 2.0 * np.arctan2(vnorm, q[:, 0])
    small = vnorm < 1e-12
    scale = np.where(small, 2.0, angle / np.where(small, 1.0, vnorm))
    return q[:, 1:] * scale[:, None]
