"""Rotation-group helpers: hat map, Rodrigues exponential, polar projection.

Every function accepts either a single item or a leading batch axis and is
allocation-light enough to sit inside integrator stages.
"""

from __future__ import annotations

import numpy as np

_EYE3 = np.eye(3)


def hat(w):
    """Skew-symmetric matrix W of a 3-vector so that W @ v == np.cross(w, v).

    Accepts shape (3,) or (..., 3); returns (..., 3, 3).
    """
    w = np.asarray(w, dtype=float)
    W = np.zeros(w.shape + (3,), dtype=float)
    W[..., 0, 1] = -w[..., 2]
    W[..., 0, 2] = w[..., 1]
    W[..., 1, 0] = w[..., 2]
    W[..., 1, 2] = -w[..., 0]
    W[..., 2, 0] = -w[..., 1]
    W[..., 2, 1] = w[..., 0]
    return W


def exp_so3(phi):
    """Rodrigues formula for the rotation exp(hat(phi)).

    Uses a series expansion below 1e-8 rad so the coefficients stay smooth
    through zero angle.
    """
    phi = np.asarray(phi, dtype=float)
    theta2 = np.sum(phi * phi, axis=-1)
    theta = np.sqrt(theta2)
    small = theta < 1e-8
    safe_theta = np.where(small, 1.0, theta)
    safe_theta2 = np.where(small, 1.0, theta2)
    a = np.where(small, 1.0 - theta2 / 6.0, np.sin(theta) / safe_theta)
    b = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(theta)) / safe_theta2)
    W = hat(phi)
    out = W @ W
    out *= b[..., None, None]
    out += a[..., None, None] * W
    out += _EYE3
    return out


def cross3(a, b):
    """Cross product of (..., 3) arrays without np.cross dispatch overhead."""
    shape = a.shape if a.shape == b.shape else np.broadcast_shapes(a.shape, b.shape)
    out = np.empty(shape)
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    out[..., 0] = a1 * b2 - a2 * b1
    out[..., 1] = a2 * b0 - a0 * b2
    out[..., 2] = a0 * b1 - a1 * b0
    return out


def dexpinv(phi, omega):
    """Inverse right-trivialized tangent of exp_so3, truncated for RK4 use.

    The double-commutator truncation keeps fourth-order accuracy when phi is
    O(step size), which is how the integrator calls it.
    """
    c1 = cross3(phi, omega)
    return omega - 0.5 * c1 + (1.0 / 12.0) * cross3(phi, c1)


def project_so3(R):
    """Nearest rotation matrix in the Frobenius sense (polar projection)."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    det = np.linalg.det(U @ Vt)
    sign = np.where(np.asarray(det) < 0.0, -1.0, 1.0)
    U = U.copy()
    U[..., :, 2] = U[..., :, 2] * np.asarray(sign)[..., None]
    return U @ Vt


def orthonormality_defect(R):
    """Frobenius norm of Rᵀ R - I, batched over leading axes."""
    R = np.asarray(R, dtype=float)
    RtR = np.swapaxes(R, -1, -2) @ R
    return np.linalg.norm(RtR - _EYE3, axis=(-2, -1))
