"""Cylindrical/Cartesian conversions."""

from __future__ import annotations

import numpy as np


def basis(theta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit vectors (e_r, e_theta, e_z) at azimuth ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([c, s, 0.0]), np.array([-s, c, 0.0]), np.array([0.0, 0.0, 1.0])


def to_cartesian(r: float, theta: float, z: float) -> np.ndarray:
    return np.array([r * np.cos(theta), r * np.sin(theta), z])


def to_cylindrical(x: np.ndarray) -> tuple[float, float, float]:
    return float(np.hypot(x[0], x[1])), float(np.arctan2(x[1], x[0])), float(x[2])


def vector_to_cartesian(components, theta: float) -> np.ndarray:
    e_r, e_t, e_z = basis(theta)
    return components[0] * e_r + components[1] * e_t + components[2] * e_z
