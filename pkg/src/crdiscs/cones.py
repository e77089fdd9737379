"""Truncated open cones in R^k, shared by the rank and wedge machinery."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConeRegion:
    """Truncated open cone: points t with angle(t, axis) < half_angle, 0 < |t| < scale_max."""

    axis: np.ndarray
    half_angle: float
    scale_max: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ValueError("cone axis must be nonzero")
        object.__setattr__(self, "axis", axis / norm)
        if not 0.0 < self.half_angle < np.pi / 2:
            raise ValueError(f"half_angle must lie in (0, pi/2), got {self.half_angle}")
        if self.scale_max <= 0:
            raise ValueError("scale_max must be positive")

    @property
    def dim(self) -> int:
        return self.axis.shape[0]

    def angle_to_axis(self, t) -> float:
        t = np.asarray(t, dtype=float)
        norm = np.linalg.norm(t)
        if norm == 0:
            return np.pi
        c = float(np.clip(np.dot(t, self.axis) / norm, -1.0, 1.0))
        return float(np.arccos(c))

    def contains(self, t, angle_slack: float = 0.0) -> bool:
        t = np.asarray(t, dtype=float)
        norm = np.linalg.norm(t)
        if not 0.0 < norm < self.scale_max:
            return False
        return self.angle_to_axis(t) < self.half_angle + angle_slack

    def sample_rays(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Unit directions inside the cone, biased uniformly in tilt angle."""
        k = self.dim
        if k == 1:
            return np.tile(self.axis, (count, 1))
        rays = np.empty((count, k))
        for i in range(count):
            g = rng.standard_normal(k)
            g -= np.dot(g, self.axis) * self.axis
            gn = np.linalg.norm(g)
            theta = self.half_angle * rng.uniform(0.0, 0.999)
            if gn < 1e-14:
                rays[i] = self.axis
                continue
            rays[i] = np.cos(theta) * self.axis + np.sin(theta) * g / gn
        return rays

    def retract(self, t, margin: float = 0.95) -> np.ndarray:
        """Pull a vector back inside the cone (angle and norm clipping)."""
        t = np.asarray(t, dtype=float)
        norm = np.linalg.norm(t)
        if norm == 0:
            return margin * self.scale_max * 0.5 * self.axis
        angle = self.angle_to_axis(t)
        u = t / norm
        limit = margin * self.half_angle
        if angle > limit:
            # rotate toward the axis in the plane spanned by (axis, u)
            perp = u - np.dot(u, self.axis) * self.axis
            pn = np.linalg.norm(perp)
            if pn < 1e-14:
                u = self.axis
            else:
                u = np.cos(limit) * self.axis + np.sin(limit) * perp / pn
        norm = min(norm, margin * self.scale_max)
        return norm * u

    def with_scale(self, scale_max: float) -> "ConeRegion":
        return ConeRegion(self.axis.copy(), self.half_angle, scale_max)
