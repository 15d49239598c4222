"""Procedural shapes described by signed distance fields."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Tuple, Type

import numpy as np


def fill_coverage(sdf: np.ndarray) -> np.ndarray:
    """Anti-aliased area coverage of a pixel, 0.5 on the boundary."""
    return np.clip(0.5 - sdf, 0.0, 1.0)


def contour_coverage(sdf: np.ndarray, width: float = 1.0) -> np.ndarray:
    """Anti-aliased coverage of a stroke of ``width`` pixels centred on the boundary."""
    return np.clip(0.5 * width + 0.5 - np.abs(sdf), 0.0, 1.0)


def _rotate(x: np.ndarray, y: np.ndarray, angle: float) -> Tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(angle), np.sin(angle)
    return c * x + s * y, -s * x + c * y


class Shape(ABC):
    """Base class of the shapes drawn into synthetic pairs."""

    @classmethod
    @abstractmethod
    def random(cls: Type["Shape"], rng: np.random.Generator, size: int) -> "Shape":
        """Draw shape parameters for an image of ``size`` x ``size`` pixels."""

    @abstractmethod
    def signed_distance(self: "Shape", x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Distance in pixels to the boundary, negative inside."""


@dataclass
class Ellipse(Shape):
    cx: float
    cy: float
    a: float
    b: float
    angle: float

    @classmethod
    def random(cls: Type["Ellipse"], rng: np.random.Generator, size: int) -> "Ellipse":
        cx, cy = rng.uniform(0.2, 0.8, size=2) * size
        a, b = rng.uniform(0.12, 0.3, size=2) * size
        return cls(cx, cy, a, b, rng.uniform(0.0, np.pi))

    def signed_distance(self: "Ellipse", x: np.ndarray, y: np.ndarray) -> np.ndarray:
        u, v = _rotate(x - self.cx, y - self.cy, self.angle)
        # first-order approximation, exact on circles
        return (np.hypot(u / self.a, v / self.b) - 1.0) * min(self.a, self.b)


@dataclass
class Rectangle(Shape):
    cx: float
    cy: float
    half_width: float
    half_height: float
    angle: float

    @classmethod
    def random(cls: Type["Rectangle"], rng: np.random.Generator, size: int) -> "Rectangle":
        cx, cy = rng.uniform(0.2, 0.8, size=2) * size
        hw, hh = rng.uniform(0.1, 0.25, size=2) * size
        return cls(cx, cy, hw, hh, rng.uniform(0.0, 0.5 * np.pi))

    def signed_distance(self: "Rectangle", x: np.ndarray, y: np.ndarray) -> np.ndarray:
        u, v = _rotate(x - self.cx, y - self.cy, self.angle)
        qx = np.abs(u) - self.half_width
        qy = np.abs(v) - self.half_height
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        return outside + np.minimum(np.maximum(qx, qy), 0.0)


@dataclass
class Line(Shape):
    x0: float
    y0: float
    x1: float
    y1: float
    thickness: float

    @classmethod
    def random(cls: Type["Line"], rng: np.random.Generator, size: int) -> "Line":
        cx, cy = rng.uniform(0.25, 0.75, size=2) * size
        length = rng.uniform(0.4, 0.8) * size
        angle = rng.uniform(0.0, np.pi)
        dx, dy = 0.5 * length * np.cos(angle), 0.5 * length * np.sin(angle)
        thickness = rng.uniform(1.5, 3.0) * max(size / 64.0, 1.0)
        return cls(cx - dx, cy - dy, cx + dx, cy + dy, thickness)

    def signed_distance(self: "Line", x: np.ndarray, y: np.ndarray) -> np.ndarray:
        ex, ey = self.x1 - self.x0, self.y1 - self.y0
        px, py = x - self.x0, y - self.y0
        t = np.clip((px * ex + py * ey) / (ex * ex + ey * ey), 0.0, 1.0)
        return np.hypot(px - t * ex, py - t * ey) - 0.5 * self.thickness


class ShapeFactory:
    """Draws random shapes by kind.

    Attributes
    ----------
    builders : dict(str, type)
        Maps shape kinds to Shape subclasses.
    """

    builders: Dict[str, Type[Shape]] = {
        "ellipse": Ellipse,
        "rectangle": Rectangle,
        "line": Line,
    }

    def get_builder(self: "ShapeFactory", kind: str) -> Type[Shape]:
        if kind not in self.builders:
            raise KeyError(
                f"Shape kind '{kind}' is not implemented, try one of {tuple(self.builders)}"
            )
        return self.builders[kind]

    def create(self: "ShapeFactory", kind: str, rng: np.random.Generator, size: int) -> Shape:
        return self.get_builder(kind).random(rng, size)

    def create_random(self: "ShapeFactory", rng: np.random.Generator, size: int) -> Shape:
        kinds = tuple(self.builders)
        return self.create(kinds[rng.integers(len(kinds))], rng, size)
