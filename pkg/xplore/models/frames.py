"""
Модели кадров записи: манифест, плоскость яркости, последовательность кадров.

LumaPlane и FrameSequence несут numpy-массивы и поэтому являются
замороженными dataclass-ами (LumaPlane сравнивается по пикселям);
FrameManifest - pydantic-модель, описывающая manifest.json.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class FrameManifest(BaseModel):
    """Манифест записи: fps, размеры и упорядоченный список кадров."""

    model_config = ConfigDict(frozen=True)

    source_id: str = Field(min_length=1)
    fps: float = Field(gt=0)
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    frame_paths: Tuple[Path, ...] = Field(min_length=1)

    @property
    def frame_count(self) -> int:
        return len(self.frame_paths)

    @property
    def duration_seconds(self) -> float:
        return self.frame_count / self.fps

    def to_document(self, root: Path) -> dict:
        """Документ manifest.json с путями относительно root (прямые слэши)."""
        frames = []
        for frame_path in self.frame_paths:
            try:
                rel = Path(frame_path).relative_to(root)
            except ValueError:
                rel = Path(frame_path)
            frames.append(rel.as_posix())
        return {
            "source_id": self.source_id,
            "fps": self.fps,
            "width": self.width,
            "height": self.height,
            "frames": frames,
        }


@dataclass(frozen=True, eq=False)
class LumaPlane:
    """
    Плоскость яркости Y (BT.601) одного кадра.

    samples - массив uint8 формы (height, width), построчно.
    """

    width: int
    height: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.samples.dtype != np.uint8:
            raise ValueError(f"samples must be uint8, got {self.samples.dtype}")
        if self.samples.shape != (self.height, self.width):
            raise ValueError(
                f"samples shape {self.samples.shape} != ({self.height}, {self.width})"
            )
        self.samples.setflags(write=False)

    @classmethod
    def from_array(cls, samples: np.ndarray) -> "LumaPlane":
        samples = np.ascontiguousarray(samples, dtype=np.uint8)
        height, width = samples.shape
        return cls(width=width, height=height, samples=samples)

    @property
    def size(self) -> Tuple[int, int]:
        return self.width, self.height

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LumaPlane):
            return NotImplemented
        return self.size == other.size and bool(np.array_equal(self.samples, other.samples))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """Упорядоченная последовательность плоскостей яркости с манифестом."""

    manifest: FrameManifest
    lumas: List[LumaPlane] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.lumas) != self.manifest.frame_count:
            raise ValueError(
                f"{len(self.lumas)} planes for {self.manifest.frame_count} manifest frames"
            )
        for plane in self.lumas:
            if plane.size != (self.manifest.width, self.manifest.height):
                raise ValueError(f"plane {plane.size} differs from manifest dimensions")

    @property
    def frame_count(self) -> int:
        return len(self.lumas)

    def stack(self) -> np.ndarray:
        """Стек (n, height, width) uint8."""
        return np.stack([plane.samples for plane in self.lumas])
