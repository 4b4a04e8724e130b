"""
Сервис загрузки записи: манифест, декодирование кадров, перевод в яркость.

Кадры - PNG или бинарный PGM (P5), декодируются через Pillow и переводятся
в плоскость Y по BT.601. Декодирование параллелится по потокам, порядок
кадров всегда совпадает с порядком манифеста.
"""
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError
from pydantic import ValidationError

from xplore.config import settings
from xplore.exceptions import DimensionMismatch, EmptyFrame, MalformedManifest, MissingFile
from xplore.models.frames import FrameManifest, FrameSequence, LumaPlane
from xplore.utils.helpers import hash_file, sha256_hex, write_json
from xplore.utils.logger import get_logger

logger = get_logger("ingest_service")

# BT.601, полный диапазон
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


# ============================================================================
# МАНИФЕСТ
# ============================================================================

def load_manifest(path: Path, check_frames: bool = True) -> FrameManifest:
    """
    Загрузить и проверить manifest.json.

    Пути кадров разрешаются относительно каталога манифеста. При
    check_frames=True каждый кадр должен существовать и иметь
    заявленный размер (читается только заголовок изображения).

    Raises:
        MissingFile: манифест или кадр не найден
        MalformedManifest: документ не читается или поля некорректны
        DimensionMismatch: размер кадра не совпадает с заявленным
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(path)

    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedManifest(path, f"не JSON: {e}")

    if not isinstance(document, dict):
        raise MalformedManifest(path, "ожидался объект")
    frames = document.get("frames")
    if not isinstance(frames, list) or not all(isinstance(f, str) for f in frames):
        raise MalformedManifest(path, "поле frames должно быть списком строк")

    base = path.parent
    try:
        manifest = FrameManifest(
            source_id=document.get("source_id"),
            fps=document.get("fps"),
            width=document.get("width"),
            height=document.get("height"),
            frame_paths=tuple(base / Path(rel) for rel in frames),
        )
    except ValidationError as e:
        errors = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise MalformedManifest(path, errors)

    if check_frames:
        expected = (manifest.width, manifest.height)
        for index, frame_path in enumerate(manifest.frame_paths):
            if not frame_path.is_file():
                raise MissingFile(frame_path)
            actual = _image_size(frame_path)
            if actual != expected:
                raise DimensionMismatch(expected, actual, where=f"кадр {index}: {frame_path.name}")

    logger.info(
        f"📄 Манифест {manifest.source_id}: {manifest.frame_count} кадров "
        f"{manifest.width}x{manifest.height} @ {manifest.fps} fps"
    )
    return manifest


def save_manifest(manifest: FrameManifest, path: Path) -> None:
    """Записать manifest.json; пути кадров сохраняются относительно его каталога."""
    path = Path(path)
    write_json(path, manifest.to_document(path.parent))


def _image_size(path: Path) -> tuple[int, int]:
    try:
        with Image.open(path) as image:
            return image.size
    except (UnidentifiedImageError, OSError) as e:
        raise MalformedManifest(path, f"кадр не декодируется: {e}")


# ============================================================================
# ЯРКОСТЬ
# ============================================================================

def to_luma(frame: np.ndarray) -> LumaPlane:
    """
    Перевести RGB-кадр в плоскость яркости Y.

    Y = round(0.299·R + 0.587·G + 0.114·B), ограничено [0, 255].
    Двумерный массив считается уже яркостью; альфа-канал отбрасывается.

    Args:
        frame: массив (h, w, 3|4) или (h, w)

    Returns:
        LumaPlane

    Raises:
        EmptyFrame: кадр без пикселей

    Example:
        >>> to_luma(np.full((1, 1, 3), (255, 0, 0), np.uint8)).samples[0, 0]
        76
    """
    frame = np.asarray(frame)
    if frame.size == 0 or frame.ndim < 2 or frame.shape[0] == 0 or frame.shape[1] == 0:
        raise EmptyFrame()

    if frame.ndim == 2:
        return LumaPlane.from_array(np.clip(frame, 0, 255).astype(np.uint8))

    rgb = frame[..., :3].astype(np.float64)
    # round half up: floor(x + 0.5)
    luma = np.floor(rgb @ LUMA_WEIGHTS + 0.5)
    return LumaPlane.from_array(np.clip(luma, 0, 255).astype(np.uint8))


def decode_frame(path: Path) -> LumaPlane:
    """Декодировать один кадр (PNG/PGM) в плоскость яркости."""
    try:
        with Image.open(path) as image:
            if image.mode == "L":
                array = np.asarray(image)
            elif image.mode == "I" or image.mode.startswith("I;16"):
                # 16-битная яркость: старший байт
                array = np.clip(np.asarray(image, dtype=np.int64) >> 8, 0, 255).astype(np.uint8)
            else:
                array = np.asarray(image.convert("RGB"))
    except FileNotFoundError:
        raise MissingFile(path)
    except (UnidentifiedImageError, OSError) as e:
        raise MalformedManifest(path, f"кадр не декодируется: {e}")
    return to_luma(array)


def load_frames(manifest: FrameManifest, workers: Optional[int] = None) -> FrameSequence:
    """
    Декодировать все кадры манифеста.

    Кадры декодируются в пуле потоков; executor.map сохраняет порядок,
    так что lumas[i] соответствует frame_paths[i].

    Raises:
        DimensionMismatch: размер декодированного кадра не совпадает с манифестом
    """
    workers = workers or settings.FRAME_DECODE_WORKERS
    with ThreadPoolExecutor(max_workers=workers) as executor:
        lumas: List[LumaPlane] = list(executor.map(decode_frame, manifest.frame_paths))

    expected = (manifest.width, manifest.height)
    for index, plane in enumerate(lumas):
        if plane.size != expected:
            raise DimensionMismatch(expected, plane.size, where=f"кадр {index}")

    logger.debug(f"Декодировано {len(lumas)} кадров ({workers} потоков)")
    return FrameSequence(manifest=manifest, lumas=lumas)


def load_sequence(path: Path) -> FrameSequence:
    """Манифест + кадры за один вызов."""
    return load_frames(load_manifest(path))


def frame_digests(manifest: FrameManifest) -> List[str]:
    """SHA-256 файлов кадров (для хэшей входов стадий)."""
    return [hash_file(path) for path in manifest.frame_paths]


def luma_digest(plane: LumaPlane) -> str:
    """Короткий отпечаток содержимого плоскости (для payload модели)."""
    header = f"{plane.width}x{plane.height}:".encode()
    return sha256_hex(header + plane.samples.tobytes())[:16]


# ============================================================================
# ЗАПИСЬ КАДРОВ
# ============================================================================

def save_frames(lumas: Sequence[LumaPlane], paths: Sequence[Path]) -> None:
    """Записать плоскости как 8-битные PNG (серые)."""
    for plane, path in zip(lumas, paths):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(plane.samples).save(path, format="PNG")
