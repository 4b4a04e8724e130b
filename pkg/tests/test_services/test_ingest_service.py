"""
Тесты загрузки записи: манифест, декодирование, яркость.
"""
import json

import numpy as np
import pytest
from PIL import Image

from xplore.exceptions import DimensionMismatch, EmptyFrame, MalformedManifest, MissingFile
from xplore.models.frames import LumaPlane
from xplore.services.ingest_service import (
    decode_frame,
    frame_digests,
    load_frames,
    load_manifest,
    load_sequence,
    luma_digest,
    save_frames,
    save_manifest,
    to_luma,
)


def write_recording(root, colors, size=(4, 3), fps=10.0, mode="RGB"):
    """Записать кадры заданных цветов и manifest.json, вернуть путь к манифесту."""
    width, height = size
    frames_dir = root / "frames"
    frames_dir.mkdir(parents=True)
    names = []
    for i, color in enumerate(colors):
        name = f"frames/f{i}.png"
        Image.new(mode, (width, height), color).save(root / name)
        names.append(name)
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps({
        "source_id": "demo", "fps": fps, "width": width, "height": height, "frames": names,
    }))
    return manifest


class TestToLuma:
    def test_pure_red(self):
        plane = to_luma(np.full((1, 1, 3), (255, 0, 0), dtype=np.uint8))
        assert plane.samples[0, 0] == 76

    def test_primaries_and_gray(self):
        frame = np.array([[(0, 255, 0), (0, 0, 255), (128, 128, 128), (255, 255, 255)]], dtype=np.uint8)
        assert to_luma(frame).samples.tolist() == [[150, 29, 128, 255]]

    def test_alpha_is_ignored(self):
        frame = np.full((2, 2, 4), (255, 0, 0, 0), dtype=np.uint8)
        assert to_luma(frame).samples[1, 1] == 76

    def test_grayscale_passes_through(self):
        plane = to_luma(np.array([[7, 200]], dtype=np.uint8))
        assert plane.size == (2, 1)
        assert plane.samples.tolist() == [[7, 200]]

    def test_empty_frame(self):
        with pytest.raises(EmptyFrame):
            to_luma(np.zeros((0, 3, 3), dtype=np.uint8))


class TestManifest:
    def test_load_resolves_paths(self, tmp_path):
        path = write_recording(tmp_path, ["black", "white"])
        manifest = load_manifest(path)

        assert manifest.source_id == "demo"
        assert manifest.frame_count == 2
        assert manifest.frame_paths[0] == tmp_path / "frames" / "f0.png"

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingFile):
            load_manifest(tmp_path / "nope.json")

    def test_not_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{not json")
        with pytest.raises(MalformedManifest):
            load_manifest(path)

    def test_bad_fps(self, tmp_path):
        path = write_recording(tmp_path, ["black"])
        document = json.loads(path.read_text())
        document["fps"] = 0
        path.write_text(json.dumps(document))
        with pytest.raises(MalformedManifest):
            load_manifest(path)

    def test_missing_frame(self, tmp_path):
        path = write_recording(tmp_path, ["black", "white"])
        (tmp_path / "frames" / "f1.png").unlink()
        with pytest.raises(MissingFile):
            load_manifest(path)
        assert load_manifest(path, check_frames=False).frame_count == 2

    def test_dimension_mismatch(self, tmp_path):
        path = write_recording(tmp_path, ["black", "white"])
        Image.new("RGB", (5, 3), "white").save(tmp_path / "frames" / "f1.png")
        with pytest.raises(DimensionMismatch) as exc_info:
            load_manifest(path)
        assert exc_info.value.actual == (5, 3)

    def test_save_keeps_relative_paths(self, tmp_path):
        path = write_recording(tmp_path, ["black", "white"])
        manifest = load_manifest(path)
        copy = tmp_path / "copy.json"
        save_manifest(manifest, copy)

        assert json.loads(copy.read_text())["frames"] == ["frames/f0.png", "frames/f1.png"]


class TestFrames:
    def test_load_sequence_keeps_order(self, tmp_path):
        path = write_recording(tmp_path, ["black", "red", "white"])
        seq = load_sequence(path)

        assert [int(p.samples[0, 0]) for p in seq.lumas] == [0, 76, 255]

    def test_load_frames_with_single_worker(self, tmp_path):
        manifest = load_manifest(write_recording(tmp_path, ["black", "white"]))
        assert load_frames(manifest, workers=1).frame_count == 2

    def test_grayscale_png(self, tmp_path):
        path = write_recording(tmp_path, [90], mode="L")
        assert decode_frame(tmp_path / "frames" / "f0.png").samples[0, 0] == 90
        assert load_sequence(path).lumas[0].samples[2, 3] == 90

    def test_sixteen_bit_pgm_keeps_high_byte(self, tmp_path):
        path = tmp_path / "deep.pgm"
        samples = np.array([[0x8000, 0xFFFF, 0x00FF]], dtype=">u2")
        path.write_bytes(b"P5\n3 1\n65535\n" + samples.tobytes())

        assert decode_frame(path).samples.tolist() == [[128, 255, 0]]

    def test_sixteen_bit_png_keeps_high_byte(self, tmp_path):
        path = tmp_path / "deep.png"
        Image.fromarray(np.array([[0x1234, 0xFF00]], dtype=np.uint16)).save(path)

        assert decode_frame(path).samples.tolist() == [[0x12, 0xFF]]

    def test_save_frames_round_trip(self, tmp_path):
        plane = LumaPlane.from_array(np.arange(12, dtype=np.uint8).reshape(3, 4))
        target = tmp_path / "out" / "a.png"
        save_frames([plane], [target])
        assert decode_frame(target) == plane

    def test_digests(self, tmp_path):
        manifest = load_manifest(write_recording(tmp_path, ["black", "black", "white"]))
        digests = frame_digests(manifest)

        assert digests[0] == digests[1]
        assert digests[0] != digests[2]

    def test_luma_digest_depends_on_content(self):
        a = LumaPlane.from_array(np.zeros((2, 2), dtype=np.uint8))
        b = LumaPlane.from_array(np.ones((2, 2), dtype=np.uint8))
        assert luma_digest(a) == luma_digest(LumaPlane.from_array(np.zeros((2, 2), dtype=np.uint8)))
        assert luma_digest(a) != luma_digest(b)
