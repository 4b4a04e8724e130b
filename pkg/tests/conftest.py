"""
Общие фикстуры тестов: маленькие записи, модели приложений, клиенты модели.
"""
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pytest

from xplore.models.frames import FrameManifest, FrameSequence, LumaPlane
from xplore.models.simulation import AppElement, AppModel, AppScreen, Transition
from xplore.models.vh import ViewHierarchy, VhNode
from xplore.services.model_client_service import MockBackend, ModelClient
from xplore.services.simulate_service import simulate, write_corpus

FrameSpec = Union[int, np.ndarray]


def frames_from(specs: Sequence[FrameSpec], size=(4, 4), fps: float = 10.0, source_id: str = "rec") -> FrameSequence:
    """Последовательность в памяти: число - кадр одного тона, массив - готовый кадр."""
    width, height = size
    lumas = []
    for spec in specs:
        if isinstance(spec, np.ndarray):
            lumas.append(LumaPlane.from_array(spec))
        else:
            lumas.append(LumaPlane.from_array(np.full((height, width), spec, dtype=np.uint8)))
    manifest = FrameManifest(
        source_id=source_id,
        fps=fps,
        width=width,
        height=height,
        frame_paths=tuple(Path(f"frames/frame_{i:05d}.png") for i in range(len(lumas))),
    )
    return FrameSequence(manifest=manifest, lumas=lumas)


@pytest.fixture
def make_frames():
    return frames_from


@pytest.fixture
def tiny_app() -> AppModel:
    """Три экрана: Home -> Settings, Home -> Profile, Profile -> Settings."""
    def title(screen_id: str, text: str) -> AppElement:
        return AppElement(element_id=f"{screen_id}_title", bounds=(0, 0, 144, 32), clickable=False, text=text)

    def button(screen_id: str, index: int, text: str) -> AppElement:
        top = 40 + 36 * index
        return AppElement(element_id=f"{screen_id}_btn{index}", bounds=(8, top, 136, top + 28), text=text)

    return AppModel(
        name="TinyApp",
        description="A tiny app for tests",
        screens=[
            AppScreen(screen_id="s0", description="Home", elements=[
                title("s0", "Home"), button("s0", 0, "Open Settings"), button("s0", 1, "Open Profile"),
            ]),
            AppScreen(screen_id="s1", description="Settings", elements=[title("s1", "Settings")]),
            AppScreen(screen_id="s2", description="Profile", elements=[
                title("s2", "Profile"), button("s2", 0, "Open Settings"),
            ]),
        ],
        transitions=[
            Transition(screen="s0", element="s0_btn0", target="s1"),
            Transition(screen="s0", element="s0_btn1", target="s2"),
            Transition(screen="s2", element="s2_btn0", target="s1"),
        ],
        home="s0",
        back_map={"s1": "s0", "s2": "s0"},
    )


@pytest.fixture
def tiny_corpus(tmp_path, tiny_app):
    """Отрендеренный и записанный на диск корпус tiny_app; возвращает путь к manifest.json."""
    gt, corpus = simulate(tiny_app)
    return write_corpus(tmp_path / "corpus", tiny_app, gt.events, corpus)


@pytest.fixture
def sample_vh() -> ViewHierarchy:
    """FrameLayout с заголовком, пустым LinearLayout-оберткой и двумя кнопками."""
    return ViewHierarchy(
        screen=(100, 200),
        root=VhNode(
            class_name="FrameLayout",
            bounds=(0, 0, 100, 200),
            children=(
                VhNode(class_name="TextView", resource_id="title", text="Inbox", bounds=(0, 0, 100, 20)),
                VhNode(
                    class_name="LinearLayout",
                    bounds=(0, 20, 100, 200),
                    children=(
                        VhNode(
                            class_name="Button", resource_id="compose", text="Compose",
                            bounds=(0, 20, 50, 40), clickable=True,
                        ),
                        VhNode(
                            class_name="Button", resource_id="search", text="Search",
                            bounds=(50, 20, 100, 40), clickable=True,
                        ),
                    ),
                ),
            ),
        ),
    )


@pytest.fixture
def mock_backend() -> MockBackend:
    return MockBackend()


@pytest.fixture
def mock_client(mock_backend) -> ModelClient:
    return ModelClient(backend=mock_backend)


@pytest.fixture
def cache_dir(tmp_path) -> Path:
    path = tmp_path / "cache"
    path.mkdir()
    return path
