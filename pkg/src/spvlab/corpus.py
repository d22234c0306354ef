"""Scene corpus: manifest loading, annotation sidecars, image IO, demo scenes.

A corpus is a JSON manifest listing panorama images (equirectangular,
single channel) plus optional per-scene annotation sidecars giving ground
truth object counts. Paths in the manifest are relative to the manifest
file. Annotations use the fixed nine-class indoor vocabulary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigurationError, SchemaError

OBJECT_CLASSES = (
    "bed",
    "window",
    "chair",
    "tv",
    "sofa",
    "table/nightstand",
    "door",
    "wardrobe/shelving",
    "lamp",
)

_PANORAMA_CACHE_SIZE = 16


# ---------------------------------------------------------------------------
# image IO
# ---------------------------------------------------------------------------


def frame_to_u8(frame: np.ndarray) -> np.ndarray:
    """Convert a [0, 1] float frame to 8-bit; the single shared conversion."""
    return np.clip(np.round(np.asarray(frame, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def write_image_u8(path, data: np.ndarray) -> None:
    """Write a single-channel uint8 image as PNG or binary PGM by extension."""
    path = Path(path)
    data = np.ascontiguousarray(data, dtype=np.uint8)
    if path.suffix.lower() == ".pgm":
        with open(path, "wb") as fh:
            fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
            fh.write(data.tobytes())
    else:
        Image.fromarray(data, mode="L").save(path)


def read_image(path) -> np.ndarray:
    """Load an image as float64 in [0, 1], converting color to luminance."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        with open(path, "rb") as fh:
            magic = fh.readline().strip()
            if magic != b"P5":
                raise ConfigurationError(f"{path}: only binary (P5) PGM is supported")
            dims = fh.readline().split()
            maxval = int(fh.readline())
            w, h = int(dims[0]), int(dims[1])
            raw = np.frombuffer(fh.read(w * h), dtype=np.uint8).reshape(h, w)
        return raw.astype(np.float64) / maxval
    img = Image.open(path)
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img, dtype=np.float64) / 255.0


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scene:
    scene_id: str
    panorama_path: Path
    annotation_path: Path = None  # type: ignore[assignment]


class Corpus:
    """A set of panorama scenes addressed by id."""

    def __init__(self, scenes, panorama_dims=None):
        ids = [s.scene_id for s in scenes]
        if len(set(ids)) != len(ids):
            raise SchemaError("scene ids must be unique")
        self.scenes = {s.scene_id: s for s in scenes}
        self.panorama_dims = tuple(panorama_dims) if panorama_dims else None
        self._cache: dict = {}

    @property
    def scene_ids(self):
        return list(self.scenes)

    def __len__(self):
        return len(self.scenes)

    @classmethod
    def load(cls, manifest_path) -> "Corpus":
        manifest_path = Path(manifest_path)
        try:
            doc = json.loads(manifest_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read manifest {manifest_path}: {exc}") from exc
        if not isinstance(doc.get("scenes"), list) or not doc["scenes"]:
            raise SchemaError("manifest must list at least one scene")
        root = manifest_path.parent
        scenes = []
        for entry in doc["scenes"]:
            if "id" not in entry or "panorama" not in entry:
                raise SchemaError(f"scene entry missing id/panorama: {entry}")
            pano = root / entry["panorama"]
            if not pano.is_file():
                raise ConfigurationError(f"panorama not found: {pano}")
            ann = entry.get("annotations")
            ann_path = root / ann if ann else None
            if ann_path is not None and not ann_path.is_file():
                raise ConfigurationError(f"annotation sidecar not found: {ann_path}")
            scenes.append(Scene(entry["id"], pano, ann_path))
        return cls(scenes, panorama_dims=doc.get("panorama_dims"))

    def _scene(self, scene_id: str) -> Scene:
        try:
            return self.scenes[scene_id]
        except KeyError:
            raise ConfigurationError(f"unknown scene {scene_id!r}") from None

    def panorama(self, scene_id: str) -> np.ndarray:
        """Scene panorama as float64 in [0, 1] (small LRU cache)."""
        if scene_id in self._cache:
            return self._cache[scene_id]
        img = read_image(self._scene(scene_id).panorama_path)
        if self.panorama_dims and (img.shape[1], img.shape[0]) != self.panorama_dims:
            raise ConfigurationError(
                f"scene {scene_id}: panorama is {img.shape[1]}x{img.shape[0]}, "
                f"manifest declares {self.panorama_dims[0]}x{self.panorama_dims[1]}"
            )
        if len(self._cache) >= _PANORAMA_CACHE_SIZE:
            self._cache.pop(next(iter(self._cache)))
        self._cache[scene_id] = img
        return img

    def annotations(self, scene_id: str):
        """Ground-truth object counts for a scene, or None when unannotated."""
        scene = self._scene(scene_id)
        if scene.annotation_path is None:
            return None
        doc = json.loads(Path(scene.annotation_path).read_text())
        objects = doc.get("objects")
        if not isinstance(objects, dict):
            raise SchemaError(f"{scene.annotation_path}: expected an 'objects' mapping")
        for cls_name, count in objects.items():
            if cls_name not in OBJECT_CLASSES:
                raise SchemaError(f"unknown object class {cls_name!r}")
            if not isinstance(count, int) or count < 1:
                raise SchemaError(f"object count for {cls_name!r} must be a positive integer")
        return dict(objects)

    def stimulus_count(self, conditions) -> int:
        """Distinct (scene, condition) stimuli this corpus can produce."""
        return len(self.scenes) * len(conditions)


# ---------------------------------------------------------------------------
# synthetic demo corpus
# ---------------------------------------------------------------------------


def make_demo_corpus(root, n_scenes: int = 50, seed: int = 0, width: int = 1024, height: int = 512) -> Path:
    """Generate synthetic indoor-ish panoramas plus annotations; returns the manifest path.

    Scenes are reproducible per seed: a dim ambient gradient with a handful
    of bright rectangular patches at random azimuths standing in for salient
    objects.
    """
    root = Path(root)
    (root / "scenes").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for k in range(n_scenes):
        scene_id = f"scene_{k:03d}"
        pano = _synthetic_panorama(rng, width, height)
        img_rel = f"scenes/{scene_id}.png"
        write_image_u8(root / img_rel, frame_to_u8(pano))
        n_objects = int(rng.integers(2, 6))
        classes = rng.choice(len(OBJECT_CLASSES), size=n_objects, replace=False)
        objects = {OBJECT_CLASSES[int(c)]: int(rng.integers(1, 4)) for c in classes}
        ann_rel = f"scenes/{scene_id}.objects.json"
        (root / ann_rel).write_text(json.dumps({"objects": objects}, indent=1))
        entries.append({"id": scene_id, "panorama": img_rel, "annotations": ann_rel})
    manifest = root / "manifest.json"
    manifest.write_text(
        json.dumps({"panorama_dims": [width, height], "scenes": entries}, indent=1)
    )
    return manifest


def _synthetic_panorama(rng, width: int, height: int) -> np.ndarray:
    yy = np.linspace(0, 1, height)[:, None]
    pano = 0.08 + 0.12 * np.sin(math.pi * yy) * np.ones((height, width))
    for _ in range(int(rng.integers(6, 14))):
        w = int(rng.integers(width // 32, width // 6))
        h = int(rng.integers(height // 16, height // 3))
        x = int(rng.integers(0, width))
        y = int(rng.integers(0, height - h))
        level = rng.uniform(0.35, 1.0)
        cols = (np.arange(x, x + w)) % width  # objects may straddle the seam
        pano[y : y + h, cols] = np.maximum(pano[y : y + h, cols], level)
    return np.clip(pano, 0.0, 1.0)
