"""Local frame service for the browser viewer.

HTTP endpoints expose the corpus manifest and deterministic trial plans;
a WebSocket streams rendered frames. Each frame request is a text JSON
message

    {"quat": [a, b, c, d], "fov_deg": 60, "phosphenes": 500, "scene": "scene_000"}

answered by a text envelope

    {"ok": true, "scene": ..., "width": W, "height": H, "render_ms": ...}

followed by one binary message of W*H single-channel bytes (row-major,
top-left origin). A malformed request yields {"ok": false, "error": ...}
with no binary payload, and the connection stays open.
"""

from __future__ import annotations

import json
import time

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .corpus import OBJECT_CLASSES, Corpus, frame_to_u8
from .errors import SpvError
from .experiment import DEFAULT_CONDITION_GRID, Condition, StimulusEngine, build_trial_plan
from .geometry import CameraModel, default_camera


def create_app(
    corpus: Corpus,
    camera: CameraModel = None,
    levels: int = 8,
    sigma_ratio: float = 0.5,
    stencil: int = 3,
    conditions=DEFAULT_CONDITION_GRID,
) -> FastAPI:
    camera = camera if camera is not None else default_camera()
    engine = StimulusEngine(corpus, camera=camera, levels=levels, sigma_ratio=sigma_ratio, stencil=stencil)
    app = FastAPI(title="spvlab frame service")

    @app.get("/manifest")
    def manifest():
        return {
            "scenes": corpus.scene_ids,
            "panorama_dims": corpus.panorama_dims,
            "conditions": [{"fov_deg": c.fov_deg, "phosphenes": c.phosphenes} for c in conditions],
            "camera": {
                "width": camera.width,
                "height": camera.height,
                "fx": camera.fx,
                "fy": camera.fy,
                "cx": camera.cx,
                "cy": camera.cy,
            },
            "object_classes": list(OBJECT_CLASSES),
        }

    @app.post("/plan")
    def plan(body: dict):
        try:
            seed = int(body["seed"])
        except (KeyError, TypeError, ValueError):
            raise HTTPException(status_code=400, detail="body needs an integer 'seed'") from None
        length = int(body.get("length", 15))
        break_after = int(body.get("break_after", 7))
        try:
            built = build_trial_plan(
                corpus.scene_ids, conditions=conditions, seed=seed, length=length, break_after=break_after
            )
        except SpvError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return built.to_dict()

    @app.websocket("/frames")
    async def frames(ws: WebSocket):
        await ws.accept()
        while True:
            try:
                text = await ws.receive_text()
            except WebSocketDisconnect:
                return
            try:
                req = json.loads(text)
                quat = req["quat"]
                condition = Condition(fov_deg=float(req["fov_deg"]), phosphenes=int(req["phosphenes"]))
                scene = req["scene"]
                start = time.perf_counter()
                frame = engine.render(scene, condition, quat)
                render_ms = (time.perf_counter() - start) * 1e3
            except (SpvError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                await ws.send_text(json.dumps({"ok": False, "error": f"{type(exc).__name__}: {exc}"}))
                continue
            await ws.send_text(
                json.dumps(
                    {
                        "ok": True,
                        "scene": scene,
                        "fov_deg": condition.fov_deg,
                        "phosphenes": condition.phosphenes,
                        "width": frame.width,
                        "height": frame.height,
                        "render_ms": render_ms,
                    }
                )
            )
            await ws.send_bytes(frame_to_u8(frame.buffer).tobytes())

    return app
