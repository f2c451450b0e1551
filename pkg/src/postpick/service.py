"""Curation HTTP service: browse samples, label, train, review predictions.

State lives under a dataset root directory:

* ``manifest.jsonl``      source of truth for the sample list (required)
* ``labels.journal.jsonl``  append-only label journal, replayed on startup
* ``model.json``          latest trained ensemble
* ``predictions.jsonl``   latest classification run
* ``report.json``         latest evaluation report

Label writes hit the journal (flushed and fsynced) before the response,
so an acknowledged label survives a crash-and-restart.  At most one
training job runs at a time.
"""

from __future__ import annotations

import io
import json
import os
import threading
import time

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import classifier, features, image_io
from .cli import classify_manifest, evaluation_report, read_predictions, write_predictions

MIN_TRAIN_SAMPLES = 50


class LabelRequest(BaseModel):
    id: int
    label: str


class TrainRequest(BaseModel):
    k: int = classifier.DEFAULT_K
    seed: int = 0


class LabelStore:
    """Manifest-backed label table with an append-only journal."""

    def __init__(self, root: str):
        self.root = root
        self.manifest_path = os.path.join(root, "manifest.jsonl")
        self.journal_path = os.path.join(root, "labels.journal.jsonl")
        entries = image_io.read_manifest(self.manifest_path)
        self.records = [
            {"id": i, "path": e.path, "label": e.label, "source": e.source, "timestamp": None}
            for i, e in enumerate(entries)
        ]
        self.by_path = {r["path"]: r for r in self.records}
        self._lock = threading.Lock()
        self._replay()

    def _replay(self) -> None:
        if not os.path.exists(self.journal_path):
            return
        with open(self.journal_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                live = self.records[rec["id"]]
                live["label"] = rec["label"]
                live["source"] = rec["source"]
                live["timestamp"] = rec["timestamp"]

    def set_label(self, sample_id: int, label: str) -> dict:
        if not 0 <= sample_id < len(self.records):
            raise KeyError(f"no sample with id {sample_id}")
        if label not in image_io.LABELS:
            raise ValueError(f"bad label {label!r}")
        with self._lock:
            live = self.records[sample_id]
            if live["label"] == label and live["source"] == "hand":
                return live  # idempotent re-post
            entry = {
                "id": sample_id,
                "path": live["path"],
                "label": label,
                "source": "hand",
                "timestamp": time.time(),
            }
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            live.update(label=entry["label"], source="hand", timestamp=entry["timestamp"])
            return live


def _paged(items: list, offset: int, limit: int) -> dict:
    return {"total": len(items), "offset": offset, "items": items[offset:offset + limit]}


def create_app(root: str) -> FastAPI:
    app = FastAPI(title="postpick curation service")
    store = LabelStore(root)
    model_path = os.path.join(root, "model.json")
    predictions_path = os.path.join(root, "predictions.jsonl")
    report_path = os.path.join(root, "report.json")

    feature_cache: dict[str, np.ndarray] = {}
    jobs: dict[int, dict] = {}
    train_lock = threading.Lock()

    app.state.store = store

    def _features_for(paths: list[str]) -> np.ndarray:
        out = []
        for p in paths:
            if p not in feature_cache:
                feature_cache[p] = features.extract_features(image_io.load_image(p))
            out.append(feature_cache[p])
        return np.array(out)

    def _predictions() -> list[tuple]:
        if not os.path.exists(predictions_path):
            return []
        return read_predictions(predictions_path)

    @app.get("/samples")
    def samples(state: str | None = None, offset: int = 0, limit: int = 50):
        predicted_paths = {p for p, _, _, _ in _predictions()}
        items = []
        for r in store.records:
            if state == "unlabeled" and r["label"] != "unlabeled":
                continue
            if state == "labeled" and r["label"] == "unlabeled":
                continue
            if state == "predicted" and r["path"] not in predicted_paths:
                continue
            items.append(r)
        return _paged(items, offset, limit)

    @app.get("/samples/{sample_id}")
    def sample(sample_id: int):
        if not 0 <= sample_id < len(store.records):
            raise HTTPException(404, detail="unknown sample id")
        return store.records[sample_id]

    @app.get("/image/{sample_id}")
    def image(sample_id: int):
        if not 0 <= sample_id < len(store.records):
            raise HTTPException(404, detail="unknown sample id")
        from PIL import Image

        img = image_io.load_image(store.records[sample_id]["path"])
        lo, hi = img.min(), img.max()
        stretched = (img - lo) / (hi - lo) * 255.0 if hi > lo else np.zeros_like(img)
        buf = io.BytesIO()
        Image.fromarray(stretched.astype(np.uint8), mode="L").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/labels")
    def post_label(req: LabelRequest):
        try:
            return store.set_label(req.id, req.label)
        except KeyError as exc:
            raise HTTPException(404, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc))

    @app.post("/train")
    def train(req: TrainRequest):
        labeled = [r for r in store.records if r["label"] in classifier.LABEL_CODES]
        if len(labeled) < MIN_TRAIN_SAMPLES:
            raise HTTPException(
                400,
                detail=f"need at least {MIN_TRAIN_SAMPLES} labeled samples, have {len(labeled)}",
            )
        if not train_lock.acquire(blocking=False):
            raise HTTPException(409, detail="a training job is already running")
        job_id = len(jobs) + 1
        jobs[job_id] = {"state": "running", "validation": None, "error": None}

        def _run():
            try:
                X = _features_for([r["path"] for r in labeled])
                y = np.array([classifier.LABEL_CODES[r["label"]] for r in labeled])
                ensemble, _ = classifier.build_ensemble(
                    X, y, k=req.k, seed=req.seed, feature_names=list(features.FEATURE_NAMES)
                )
                classifier.save_ensemble(model_path, ensemble)
                jobs[job_id].update(
                    state="done",
                    validation={
                        "sensitivity": ensemble.validation_sensitivity,
                        "specificity": ensemble.validation_specificity,
                    },
                )
            except Exception as exc:  # surfaced through the job status
                jobs[job_id].update(state="failed", error=str(exc))
            finally:
                train_lock.release()

        threading.Thread(target=_run, daemon=True).start()
        return {"job_id": job_id}

    @app.get("/train/{job_id}")
    def train_status(job_id: int):
        if job_id not in jobs:
            raise HTTPException(404, detail="unknown job id")
        return jobs[job_id]

    @app.post("/classify")
    def classify():
        if not os.path.exists(model_path):
            raise HTTPException(400, detail="no trained model; POST /train first")
        entries = [
            image_io.ManifestEntry(r["path"], r["label"], r["source"]) for r in store.records
        ]
        predictions = classify_manifest(model_path, entries)
        write_predictions(predictions_path, predictions)
        labeled = [e for e in entries if e.label in classifier.LABEL_CODES]
        if labeled:
            report = evaluation_report(labeled, predictions)
            with open(report_path, "w", encoding="utf-8") as fh:
                json.dump(report, fh)
        return {"count": len(predictions)}

    @app.get("/predictions")
    def predictions(sort: str | None = None, label: str | None = None,
                    offset: int = 0, limit: int = 50):
        preds = _predictions()
        items = [
            {"path": p, "predicted": pred, "margin": m, "votes_particle": v}
            for p, pred, m, v in preds
            if label is None or pred == label
        ]
        if sort == "margin_asc":
            items.sort(key=lambda r: r["margin"])
        ids = {r["path"]: r["id"] for r in store.records}
        for item in items:
            item["id"] = ids.get(item["path"])
        return _paged(items, offset, limit)

    @app.get("/metrics")
    def metrics_report():
        if not os.path.exists(report_path):
            raise HTTPException(404, detail="no evaluation report yet")
        with open(report_path, "r", encoding="utf-8") as fh:
            return JSONResponse(json.load(fh))

    return app
