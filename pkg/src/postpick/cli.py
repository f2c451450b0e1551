"""Command-line driver: simulate, features, train, classify, eval, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import classifier, features, image_io, metrics, simulator


def _cmd_simulate(args) -> int:
    cfg = simulator.load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    datasets = simulator.generate_dataset(cfg)
    for name, (entries, images) in datasets.items():
        stack = os.path.join(args.out, f"{name}.ppk")
        image_io.write_stack(stack, images)
        resolved = [
            image_io.ManifestEntry(f"{stack}{e.path}", e.label, e.source) for e in entries
        ]
        image_io.write_manifest(os.path.join(args.out, f"{name}.jsonl"), resolved)
        print(f"{name}: {len(entries)} images -> {stack}")
    return 0


def extract_for_manifest(entries: list[image_io.ManifestEntry]):
    """Features for every manifest entry, in manifest order."""
    rows = []
    for e in entries:
        img = image_io.load_image(e.path)
        rows.append((e.path, e.label, features.extract_features(img)))
    return rows


def _cmd_features(args) -> int:
    entries = image_io.read_manifest(args.manifest)
    rows = extract_for_manifest(entries)
    features.write_feature_csv(args.out, rows)
    print(f"{len(rows)} feature rows -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    rows = features.read_feature_csv(args.features)
    labeled = [(p, lab, v) for p, lab, v in rows if lab in classifier.LABEL_CODES]
    if not labeled:
        raise ValueError("no labeled rows in the feature CSV")
    X = np.array([v for _, _, v in labeled])
    y = np.array([classifier.LABEL_CODES[lab] for _, lab, _ in labeled])
    ensemble, _ = classifier.build_ensemble(
        X, y, k=args.k, seed=args.seed, feature_names=list(features.FEATURE_NAMES)
    )
    classifier.save_ensemble(args.out, ensemble)
    print(
        f"trained {args.k} members; validation sensitivity="
        f"{_fmt(ensemble.validation_sensitivity)} specificity="
        f"{_fmt(ensemble.validation_specificity)} -> {args.out}"
    )
    return 0


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def classify_manifest(model_path, entries):
    """(path, predicted label, margin, particle votes) per entry."""
    ensemble = classifier.load_ensemble(model_path)
    rows = extract_for_manifest(entries)
    X = np.array([v for _, _, v in rows])
    labels, margins, votes = classifier.predict_ensemble_batch(ensemble, X)
    return [
        (e.path, classifier.LABEL_NAMES[int(lab)], int(m), int(v))
        for e, lab, m, v in zip(entries, labels, margins, votes)
    ]


def write_predictions(path, predictions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p, predicted, margin, votes in predictions:
            fh.write(
                json.dumps(
                    {"path": p, "predicted": predicted, "margin": margin, "votes_particle": votes}
                )
                + "\n"
            )


def read_predictions(path):
    preds = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                preds.append((rec["path"], rec["predicted"], rec["margin"], rec["votes_particle"]))
    return preds


def _cmd_classify(args) -> int:
    entries = image_io.read_manifest(args.manifest)
    predictions = classify_manifest(args.model, entries)
    write_predictions(args.out, predictions)
    print(f"{len(predictions)} predictions -> {args.out}")
    return 0


def evaluation_report(truth_entries, predictions, feature_rows=None) -> dict:
    truth = {e.path: e.label for e in truth_entries}
    pairs = [(truth[p], pred) for p, pred, _, _ in predictions if truth.get(p) in classifier.LABEL_CODES]
    if not pairs:
        raise ValueError("no overlapping labeled samples between truth and predictions")
    cm = metrics.confusion([t for t, _ in pairs], [p for _, p in pairs])
    derived = metrics.derived_metrics(cm)
    report = {
        "tp": cm.tp,
        "fp": cm.fp,
        "tn": cm.tn,
        "fn": cm.fn,
        "sensitivity": derived.sensitivity,
        "specificity": derived.specificity,
        "ppv": derived.ppv,
        "npv": derived.npv,
        "accuracy": derived.accuracy,
        "auc_per_feature": {},
    }
    if feature_rows:
        labels = [lab for _, lab, _ in feature_rows if lab in classifier.LABEL_CODES]
        X = np.array([v for _, lab, v in feature_rows if lab in classifier.LABEL_CODES])
        if len(set(labels)) == 2:
            for j, name in enumerate(features.FEATURE_NAMES):
                report["auc_per_feature"][name] = metrics.roc_auc(X[:, j], labels)
    return report


def _cmd_eval(args) -> int:
    truth_entries = image_io.read_manifest(args.truth)
    predictions = read_predictions(args.pred)
    rows = features.read_feature_csv(args.features) if args.features else None
    report = evaluation_report(truth_entries, predictions, rows)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(
        f"sensitivity={_fmt(report['sensitivity'])} specificity={_fmt(report['specificity'])}"
        f" accuracy={_fmt(report['accuracy'])} -> {args.out}"
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.root)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="postpick", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate an artificial dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("features", help="extract the feature matrix for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("train", help="train the vote ensemble from a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--k", type=int, default=classifier.DEFAULT_K)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("classify", help="predict labels for a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("eval", help="score predictions against known labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--features", default=None, help="optional feature CSV for per-feature AUC")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="start the curation HTTP service")
    p.add_argument("--root", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"postpick: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
