"""Command-line interface.

One flag-driven entry point with five modes:

  evaluate   re-randomization study -> report.csv, roc.csv, figures
  fit        train one model on a labelled matrix -> model JSON
  predict    classify new samples with a saved model -> predictions.csv
  synth      generate a synthetic two-class dataset -> matrix/labels CSVs
  selfcheck  run the built-in numerical checks

Flags override config-file keys, which override defaults. Exit codes:
0 success, 1 runtime/data failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, apply_values, read_config_file
from .data import IngestError, emit_csv, ingest_csv, read_matrix_csv
from .evaluate import run_evaluation, write_report_csv, write_roc_csv
from .modelio import fit_model, load_model, predict_model, save_model, write_predictions_csv
from .synth import SynthSpec, gen_two_class

MODES = ("evaluate", "fit", "predict", "synth", "selfcheck")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="latred",
        description="Latent-factor dimension reduction and class prediction "
                    "for expression matrices.",
    )
    ap.add_argument("--version", action="version", version=f"latred {__version__}")
    ap.add_argument("--mode", required=True, choices=MODES, help="what to run")
    ap.add_argument("--config", metavar="FILE", help="key=value config file")
    ap.add_argument("--matrix", metavar="FILE", help="expression matrix CSV")
    ap.add_argument("--labels", metavar="FILE", help="class labels CSV")
    ap.add_argument("--out", metavar="DIR", default=".",
                    help="output directory (default: current directory)")
    ap.add_argument("--model", metavar="FILE",
                    help="model JSON path (output of fit, input of predict)")
    ap.add_argument("--seed", type=int, metavar="N", help="master RNG seed")
    ap.add_argument("--trials", type=int, metavar="R", help="re-randomization trials")
    ap.add_argument("--n-learn", type=int, metavar="N", dest="n_learn",
                    help="learning-set size per trial")
    ap.add_argument("--method", choices=("rm", "pca", "both"),
                    help="reduction method(s) to run")
    ap.add_argument("--select", choices=("welch", "random"),
                    help="gene selection mode")
    ap.add_argument("--p-star", metavar="P[,P]", dest="p_star",
                    help="selected gene count(s), comma separated")
    ap.add_argument("--k", type=int, metavar="K",
                    help="fixed factor count for fit (default: choose by LOOCV)")
    ap.add_argument("--no-preprocess", action="store_true",
                    help="treat the matrix as already normalized")
    # synth mode shape
    ap.add_argument("--synth-n", type=int, metavar="N", default=72,
                    help="synth: total samples, balanced classes (default 72)")
    ap.add_argument("--synth-p", type=int, metavar="P", default=400,
                    help="synth: total genes (default 400)")
    ap.add_argument("--synth-informative", type=int, metavar="P1", default=50,
                    help="synth: mean-shifted genes (default 50)")
    ap.add_argument("--synth-shift", type=float, metavar="D", default=1.5,
                    help="synth: class mean separation in sd units (default 1.5)")
    ap.add_argument("--synth-blocks", type=int, metavar="B", default=1,
                    help="synth: coexpression block count (default 1)")
    ap.add_argument("--synth-rho", type=float, metavar="R", default=0.0,
                    help="synth: within-block correlation (default 0)")
    return ap


def _overrides_from_flags(args) -> dict:
    raw = {}
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if args.trials is not None:
        raw["trials"] = str(args.trials)
    if args.n_learn is not None:
        raw["n_learn"] = str(args.n_learn)
    if args.method is not None:
        raw["method"] = args.method
    if args.select is not None:
        raw["select.mode"] = args.select
    if args.p_star is not None:
        raw["select.p_star"] = args.p_star
    if args.k is not None:
        raw["k"] = str(args.k)
    if args.no_preprocess:
        raw["preprocess.enabled"] = "false"
    return raw


def _load_config(args) -> tuple:
    """(RunConfig, file keys seen) after file + flag overlay."""
    cfg = RunConfig()
    file_values = {}
    if args.config:
        file_values = read_config_file(args.config)
        cfg = apply_values(cfg, file_values)
    cfg = apply_values(cfg, _overrides_from_flags(args))
    return cfg, set(file_values)


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required for --mode {args.mode}")


def _write_manifest(out_dir: Path, mode: str, cfg: RunConfig, inputs: dict,
                    outputs: list) -> Path:
    import platform

    import matplotlib
    import numpy

    payload = {
        "tool": "latred",
        "version": __version__,
        "mode": mode,
        "inputs": {k: str(v) for k, v in inputs.items() if v},
        "settings": asdict(cfg),
        "outputs": sorted(str(p.name) for p in outputs),
        "versions": {
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "matplotlib": matplotlib.__version__,
        },
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def _mode_evaluate(args) -> int:
    _require(args, "matrix", "labels")
    cfg, _ = _load_config(args)
    matrix, labels = ingest_csv(args.matrix, args.labels)
    report = run_evaluation(matrix, labels, cfg.to_eval_config())

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.csv"
    roc_path = out / "roc.csv"
    write_report_csv(report, report_path)
    write_roc_csv(report, roc_path)
    from .plots import render_figures  # deferred: pulls in matplotlib
    figures = render_figures(report, out)
    outputs = [report_path, roc_path, *figures]
    outputs.append(_write_manifest(out, "evaluate", cfg,
                                   {"matrix": args.matrix, "labels": args.labels,
                                    "config": args.config}, outputs))
    for s in report.summaries:
        print(f"{s.method} p*={s.p_star}: mer={s.mer_mean:.4f} (sd {s.mer_sd:.4f}) "
              f"k*={s.k_star_mean:.2f} auc={s.auc:.4f}")
    for path in outputs:
        print(f"wrote {path}")
    return 0


def _mode_fit(args) -> int:
    _require(args, "matrix", "labels", "method")
    cfg, file_keys = _load_config(args)
    if args.p_star is None and "select.p_star" not in file_keys:
        cfg = replace(cfg, p_stars=())  # no selection: fit on every gene
    matrix, labels = ingest_csv(args.matrix, args.labels)
    model = fit_model(matrix, labels, cfg.to_fit_config())

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model_path = Path(args.model) if args.model else out / "model.json"
    model_path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, model_path)
    print(f"fitted {model.method} model: {len(model.selected_genes)} genes, "
          f"k*={model.k_star}")
    print(f"wrote {model_path}")
    return 0


def _mode_predict(args) -> int:
    _require(args, "matrix", "model")
    model = load_model(args.model)
    matrix = read_matrix_csv(args.matrix)
    result = predict_model(model, matrix)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pred_path = out / "predictions.csv"
    write_predictions_csv(result, pred_path)
    print(f"classified {len(result.sample_ids)} samples with the "
          f"{model.method} model (k*={model.k_star})")
    print(f"wrote {pred_path}")
    return 0


def _mode_synth(args) -> int:
    if args.seed is None:
        raise ConfigError("seed is required (flag --seed)")
    spec = SynthSpec(n=args.synth_n, p=args.synth_p,
                     n_informative=args.synth_informative,
                     shift=args.synth_shift, n_blocks=args.synth_blocks,
                     block_rho=args.synth_rho, seed=args.seed)
    matrix, labels = gen_two_class(spec)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix_path = out / "matrix.csv"
    labels_path = out / "labels.csv"
    emit_csv(matrix, matrix_path, labels, labels_path)
    blocks = f", {spec.n_blocks} blocks rho={spec.block_rho}" if spec.block_rho else ""
    print(f"generated {matrix.n_samples} samples x {matrix.n_genes} genes "
          f"({spec.n_informative} informative, shift {spec.shift}{blocks})")
    print(f"wrote {matrix_path}")
    print(f"wrote {labels_path}")
    return 0


def _mode_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck
    failures = run_selfcheck()
    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


_DISPATCH = {
    "evaluate": _mode_evaluate,
    "fit": _mode_fit,
    "predict": _mode_predict,
    "synth": _mode_synth,
    "selfcheck": _mode_selfcheck,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.mode](args)
    except (ConfigError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
