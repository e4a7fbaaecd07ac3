"""Operator command line: generate, featurize, train, evaluate, timeline, serve.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
stderr; machine-readable output goes only to the file paths named by
flags. A flat key=value config file can seed any flag's value; explicit
flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .core import (
    CsvError,
    parse_call_records,
    parse_features,
    parse_registry,
    serialize_features,
)
from .datagen import GenConfig, GroundTruth, InvalidConfig, generate_world, parse_truth, write_world
from .evaluation import (
    BadK,
    cross_validate,
    er_timeline,
    serialize_predictions,
    serialize_timeline,
)
from .forest import (
    ArityMismatch,
    BadVersion,
    Balance,
    CorruptModel,
    EmptyDataset,
    ForestParams,
    SingleClass,
    load_model,
    save_model,
    train,
)
from .pipeline import (
    DuplicateRegistryId,
    MissingOpen,
    NonMonotonicTimestamps,
    StageOutOfRange,
    assemble_pmrs,
    build_customer_index,
    clean_critsit_ids,
    escalation_types,
    featurize_dataset,
    featurize_stages,
    join_critsit_dates,
)

DATA_ERRORS = (
    CsvError,
    InvalidConfig,
    DuplicateRegistryId,
    MissingOpen,
    NonMonotonicTimestamps,
    StageOutOfRange,
    SingleClass,
    EmptyDataset,
    ArityMismatch,
    BadVersion,
    CorruptModel,
    BadK,
    OSError,
)


class UsageError(ValueError):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def load_config_file(path: Path) -> dict:
    """Flat key=value file; values coerced to bool/int/float when they look it."""
    out: dict[str, object] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if value.lower() in ("true", "false"):
            out[key] = value.lower() == "true"
        else:
            try:
                out[key] = int(value)
            except ValueError:
                try:
                    out[key] = float(value)
                except ValueError:
                    out[key] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critwatch")
    parser.add_argument("--version", action="version", version=f"critwatch {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--version", action="version", version=f"critwatch {__version__}")
        p.add_argument("--config", type=Path, help="flat key=value config file")
        return p

    g = add("generate", "synthesize a ticket world")
    g.add_argument("--out", type=Path)
    g.add_argument("--customers", type=int)
    g.add_argument("--pmrs", type=int)
    g.add_argument("--crit-ratio", type=int, dest="crit_ratio")
    g.add_argument("--seed", type=int)
    g.add_argument("--dirty-rate", type=float, dest="dirty_rate")
    g.add_argument("--no-cascade", action="store_true", dest="no_cascade", default=None)

    f = add("featurize", "clean, join, assemble, and compute feature vectors")
    f.add_argument("--in", type=Path, dest="in_dir")
    f.add_argument("--out", type=Path)
    f.add_argument("--window-months", type=int, dest="window_months")
    f.add_argument("--stages", action="store_true", default=None)

    t = add("train", "train a random forest on feature vectors")
    t.add_argument("--features", type=Path)
    t.add_argument("--model", type=Path)
    t.add_argument("--trees", type=int)
    t.add_argument("--balance", choices=[b.value for b in Balance])
    t.add_argument("--seed", type=int)

    e = add("evaluate", "k-fold cross-validation with report")
    e.add_argument("--features", type=Path)
    e.add_argument("--folds", type=int)
    e.add_argument("--report", type=Path)
    e.add_argument("--predictions", type=Path)
    e.add_argument("--trees", type=int)
    e.add_argument("--balance", choices=[b.value for b in Balance])
    e.add_argument("--seed", type=int)
    e.add_argument("--threshold", type=float)

    tl = add("timeline", "per-stage escalation risk for one ticket")
    tl.add_argument("--in", type=Path, dest="in_dir")
    tl.add_argument("--model", type=Path)
    tl.add_argument("--pmr", type=str)
    tl.add_argument("--out", type=Path)
    tl.add_argument("--window-months", type=int, dest="window_months")

    s = add("serve", "run the triage REST service")
    s.add_argument("--in", type=Path, dest="in_dir")
    s.add_argument("--model", type=Path)
    s.add_argument("--state", type=Path)
    s.add_argument("--port", type=int)
    s.add_argument("--rescore-minutes", type=int, dest="rescore_minutes")
    s.add_argument("--window-months", type=int, dest="window_months")

    return parser


class _Options:
    """Flag > config-file > default resolution."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._config: dict = {}
        cfg_path = self._args.get("config")
        if cfg_path is not None:
            self._config = load_config_file(cfg_path)

    def get(self, key: str, default=None, required: bool = False):
        value = self._args.get(key)
        if value is None:
            value = self._config.get(key)
        if value is None:
            value = default
        if value is None and required:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
        return value


def _load_world_dir(in_dir: Path):
    records = parse_call_records((in_dir / "call_records.csv").read_bytes())
    registry_path = in_dir / "critsit_registry.csv"
    registry = parse_registry(registry_path.read_bytes()) if registry_path.exists() else []
    truth_path = in_dir / "truth.csv"
    truth: Optional[GroundTruth] = (
        parse_truth(truth_path.read_bytes()) if truth_path.exists() else None
    )
    return records, registry, truth


def _assemble(in_dir: Path, out_dir: Optional[Path] = None):
    records, registry, truth = _load_world_dir(in_dir)
    cleaned, clean_report = clean_critsit_ids(records)
    joined, join_report = join_critsit_dates(cleaned, registry)
    pmrs = assemble_pmrs(joined)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "clean_report.json").write_text(
            json.dumps(clean_report.to_json_dict(), indent=2, sort_keys=True) + "\n"
        )
        (out_dir / "orphan_report.json").write_text(
            json.dumps(join_report.to_json_dict(), indent=2, sort_keys=True) + "\n"
        )
    return pmrs, truth, clean_report, join_report


def _cmd_generate(opts: _Options) -> int:
    out = Path(opts.get("out", required=True))
    config = GenConfig(
        n_customers=int(opts.get("customers", required=True)),
        n_pmrs=int(opts.get("pmrs", required=True)),
        crit_ratio=int(opts.get("crit_ratio", 250)),
        cascade_enabled=not bool(opts.get("no_cascade", False)),
        dirty_id_rate=float(opts.get("dirty_rate", 0.05)),
        seed=int(opts.get("seed", 0)),
    )
    records, registry, truth = generate_world(config)
    write_world(out, records, registry, truth)
    _log(
        f"generated {len(records)} call records, {len(registry)} critsits, "
        f"{truth.positives()} escalated tickets -> {out}"
    )
    return 0


def _cmd_featurize(opts: _Options) -> int:
    in_dir = Path(opts.get("in_dir", required=True))
    out = Path(opts.get("out", required=True))
    window_months = int(opts.get("window_months", 6))
    per_stage = bool(opts.get("stages", False))

    pmrs, truth, clean_report, join_report = _assemble(in_dir, out.parent)
    index = build_customer_index(pmrs, window_months)
    if truth is not None:
        etypes = {pid: e.escalation_type for pid, e in truth.entries.items()}
    else:
        etypes = escalation_types(pmrs)

    if per_stage:
        vectors = []
        for p in pmrs:
            vectors.extend(
                featurize_stages(p, index, window_months, escalation_type=etypes.get(p.pmr_id))
            )
    else:
        vectors = featurize_dataset(pmrs, index, window_months, escalation_type_map=etypes)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(serialize_features(vectors))
    _log(
        f"featurized {len(pmrs)} tickets into {len(vectors)} rows -> {out} "
        f"(cleaned {clean_report.cleared} dirty ids, {join_report.orphan_records} orphan records)"
    )
    return 0


def _final_stage_rows(vectors):
    last = {}
    for v in vectors:
        seen = last.get(v.pmr_id)
        if seen is None or v.stage > seen.stage:
            last[v.pmr_id] = v
    order = []
    emitted = set()
    for v in vectors:
        if v.pmr_id not in emitted:
            emitted.add(v.pmr_id)
            order.append(last[v.pmr_id])
    return order


def _forest_params(opts: _Options) -> ForestParams:
    return ForestParams(
        n_trees=int(opts.get("trees", 100)),
        balance=Balance(opts.get("balance", Balance.OVERSAMPLE.value)),
        threshold=float(opts.get("threshold", 0.5)),
        seed=int(opts.get("seed", 0)),
    )


def _cmd_train(opts: _Options) -> int:
    features_path = Path(opts.get("features", required=True))
    model_path = Path(opts.get("model", required=True))
    params = _forest_params(opts)
    dataset = _final_stage_rows(parse_features(features_path.read_bytes()))
    model = train(dataset, params)
    model_path.parent.mkdir(parents=True, exist_ok=True)
    model_path.write_bytes(save_model(model))
    _log(f"trained {params.n_trees} trees on {len(dataset)} rows -> {model_path}")
    return 0


def _cmd_evaluate(opts: _Options) -> int:
    features_path = Path(opts.get("features", required=True))
    report_path = Path(opts.get("report", required=True))
    predictions_path = opts.get("predictions")
    k = int(opts.get("folds", 10))
    if k < 2:
        raise UsageError("--folds must be >= 2")
    params = _forest_params(opts)
    seed = int(opts.get("seed", 0))

    dataset = _final_stage_rows(parse_features(features_path.read_bytes()))
    predictions, report = cross_validate(dataset, k, params, seed)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"
    )
    if predictions_path is not None:
        Path(predictions_path).write_bytes(serialize_predictions(predictions, dataset))
    m = report.metrics
    _log(
        f"cross-validated {len(dataset)} tickets over {k} folds: "
        f"recall={m.recall} precision={m.precision} summarization={m.summarization}"
    )
    return 0


def _cmd_timeline(opts: _Options) -> int:
    in_dir = Path(opts.get("in_dir", required=True))
    model_path = Path(opts.get("model", required=True))
    pmr_id = opts.get("pmr", required=True)
    out = Path(opts.get("out", required=True))
    window_months = int(opts.get("window_months", 6))

    model = load_model(model_path.read_bytes())
    pmrs, _, _, _ = _assemble(in_dir)
    by_id = {p.pmr_id: p for p in pmrs}
    if pmr_id not in by_id:
        raise UsageError(f"pmr {pmr_id} not found in {in_dir}")
    index = build_customer_index(pmrs, window_months)
    points = er_timeline(model, by_id[pmr_id], index, window_months)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(serialize_timeline(pmr_id, points))
    _log(f"timeline for {pmr_id}: {len(points)} stages -> {out} (scored with {model_path})")
    return 0


def _cmd_serve(opts: _Options) -> int:
    from .service import run_server

    run_server(
        data_dir=Path(opts.get("in_dir", required=True)),
        model_path=Path(opts.get("model", required=True)),
        state_path=Path(opts.get("state", required=True)),
        port=int(opts.get("port", 8571)),
        rescore_minutes=int(opts.get("rescore_minutes", 15)),
        window_months=int(opts.get("window_months", 6)),
    )
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "timeline": _cmd_timeline,
    "serve": _cmd_serve,
}


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        opts = _Options(args)
        return _COMMANDS[args.command](opts)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return 1
    except DATA_ERRORS as exc:
        _log(f"data error: {exc}")
        return 2
    except ValueError as exc:
        _log(f"data error: {exc}")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
