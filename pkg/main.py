import argparse
import os
import sys
from datetime import datetime

from dotenv import load_dotenv

from src.data.downloader import MnistDownloader
from src.data.mnist import load_mnist_split
from src.data.synthetic import export_dataset_csv, gen_diamond2d
from src.db.db_manager import DBManager
from src.error_handling.error_handling import FuseLabException
from src.harness.confidence import run_confidence_study
from src.harness.demo2d import demo_summary, run_demo2d
from src.harness.experiment import ExperimentConfig, ExperimentRunner
from src.harness.results_writer import (TrialExporter, read_records_csv, write_demo_csv, write_records_csv,
                                       write_records_jsonl)
from src.harness.summary import format_table, summarize, write_summary_csv
from src.logging.logger import setup_logger
from src.nn.model import Activation
from src.util.config import Config


def parse_seeds(text):
    """'0-49' or '1,4,7' or a mix of both."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        seeds.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    return seeds


def _default_output(name):
    os.makedirs(Config.RESULTS_DIR, exist_ok=True)
    return os.path.join(Config.RESULTS_DIR, f"{name}_{datetime.now().strftime('%Y%m%d_%H%M%S')}.csv")


def _open_db(args):
    return None if args.no_db else DBManager(args.db)


def cmd_demo2d(args, logger):
    db = _open_db(args)
    try:
        records = run_demo2d(parse_seeds(args.seeds), Activation(args.activation), db_manager=db)
    finally:
        if db:
            db.close()
    path = write_demo_csv(records, args.out or _default_output("demo2d"))
    stats = demo_summary(records)
    logger.info(f"{stats['seeds']} seeds: success {stats['success_rate']:.0%} fail {stats['fail_rate']:.0%} "
                f"neutral {stats['neutral']}; written to {path}")


def cmd_run(args, logger, alphas=None):
    cfg = ExperimentConfig.from_file(args.config)
    exporter = TrialExporter(args.export_dir) if args.export_dir else None
    runner = ExperimentRunner(db_manager=_open_db(args), data_dir=args.data_dir, trial_exporter=exporter)
    try:
        if alphas is None:
            records = runner.run_experiment(cfg)
        else:
            records = runner.run_alpha_sweep(cfg, alphas)
    finally:
        runner.close()
    path = write_records_csv(records, args.out or _default_output("sweep" if alphas else "results"))
    if args.jsonl:
        write_records_jsonl(records, args.jsonl)
    logger.info(f"{len(records)} records written to {path}")
    print(format_table(summarize(records)))


def cmd_sweep(args, logger):
    cmd_run(args, logger, alphas=[float(a) for a in args.alphas.split(",") if a.strip()])


def cmd_summarize(args, logger):
    rows = summarize(read_records_csv(args.input))
    print(format_table(rows))
    if args.out:
        write_summary_csv(rows, args.out)
        logger.info(f"Summary written to {args.out}")


def cmd_confidence(args, logger):
    train_set, test_set = load_mnist_split(args.data_dir)
    labels = [int(k) for k in args.labels.split(",")]
    report, _ = run_confidence_study(train_set, test_set, labels, depth=args.depth)
    print(f"in-label median max-logit:  {report.median_in:.3f} (log10 conf {report.median_in_log10:.3f})")
    print(f"out-label median max-logit: {report.median_out:.3f} (log10 conf {report.median_out_log10:.3f})")
    print(f"in-label accuracy: {report.in_label_accuracy:.2%}")


def cmd_fetch_mnist(args, logger):
    db = _open_db(args)
    try:
        paths = MnistDownloader(db=db, data_dir=args.data_dir).fetch_all(overwrite=args.overwrite)
    finally:
        if db:
            db.close()
    for key, path in paths.items():
        logger.info(f"{key}: {path}")


def cmd_export_demo_data(args, logger):
    os.makedirs(args.out_dir, exist_ok=True)
    for offset, side in enumerate(("left", "right")):
        train_set, test_set = gen_diamond2d(side, Config.DEMO_N_TRAIN, Config.DEMO_N_TEST, [args.seed, offset])
        export_dataset_csv(train_set, os.path.join(args.out_dir, f"{side}_train.csv"))
        export_dataset_csv(test_set, os.path.join(args.out_dir, f"{side}_test.csv"))
    logger.info(f"Demo data for seed {args.seed} exported to {args.out_dir}")


def build_parser():
    parser = argparse.ArgumentParser(prog="fuselab", description="One-shot fusion of independently trained MLPs")
    parser.add_argument("--db", default=Config.DB_PATH, help="DuckDB results store")
    parser.add_argument("--no-db", action="store_true", help="skip the results store")
    parser.add_argument("--data-dir", default=Config.DATA_DIR, help="MNIST IDX directory")
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo2d", help="concatenation demo on the 2D band data")
    demo.add_argument("--seeds", default="0-49")
    demo.add_argument("--activation", default=Activation.RELU.value, choices=[a.value for a in Activation])
    demo.add_argument("--out")
    demo.set_defaults(func=cmd_demo2d)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--jsonl")
    run.add_argument("--export-dir", help="write fused weights, disturbing matrices and routing counts per trial")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="hetero_dir alpha sweep")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--alphas", default=",".join(f"{a:g}" for a in Config.SWEEP_ALPHAS))
    sweep.add_argument("--out")
    sweep.add_argument("--jsonl")
    sweep.add_argument("--export-dir", help="write fused weights, disturbing matrices and routing counts per trial")
    sweep.set_defaults(func=cmd_sweep)

    summary = sub.add_parser("summarize", help="mean and std per setting and method")
    summary.add_argument("--in", dest="input", required=True)
    summary.add_argument("--out")
    summary.set_defaults(func=cmd_summarize)

    confidence = sub.add_parser("confidence", help="max-logit on seen vs unseen labels")
    confidence.add_argument("--labels", default=",".join(str(k) for k in Config.CONFIDENCE_LABELS))
    confidence.add_argument("--depth", type=int, default=1)
    confidence.set_defaults(func=cmd_confidence)

    fetch = sub.add_parser("fetch-mnist", help="download the MNIST IDX files")
    fetch.add_argument("--overwrite", action="store_true")
    fetch.set_defaults(func=cmd_fetch_mnist)

    export = sub.add_parser("export-demo-data", help="write the 2D demo data as CSV")
    export.add_argument("--seed", type=int, default=0)
    export.add_argument("--out-dir", default=os.path.join(Config.RESULTS_DIR, "demo_data"))
    export.set_defaults(func=cmd_export_demo_data)
    return parser


def main(argv=None):
    load_dotenv()
    args = build_parser().parse_args(argv)
    logger = setup_logger()
    try:
        args.func(args, logger)
    except FuseLabException as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
