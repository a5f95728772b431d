"""Command-line front end: ``synth``, ``fit``, ``predict``, ``cv``, ``theory``.

Settings come from built-in defaults, then an optional flat JSON ``--config``
file, then command-line flags (highest precedence). Exit status is 0 on
success, 1 for input or parse errors and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .data import GENERATORS, Dataset, franke_vec, load_csv, read_points_csv, save_csv, synth, train_test_split, write_csv
from .errors import InputError, StabilityError
from .geometry import geometry_report
from .greedy import TRACE_COLUMNS, GreedyConfig, run
from .kernels import Kernel
from .model import Surrogate, fit, metrics, predict
from .theory import study, uniform_grid
from .validation import CV_TABLE_COLUMNS, SearchConfig, SearchMode, two_step_search

log = logging.getLogger("stabvkoga")

EXIT_INPUT = 1
EXIT_NUMERIC = 2

RUN_DEFAULTS = {
    "kernel": "linmatern",
    "eps": 1.0,
    "criterion": "f",
    "gamma": 0.0,
    "lambda": 0.0,
    "tau_f": 1e-7,
    "tau_p": 1e-3,
    "max_points": None,
    "seed": 0,
    "split": 1.0,
}
SEARCH_KEYS = ("k_folds", "eps_grid", "gamma_grid", "lambda_grid")
DATA_KEYS = ("data", "synth", "n", "d", "q")
# theory runs P-greedy (gamma = 1) on the grid unless told otherwise
THEORY_DEFAULTS = {"criterion": "p", "gamma": 1.0}
THEORY_KEYS = ("grid", "dim", "n_min", "n_max", "smoothness")
KNOWN_KEYS = set(RUN_DEFAULTS) | set(SEARCH_KEYS) | set(DATA_KEYS) | set(THEORY_KEYS) | {"model", "generator"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _clean(obj):
    """Make ``obj`` strict-JSON safe: numpy scalars to Python, non-finite to None."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


class Outputs:
    """Tracks files written by a command so a failure can remove them."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.written = []

    def path(self, name):
        self.dir.mkdir(parents=True, exist_ok=True)
        p = self.dir / name
        self.written.append(p)
        return p

    def json(self, name, doc):
        text = json.dumps(_clean(doc), indent=2, allow_nan=False)
        self.path(name).write_text(text + "\n")

    def csv(self, name, columns, rows):
        write_csv(self.path(name), columns, rows)

    def discard(self):
        for p in self.written:
            p.unlink(missing_ok=True)


@contextmanager
def _outputs(out_dir):
    outs = Outputs(out_dir)
    try:
        yield outs
    except BaseException:
        outs.discard()
        raise


def _load_config(path):
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("config file must hold a flat JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise InputError(f"unknown config field(s): {', '.join(unknown)}")
    return doc


def _settings(args, defaults=None):
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    cfg = dict(RUN_DEFAULTS)
    cfg.update(defaults or {})
    cfg.update(_load_config(args.config))
    for key, val in vars(args).items():
        if key in ("config", "command", "func", "defaults", "verbose", "out", "name") or val is None:
            continue
        cfg[key] = val
    return cfg


def _dataset(cfg) -> Dataset:
    if cfg.get("data") and cfg.get("synth"):
        raise InputError("give either --data or --synth, not both")
    if cfg.get("data"):
        return load_csv(cfg["data"])
    if cfg.get("synth"):
        return synth(cfg["synth"], int(cfg.get("n", 300)), int(cfg.get("d", 3)), int(cfg.get("q", 3)), int(cfg["seed"]))
    raise InputError("no data: give --data <csv> or --synth <generator>")


def _split(data, cfg):
    tr, te = train_test_split(len(data), float(cfg["split"]), int(cfg["seed"]))
    return data.subset(tr), (data.subset(te) if len(te) else None)


def _greedy_config(cfg) -> GreedyConfig:
    return GreedyConfig(cfg["criterion"], cfg["gamma"], cfg["tau_f"], cfg["tau_p"], cfg["max_points"])


def cmd_synth(args, cfg):
    data = synth(cfg.get("generator") or "franke-vec", int(cfg.get("n", 300)), int(cfg.get("d", 3)),
                 int(cfg.get("q", 3)), int(cfg["seed"]))
    with _outputs(args.out) as out:
        path = out.path(args.name)
        save_csv(data, path)
    print(f"wrote {len(data)} points (d={data.dim_in}, q={data.dim_out}) to {path}")


def cmd_fit(args, cfg):
    data = _dataset(cfg)
    train, test = _split(data, cfg)
    kernel = Kernel(cfg["kernel"], cfg["eps"])
    gconf = _greedy_config(cfg)
    res = run(kernel, train, gconf)
    model = fit(kernel, train, res.selected, cfg["lambda"])
    report = {
        "n_centers": model.n_centers,
        "stop_reason": res.stop_reason.value,
        "train": metrics(model, train).to_dict(),
        "test": metrics(model, test).to_dict() if test is not None else None,
        "geometry": (geometry_report(kernel, model.centers, train.X).to_dict() if model.n_centers else None),
    }
    with _outputs(args.out) as out:
        out.json("model.json", model.to_dict())
        out.csv("trace.csv", TRACE_COLUMNS,
                [[r.iteration, r.chosen_index, r.power_at_chosen, r.max_residual_norm, r.rmse] for r in res.trace])
        out.json("metrics.json", report)
    print(f"selected {model.n_centers} of {len(train)} points ({res.stop_reason.value}); "
          f"train E_RMSE={report['train']['e_rmse']:.6g}")
    if report["test"] is not None:
        print(f"test E_RMSE={report['test']['e_rmse']:.6g}")


def cmd_predict(args, cfg):
    if not cfg.get("model"):
        raise InputError("predict needs --model <model.json>")
    try:
        doc = json.loads(Path(cfg["model"]).read_text())
    except OSError as exc:
        raise InputError(f"cannot read model {cfg['model']}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"model file is not valid JSON: {exc}") from None
    model = Surrogate.from_dict(doc)
    if not cfg.get("data"):
        raise InputError("predict needs --data <csv> with x0..x{d-1} columns")
    X, Y = read_points_csv(cfg["data"], require_y=False)
    pred = predict(model, X)
    cols = [f"x{i}" for i in range(X.shape[1])] + [f"y{i}" for i in range(pred.shape[1])]
    with _outputs(args.out) as out:
        out.csv("predictions.csv", cols, np.hstack([X, pred]).tolist())
    print(f"predicted {X.shape[0]} points")
    if Y is not None and Y.shape == pred.shape:
        print("E_RMSE against given outputs: %.6g" % metrics(model, Dataset(X, Y)).e_rmse)


def _search_config(cfg) -> SearchConfig:
    kwargs = {k: cfg[k] for k in SEARCH_KEYS if k in cfg}
    return SearchConfig(criterion=cfg["criterion"], kernel=cfg["kernel"], seed=int(cfg["seed"]),
                        tau_f=cfg["tau_f"], tau_p=cfg["tau_p"], max_points=cfg["max_points"], **kwargs)


def cmd_cv(args, cfg):
    data = _dataset(cfg)
    train, test = _split(data, cfg)
    sconf = _search_config(cfg)
    base = two_step_search(train, sconf, SearchMode.BASE)
    stab = two_step_search(train, sconf, SearchMode.STABILIZED, eps_override=base.best_eps)
    doc = {"criterion": sconf.criterion.value, "kernel": sconf.kernel.value, "k_folds": sconf.k_folds,
           "seed": sconf.seed, "base": base.to_dict(), "stabilized": stab.to_dict()}
    if test is not None:
        doc["base"]["test_metrics"] = metrics(base.final_model, test).to_dict()
        doc["stabilized"]["test_metrics"] = metrics(stab.final_model, test).to_dict()
    rows = [[r.step, r.param_name, r.param_value, r.fold, r.e_rmse, r.n_selected]
            for r in base.cv_table + stab.cv_table]
    with _outputs(args.out) as out:
        out.json("search_result.json", doc)
        out.csv("cv_table.csv", CV_TABLE_COLUMNS, rows)
    for r in (base, stab):
        print(f"{r.mode.value:>10}: eps={r.best_eps:.4g} gamma={r.best_gamma:g} "
              f"lambda={r.best_lambda:.3g} n={r.n_selected_final}")


def cmd_theory(args, cfg):
    dim = int(cfg.get("dim", 2))
    X = uniform_grid(int(cfg.get("grid", 40)), dim)
    kernel = Kernel(cfg["kernel"], cfg["eps"])
    criterion = cfg["criterion"]
    Y = franke_vec(X, 3) if criterion != "p" else None
    report = study(kernel, X, int(cfg.get("n_min", 20)), int(cfg.get("n_max", 200)), criterion, cfg["gamma"], Y,
                   tau_p=cfg["tau_p"], smoothness=cfg.get("smoothness"))
    with _outputs(args.out) as out:
        out.json("theory_report.json", report.to_dict())
    print(f"power slope {report.power_slope}, lambda_min slope {report.lambda_slope}, max rho {report.rho_max}")
    if report.expected_power_slope is not None:
        print(f"predicted: power {report.expected_power_slope:g}, lambda_min {report.expected_lambda_slope:g}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file with setting names as keys")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--kernel", choices=["gaussian", "linmatern"])
    common.add_argument("--eps", type=float, help="kernel shape parameter")
    common.add_argument("--criterion", choices=["f", "p", "fp"])
    common.add_argument("--gamma", type=float, help="restriction parameter in [0, 1]")
    common.add_argument("--lambda", dest="lambda", type=float, help="ridge regularization")
    common.add_argument("--tau-f", dest="tau_f", type=float, help="residual tolerance (default 1e-7)")
    common.add_argument("--tau-p", dest="tau_p", type=float, help="power-function tolerance (default 1e-3)")
    common.add_argument("--max-points", dest="max_points", type=int)
    common.add_argument("-v", "--verbose", action="count", default=0)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="CSV with x0.. and y0.. columns")
    data.add_argument("--synth", choices=GENERATORS, help="use a synthetic dataset instead of --data")
    data.add_argument("--n", type=int, help="synthetic sample size")
    data.add_argument("--d", type=int, help="synthetic input dimension")
    data.add_argument("--q", type=int, help="synthetic output dimension")
    data.add_argument("--split", type=float, help="training fraction in (0, 1]; the rest is the test set")

    p = _Parser(prog="stabvkoga", description="Stabilized vectorial greedy kernel approximation.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic dataset CSV")
    s.add_argument("--generator", choices=GENERATORS)
    s.add_argument("--n", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--q", type=int)
    s.add_argument("--name", default="data.csv", help="output file name inside --out")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("fit", parents=[common, data], help="greedy selection plus surrogate fit")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("predict", parents=[common], help="evaluate a saved model")
    s.add_argument("--model", help="model.json written by fit")
    s.add_argument("--data", help="CSV with x0..x{d-1} columns")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("cv", parents=[common, data], help="two-step cross-validation, base and stabilized")
    s.add_argument("--k-folds", dest="k_folds", type=int)
    s.set_defaults(func=cmd_cv)

    s = sub.add_parser("theory", parents=[common], help="empirical decay rates on a uniform grid")
    s.add_argument("--grid", type=int, help="points per axis (default 40)")
    s.add_argument("--dim", type=int, help="grid dimension (default 2)")
    s.add_argument("--n-min", dest="n_min", type=int)
    s.add_argument("--n-max", dest="n_max", type=int)
    s.add_argument("--smoothness", type=float, help="Sobolev order of the native space, for predicted slopes")
    s.set_defaults(func=cmd_theory, defaults=THEORY_DEFAULTS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _settings(args, getattr(args, "defaults", None))
        args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StabilityError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
