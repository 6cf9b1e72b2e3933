"""Command-line interface: generate, fit, predict, evaluate, and sweep.

Exit codes: 0 on success, 1 on runtime or data failures, 2 on usage errors.
All randomness is controlled by --seed (default 0); nothing reads the clock.

Model files are versioned JSON. Floats round-trip exactly through Python's
shortest-repr serialization, so write -> read -> write is byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from .data import CsvSchemaError, Dataset, SensitiveMode, SynthConfig
from .hsic import hsic_linear
from .kernels import CenteringStats, KernelFamily, KernelSpec, median_heuristic
from .regressors import (
    CkrModel,
    ClrModel,
    FitProblem,
    ModelKind,
    SingularSystemError,
    fit_ckr,
    fit_clr,
    predict_ckr,
    predict_clr,
)
from .selection import (
    DEFAULT_LAMBDA_GRID,
    DEFAULT_MU_GRID,
    MEDIAN_SENTINEL,
    CvConfig,
    rmse,
    sweep_mu,
)

MODEL_FORMAT_VERSION = 1


class UsageError(ValueError):
    """Flag combination or value the parser grammar cannot catch."""


def _dataset_hash(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _kernel_to_json(spec: KernelSpec | None) -> dict | None:
    if spec is None:
        return None
    return {
        "family": spec.family.value,
        "bandwidth": spec.bandwidth,
        "degree": spec.degree,
        "offset": spec.offset,
    }


def _kernel_from_json(obj: dict | None) -> KernelSpec | None:
    if obj is None:
        return None
    return KernelSpec(
        family=KernelFamily(obj["family"]),
        bandwidth=float(obj["bandwidth"]),
        degree=int(obj["degree"]),
        offset=float(obj["offset"]),
    )


def write_model(
    path: str | Path,
    model: ClrModel | CkrModel,
    seed: int,
    dataset_hash: str,
) -> None:
    """Serialize a fitted model as versioned, human-readable JSON."""
    payload: dict = {"format_version": MODEL_FORMAT_VERSION}
    if isinstance(model, ClrModel):
        payload.update(
            {
                "model_kind": ModelKind.CLR.value,
                "lambda": model.lam,
                "mu": model.mu,
                "kernel_x": None,
                "kernel_s": None,
                "x_means": model.x_stats.column_means.tolist(),
                "s_means": model.s_stats.column_means.tolist(),
                "y_means": model.y_stats.column_means.tolist(),
                "n_train": model.y_stats.n_train,
                "weights": model.weights.tolist(),
            }
        )
    else:
        payload.update(
            {
                "model_kind": ModelKind.CKR.value,
                "lambda": model.lam,
                "mu": model.mu,
                "kernel_x": _kernel_to_json(model.kernel_x),
                "kernel_s": _kernel_to_json(model.kernel_s),
                "y_means": model.y_stats.column_means.tolist(),
                "n_train": model.y_stats.n_train,
                "dual": model.dual.tolist(),
                "x_train": model.x_train.tolist(),
            }
        )
    payload["metadata"] = {"seed": seed, "dataset_hash": dataset_hash}
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_model(path: str | Path) -> ClrModel | CkrModel:
    """Load a model file, rebuilding the training Gram matrix for kernel models."""
    with Path(path).open("r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"unsupported model file version {version!r}, "
            f"expected {MODEL_FORMAT_VERSION}"
        )
    kind = ModelKind(payload["model_kind"])
    n_train = int(payload["n_train"])
    y_stats = CenteringStats(
        column_means=np.asarray(payload["y_means"], dtype=float), n_train=n_train
    )
    if kind is ModelKind.CLR:
        return ClrModel(
            weights=np.asarray(payload["weights"], dtype=float),
            x_stats=CenteringStats(
                column_means=np.asarray(payload["x_means"], dtype=float),
                n_train=n_train,
            ),
            s_stats=CenteringStats(
                column_means=np.asarray(payload["s_means"], dtype=float),
                n_train=n_train,
            ),
            y_stats=y_stats,
            lam=float(payload["lambda"]),
            mu=float(payload["mu"]),
        )
    from .kernels import build_gram

    x_train = np.asarray(payload["x_train"], dtype=float)
    kernel_x = _kernel_from_json(payload["kernel_x"])
    return CkrModel(
        dual=np.asarray(payload["dual"], dtype=float),
        x_train=x_train,
        kernel_x=kernel_x,
        kernel_s=_kernel_from_json(payload["kernel_s"]),
        k_raw_train=build_gram(x_train, kernel_x).k_raw,
        y_stats=y_stats,
        lam=float(payload["lambda"]),
        mu=float(payload["mu"]),
    )


def _fmt(v: float) -> str:
    return data_mod.format_value(float(v))


def _parse_grid(text: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise UsageError(f"{flag}: could not parse '{text}' as a comma-separated list")


def _parse_bandwidth_grid(text: str) -> list[float | str]:
    out: list[float | str] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == MEDIAN_SENTINEL:
            out.append(tok)
        else:
            try:
                out.append(float(tok))
            except ValueError:
                raise UsageError(
                    f"--bandwidth-grid: entry '{tok}' is neither a number nor 'median'"
                )
    return out


def _resolve_kernel_flags(
    family: str, bandwidth: str, degree: int, offset: float, x: np.ndarray
) -> KernelSpec:
    try:
        fam = KernelFamily(family)
    except ValueError:
        raise UsageError(f"unknown kernel family '{family}'")
    if bandwidth == MEDIAN_SENTINEL:
        bw = median_heuristic(x) if x.shape[0] >= 2 and x.shape[1] > 0 else 1.0
    else:
        try:
            bw = float(bandwidth)
        except ValueError:
            raise UsageError(f"--bandwidth: expected a number or 'median', got '{bandwidth}'")
    try:
        return KernelSpec(family=fam, bandwidth=bw, degree=degree, offset=offset)
    except ValueError as err:
        raise UsageError(str(err))


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        mode = SensitiveMode(args.mode)
        cfg = SynthConfig(
            n=args.n,
            d=args.d,
            q=args.q,
            noise_std=args.noise_std,
            sensitive_mode=mode,
            overlap=args.overlap,
            seed=args.seed,
        )
    except ValueError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    ds = data_mod.gen_synthetic(cfg)
    data_mod.save_csv(ds, args.out)
    print(f"n={ds.n} d={ds.d} q={ds.q} c={ds.c}")
    print(f"wrote {args.out}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    data_path = Path(args.data)
    ds = data_mod.load_csv(data_path)
    kind = ModelKind(args.model)
    problem = FitProblem(x=ds.x, s=ds.s, y=ds.y, lam=args.lam, mu=args.mu)
    if kind is ModelKind.CLR:
        model: ClrModel | CkrModel = fit_clr(problem)
        pred = predict_clr(model, ds.x)
    else:
        kernel_x = _resolve_kernel_flags(
            args.kernel, args.bandwidth, args.degree, args.offset, ds.x
        )
        kernel_s = _resolve_kernel_flags(
            args.kernel_s, args.bandwidth_s, args.degree, args.offset, ds.s
        )
        model = fit_ckr(problem, kernel_x, kernel_s)
        pred = predict_ckr(model, ds.x)
    write_model(args.out, model, seed=args.seed, dataset_hash=_dataset_hash(data_path))
    train_rmse = rmse(pred, ds.y)
    train_hsic = hsic_linear(pred, ds.s).value if ds.q > 0 else 0.0
    print(f"model_kind={kind.value}")
    print(f"n_train={ds.n}")
    print(f"rmse_train={_fmt(train_rmse)}")
    print(f"hsic_pred_s={_fmt(train_hsic)}")
    print(f"model_file={args.out}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = read_model(args.model)
    ds = data_mod.load_csv(args.data)
    if isinstance(model, ClrModel):
        pred = predict_clr(model, ds.x)
    else:
        pred = predict_ckr(model, ds.x)
    names = tuple(f"y_{j + 1}" for j in range(pred.shape[1]))
    with Path(args.out).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in pred:
            fh.write(",".join(data_mod.format_value(v) for v in row) + "\n")
    print(f"wrote {args.out} ({pred.shape[0]} rows)")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = read_model(args.model)
    ds = data_mod.load_csv(args.data)
    if isinstance(model, ClrModel):
        pred = predict_clr(model, ds.x)
    else:
        pred = predict_ckr(model, ds.x)
    if pred.shape[1] != ds.c:
        raise ValueError(
            f"model predicts {pred.shape[1]} targets but data has {ds.c}"
        )
    value = rmse(pred, ds.y)
    pred_hsic = hsic_linear(pred, ds.s).value if ds.q > 0 else 0.0
    print(f"n_test={ds.n}")
    print(f"rmse={_fmt(value)}")
    print(f"hsic_pred_s={_fmt(pred_hsic)}")
    if ds.c > 1:
        for j, name in enumerate(ds.y_names):
            print(f"rmse_{name}={_fmt(rmse(pred[:, [j]], ds.y[:, [j]]))}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    ds = data_mod.load_csv(args.data)
    kind = ModelKind(args.model)
    if args.test is not None:
        train, test = ds, data_mod.load_csv(args.test)
    else:
        train, test = data_mod.train_test_split(ds, args.test_fraction, args.seed)
    try:
        mu_grid = sorted(_parse_grid(args.mu_grid, "--mu-grid"))
        cfg = CvConfig(
            k_folds=args.folds,
            seed=args.seed,
            lambda_grid=_parse_grid(args.lambda_grid, "--lambda-grid"),
            bandwidth_grid=_parse_bandwidth_grid(args.bandwidth_grid),
        )
        kernel_base = _resolve_kernel_flags(
            args.kernel, MEDIAN_SENTINEL, args.degree, args.offset, train.x
        )
    except ValueError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    records = sweep_mu(train, test, mu_grid, cfg, kind, kernel_x_base=kernel_base)
    with Path(args.out).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("mu,lambda,bandwidth,rmse_train,rmse_test,hsic,penalty\n")
        for r in records:
            fields = (
                r.mu,
                r.lambda_selected,
                r.bandwidth_selected,
                r.rmse_train,
                r.rmse_test,
                r.hsic_pred_s,
                r.penalty_term,
            )
            fh.write(",".join(data_mod.format_value(v) for v in fields) + "\n")
    print(f"wrote {args.out} ({len(records)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consistreg",
        description="Consistent regression: accuracy vs independence from sensitive variables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--d", type=int, required=True)
    p_gen.add_argument("--q", type=int, required=True)
    p_gen.add_argument("--noise-std", type=float, default=0.1)
    p_gen.add_argument("--mode", choices=["subset", "mixed"], default="subset")
    p_gen.add_argument("--overlap", type=int, default=None)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_fit = sub.add_parser("fit", help="fit a model on a CSV and save it")
    p_fit.add_argument("--model", choices=["clr", "ckr"], required=True)
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_fit.add_argument("--mu", type=float, default=0.0)
    p_fit.add_argument("--kernel", choices=["linear", "rbf", "polynomial"], default="rbf")
    p_fit.add_argument("--bandwidth", default=MEDIAN_SENTINEL)
    p_fit.add_argument("--degree", type=int, default=2)
    p_fit.add_argument("--offset", type=float, default=0.0)
    p_fit.add_argument("--kernel-s", choices=["linear", "rbf", "polynomial"], default="rbf")
    p_fit.add_argument("--bandwidth-s", default=MEDIAN_SENTINEL)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="predict targets for a feature CSV")
    p_pred.add_argument("--model", required=True, help="model file from fit")
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--out", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="report RMSE and HSIC on a labeled CSV")
    p_eval.add_argument("--model", required=True, help="model file from fit")
    p_eval.add_argument("--data", required=True)
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="trade-off curve over a mu grid")
    p_sweep.add_argument("--model", choices=["clr", "ckr"], required=True)
    p_sweep.add_argument("--data", required=True)
    p_sweep.add_argument("--test", default=None, help="held-out CSV; default splits --data")
    p_sweep.add_argument("--test-fraction", type=float, default=0.3)
    p_sweep.add_argument(
        "--mu-grid",
        default=",".join(data_mod.format_value(v) for v in DEFAULT_MU_GRID),
    )
    p_sweep.add_argument(
        "--lambda-grid",
        default=",".join(data_mod.format_value(v) for v in DEFAULT_LAMBDA_GRID),
    )
    p_sweep.add_argument("--bandwidth-grid", default=MEDIAN_SENTINEL)
    p_sweep.add_argument("--kernel", choices=["linear", "rbf", "polynomial"], default="rbf")
    p_sweep.add_argument("--degree", type=int, default=2)
    p_sweep.add_argument("--offset", type=float, default=0.0)
    p_sweep.add_argument("--folds", type=int, default=5)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except (
        CsvSchemaError,
        SingularSystemError,
        ValueError,
        OSError,
        json.JSONDecodeError,
    ) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
