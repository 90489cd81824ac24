"""Command-line surface: filtering, synthesis, training, deraining,
evaluation, and the ablation harness.

Exit codes: 0 success, 2 validation error (bad config/arguments), 1 I/O
error (missing or unreadable files).
"""

from __future__ import annotations

import os
import sys

# --deterministic pins compute to one thread for bit-stable reductions;
# this must happen before numpy is first imported, so peek at argv here
# (the package __init__ translates DERAIN_THREADS into BLAS settings).
if "--deterministic" in sys.argv:
    os.environ.setdefault("DERAIN_THREADS", "1")

import functools

import click
import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    check_dataset_paths,
    default_toy_config,
    load_config,
)
from .filters import FilterParams, gif, iwgif, wgif  # noqa: F401 (CLI dispatch)
from .image import load_image, save_image
from .model import derain as run_derain
from .model import evaluate, load_model, save_model, train
from .rain import compose_rainy, load_pairs, synth_background, synth_streaks

def _run_algo(algo: str, img, g, params: FilterParams):
    if algo == "gif":
        return gif(img, g, params.zeta, params.lam)
    if algo == "wgif":
        return wgif(img, g, params.zeta, params.lam, params.epsilon)
    return iwgif(img, g, params)


_ALGOS = ("gif", "iwgif", "wgif")


def _guarded(fn):
    """Map exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FileNotFoundError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(1)
        except (ConfigError, ValueError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(2)
        except OSError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON run configuration (defaults to the built-in toy recipe).")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--deterministic", is_flag=True,
              help="Pin compute to one thread for bit-stable output.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
              help="Directory for all written artifacts.")
@click.pass_context
def main(ctx, config_path, seed, deterministic, out_dir):
    """Single-image deraining toolkit.

    Signed detail/streak layers are visualized in PNGs as 0.5 + value/2.
    """
    ctx.ensure_object(dict)
    ctx.obj.update(
        config_path=config_path, seed=seed, deterministic=deterministic, out=out_dir
    )


def _get_config(ctx) -> RunConfig:
    path = ctx.obj["config_path"]
    cfg = default_toy_config() if path is None else load_config(path)
    if ctx.obj["seed"] is not None:
        cfg.seed = ctx.obj["seed"]
    return cfg


def _out_dir(ctx) -> str:
    out = ctx.obj["out"]
    os.makedirs(out, exist_ok=True)
    return out


def _resolve(out: str, name: str) -> str:
    return name if os.path.isabs(name) else os.path.join(out, name)


def _load_input(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise FileNotFoundError(f"input image not found: {path}")
    return load_image(path)


@main.command("filter")
@click.argument("input_path", metavar="INPUT")
@click.option("--guidance", type=click.Path(), default=None,
              help="Guidance image (defaults to the input itself).")
@click.option("--algo", type=click.Choice(_ALGOS), default="iwgif")
@click.option("--zeta", type=int, default=None, help="Window half-size.")
@click.option("--lam", type=float, default=None, help="Ridge regularizer.")
@click.option("--epsilon", type=float, default=None, help="Edge-weight floor.")
@click.option("--eta", type=float, default=None, help="Aggregation temperature.")
@click.option("--output", default="filtered.png", help="Filtered PNG name.")
@click.option("--detail", default=None,
              help="Also write the signed detail layer, mapped as 0.5+detail/2.")
@click.pass_context
@_guarded
def cmd_filter(ctx, input_path, guidance, algo, zeta, lam, epsilon, eta, output, detail):
    """Smooth INPUT with a guided filter and write the base layer."""
    cfg = _get_config(ctx)
    overrides = {
        k: v
        for k, v in dict(zeta=zeta, lam=lam, epsilon=epsilon, eta=eta).items()
        if v is not None
    }
    params = FilterParams(**{**_params_dict(cfg.filter), **overrides})
    img = _load_input(input_path)
    g = _load_input(guidance) if guidance is not None else img
    base = _run_algo(algo, img, g, params)
    out = _out_dir(ctx)
    save_image(_resolve(out, output), base)
    if detail is not None:
        save_image(_resolve(out, detail), np.clip(0.5 + (img - base) / 2.0, 0.0, 1.0))


def _params_dict(p: FilterParams) -> dict:
    return {"zeta": p.zeta, "lam": p.lam, "epsilon": p.epsilon, "eta": p.eta}


@main.command("synth")
@click.pass_context
@_guarded
def cmd_synth(ctx):
    """Write a paired rainy/clean toy dataset under --out."""
    cfg = _get_config(ctx)
    out = _out_dir(ctx)
    rainy_dir = os.path.join(out, "rainy")
    clean_dir = os.path.join(out, "clean")
    os.makedirs(rainy_dir, exist_ok=True)
    os.makedirs(clean_dir, exist_ok=True)
    sy = cfg.synth
    for i in range(sy.pairs):
        base_seed = 2 * (cfg.seed * 100_000 + i)
        clean = synth_background(sy.width, sy.height, seed=base_seed)
        s = synth_streaks(sy.width, sy.height, cfg.streak_params(seed=base_seed + 1))
        name = f"pair_{i:03d}.png"
        save_image(os.path.join(clean_dir, name), clean)
        save_image(os.path.join(rainy_dir, name), compose_rainy(clean, s))
    click.echo(f"wrote {sy.pairs} pairs to {rainy_dir} and {clean_dir}")


@main.command("train")
@click.pass_context
@_guarded
def cmd_train(ctx):
    """Train a model on the configured dataset; write checkpoint + loss CSV."""
    cfg = _get_config(ctx)
    rainy, clean = check_dataset_paths(cfg)
    pairs = load_pairs(rainy, clean)
    out = _out_dir(ctx)
    pipeline = cfg.pipeline()
    model, trace = train(pairs, pipeline)
    save_model(os.path.join(out, "model.drkt"), model, pipeline)
    lines = ["step,lr,loss"]
    lines += [f"{s},{lr:.10g},{loss:.10g}" for s, lr, loss in trace]
    with open(os.path.join(out, "loss.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")
    last = f", final loss {trace[-1][2]:.6f}" if trace else ""
    click.echo(f"trained {len(trace)} steps{last}; wrote model.drkt and loss.csv")


@main.command("derain")
@click.argument("input_path", metavar="INPUT")
@click.option("--checkpoint", required=True, type=click.Path(),
              help="Model checkpoint (.drkt).")
@click.option("--output", default="restored.png", help="Restored PNG name.")
@click.pass_context
@_guarded
def cmd_derain(ctx, input_path, checkpoint, output):
    """Restore a single rainy image with a trained model."""
    img = _load_input(input_path)
    if not os.path.exists(checkpoint):
        raise FileNotFoundError(f"checkpoint not found: {checkpoint}")
    model, pipeline = load_model(checkpoint)
    out = _out_dir(ctx)
    save_image(_resolve(out, output), run_derain(img, model, pipeline))


@main.command("eval")
@click.option("--checkpoint", required=True, type=click.Path(),
              help="Model checkpoint (.drkt).")
@click.option("--output", default="metrics.csv", help="Metric report CSV name.")
@click.pass_context
@_guarded
def cmd_eval(ctx, checkpoint, output):
    """Evaluate a checkpoint on the configured dataset; write a metric CSV."""
    cfg = _get_config(ctx)
    rainy, clean = check_dataset_paths(cfg)
    pairs = load_pairs(rainy, clean)
    if not os.path.exists(checkpoint):
        raise FileNotFoundError(f"checkpoint not found: {checkpoint}")
    model, pipeline = load_model(checkpoint)
    report = evaluate(pairs, model, pipeline)
    out = _out_dir(ctx)
    with open(_resolve(out, output), "w") as f:
        f.write(report.to_csv())
    click.echo(
        f"mean psnr {report.mean_psnr_db:.4f} dB, mean ssim {report.mean_ssim:.4f}"
    )


_ABLATION_CASES = [
    # (label, use_iwgif, use_feature_net, use_derb)
    ("case1", False, True, True),
    ("case2", True, False, True),
    ("case3", True, True, False),
    ("case4", True, True, True),
]


@main.command("ablate")
@click.pass_context
@_guarded
def cmd_ablate(ctx):
    """Train/evaluate the four component-ablation cases; write a CSV."""
    cfg = _get_config(ctx)
    rainy, clean = check_dataset_paths(cfg)
    pairs = load_pairs(rainy, clean)
    out = _out_dir(ctx)
    rows = ["case,iwgif,feature_extract,derb,psnr_db,ssim"]
    for label, use_iwgif, use_feat, use_derb in _ABLATION_CASES:
        pipeline = cfg.pipeline()
        pipeline.use_iwgif = use_iwgif
        pipeline.use_feature_net = use_feat
        pipeline.use_derb = use_derb
        model, _ = train(pairs, pipeline)
        report = evaluate(pairs, model, pipeline)
        flags = ",".join("Y" if v else "N" for v in (use_iwgif, use_feat, use_derb))
        rows.append(
            f"{label},{flags},{report.mean_psnr_db:.6f},{report.mean_ssim:.6f}"
        )
        click.echo(rows[-1])
    with open(os.path.join(out, "ablation.csv"), "w") as f:
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
