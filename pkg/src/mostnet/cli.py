"""Command line interface: ``mostnet gen-data | train | infer | eval | gradcheck``."""
import argparse
import logging
import sys
from typing import List, Optional

from rich.console import Console
from rich.table import Table

from .data import gen_synthetic_pairs, save_dataset
from .diagnostics import GradCheckSuite
from .errors import MostNetError
from .evaluation import evaluate_dirs
from .losses import LossWeights
from .networks import GeneratorConfig
from .training import TrainConfig, infer, train_from_dir

LOGGER = logging.getLogger(__name__)


def _gen_data(args: argparse.Namespace, console: Console) -> int:
    dataset = gen_synthetic_pairs(args.n, args.size, args.seed)
    save_dataset(dataset, args.out)
    console.print(f"Wrote {len(dataset)} pairs to {args.out}")
    return 0


def config_from_args(args: argparse.Namespace) -> TrainConfig:
    defaults = LossWeights()
    weights = LossWeights(
        adversarial=defaults.adversarial if args.lambda1 is None else args.lambda1,
        reconstruction=defaults.reconstruction if args.lambda2 is None else args.lambda2,
        style=defaults.style if args.lambda3 is None else args.lambda3,
        content=defaults.content if args.lambda4 is None else args.lambda4,
        memory_refinement=defaults.memory_refinement if args.lambda5 is None else args.lambda5,
    )
    return TrainConfig(
        lr_g=args.lr_g,
        lr_d=args.lr_d,
        batch_size=args.batch,
        steps=args.steps,
        epochs=args.epochs,
        alpha=args.alpha,
        tau=args.tau,
        memory_size=args.k,
        seed=args.seed,
        mr_loss_enabled=not args.no_mr_loss,
        content_target=args.content_target,
        weights=weights,
        generator=GeneratorConfig(
            base_channels=args.base_channels,
            feature_channels=args.feature_channels,
            read_strategy=args.read_strategy,
        ),
        discriminator_channels=args.discriminator_channels,
        perceptual_weights=args.perceptual_weights,
        log_every=args.log_every,
        sample_every=args.sample_every,
        checkpoint_every=args.checkpoint_every,
    )


def _train(args: argparse.Namespace, console: Console) -> int:
    config = None if args.resume is not None else config_from_args(args)
    state = train_from_dir(config, args.data, args.out, checkpoint=args.resume)

    last = state.metrics[-1] if state.metrics else {}
    nan = float("nan")
    console.print(
        f"Finished at step {state.step}"
        f", reconstruction {last.get('reconstruction', nan):.4f}"
        f", hard MR {last.get('mr_hard', nan):.4f}"
    )
    return 0


def _infer(args: argparse.Namespace, console: Console) -> int:
    written = infer(args.checkpoint, args.photos, args.out)
    console.print(f"Wrote {len(written)} sketches to {args.out}")
    return 0


def _eval(args: argparse.Namespace, console: Console) -> int:
    report = evaluate_dirs(args.generated, args.reference)
    console.print(report.table())
    if args.csv is not None:
        report.to_csv(args.csv)
        console.print(f"Wrote {args.csv}")
    return 0


def _gradcheck(args: argparse.Namespace, console: Console) -> int:
    reports = GradCheckSuite().run(seed=args.seed, names=args.only or ())

    table = Table(title="Gradient checks", show_header=True, header_style="bold magenta")
    table.add_column("operation")
    table.add_column("result")
    table.add_column("max rel. error", justify="right")
    for name, report in reports.items():
        result = "[green]pass[/green]" if report else "[red]FAIL[/red]"
        table.add_row(name, result, f"{report.max_error:.2e}")
    console.print(table)

    for name, report in reports.items():
        for failure in report.failures:
            console.print(f"{name}: {failure}")

    return 0 if all(reports.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mostnet", description="Memory oriented photo to sketch translation."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="write synthetic photo/sketch pairs")
    gen.add_argument("--n", type=int, default=8)
    gen.add_argument("--size", type=int, default=64)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=_gen_data)

    defaults = TrainConfig()
    weights = LossWeights()
    tr = commands.add_parser("train", help="train on <data>/photos and <data>/sketches")
    tr.add_argument("--data", required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--resume", help="continue from a checkpoint, other flags are ignored")
    tr.add_argument("--steps", type=int, default=defaults.steps)
    tr.add_argument("--epochs", type=int, default=None)
    tr.add_argument("--batch", type=int, default=defaults.batch_size)
    tr.add_argument("--seed", type=int, default=defaults.seed)
    tr.add_argument("--k", type=int, default=defaults.memory_size, help="memory size")
    tr.add_argument("--alpha", type=float, default=defaults.alpha, help="memory decay rate")
    tr.add_argument("--tau", type=float, default=defaults.tau)
    tr.add_argument("--no-mr-loss", action="store_true")
    tr.add_argument("--content-target", choices=("photo", "sketch"), default="photo")
    tr.add_argument("--read-strategy", choices=("attentive", "nearest"), default="attentive")
    tr.add_argument("--base-channels", type=int, default=defaults.generator.base_channels)
    tr.add_argument(
        "--feature-channels",
        type=int,
        default=defaults.generator.feature_channels,
        help="slot and memory dimension",
    )
    tr.add_argument("--lr-g", type=float, default=defaults.lr_g)
    tr.add_argument("--lr-d", type=float, default=defaults.lr_d)
    for i, name in enumerate(
        ("adversarial", "reconstruction", "style", "content", "memory_refinement"), start=1
    ):
        tr.add_argument(
            f"--lambda{i}", type=float, default=None, help=f"default {getattr(weights, name)}"
        )
    tr.add_argument(
        "--discriminator-channels", type=int, default=defaults.discriminator_channels
    )
    tr.add_argument("--perceptual-weights")
    tr.add_argument("--log-every", type=int, default=defaults.log_every)
    tr.add_argument("--sample-every", type=int, default=defaults.sample_every)
    tr.add_argument("--checkpoint-every", type=int, default=defaults.checkpoint_every)
    tr.set_defaults(handler=_train)

    inf = commands.add_parser("infer", help="generate sketches from photos only")
    inf.add_argument("--checkpoint", required=True)
    inf.add_argument("--photos", required=True)
    inf.add_argument("--out", required=True)
    inf.set_defaults(handler=_infer)

    ev = commands.add_parser("eval", help="SSIM and L1 of generated against reference sketches")
    ev.add_argument("--generated", required=True)
    ev.add_argument("--reference", required=True)
    ev.add_argument("--csv")
    ev.set_defaults(handler=_eval)

    gc = commands.add_parser("gradcheck", help="finite-difference gradient checks")
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--only", nargs="*", choices=tuple(GradCheckSuite.checks))
    gc.set_defaults(handler=_gradcheck)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    console = Console()

    try:
        return args.handler(args, console)
    except MostNetError as error:
        print(f"mostnet: error: {error}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("mostnet: interrupted", file=sys.stderr)
        return 130
