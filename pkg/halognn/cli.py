"""Command line entry point: `halo-gnn {mesh,partition,train,verify,bench,report}`."""
import argparse
import json
import logging
import os
import sys
import typing
from contextlib import contextmanager

from halognn import errors
from halognn._utils.math import prioritize
from halognn.comm.collectives import parse_mode
from halognn.comm.runtime import RankRuntime
from halognn.gnn.config import PRESETS, GnnConfig, TrainConfig
from halognn.gnn.train import DistributedTrainer
from halognn.graph.io import save_graphs
from halognn.graph.pipeline import distribute
from halognn.graph.stats import halo_stats
from halognn.harness.consistency import FD_TOLERANCE, training_equivalence, verify_consistency, verify_gradients
from halognn.harness.data import prepare_graphs
from halognn.harness.report import (
    format_consistency_summary,
    format_parameter_report,
    parameter_report,
    render_csv,
    write_consistency_csv,
    write_equivalence_csv,
    write_scaling_csv,
)
from halognn.harness.scaling import ScalingConfig, weak_scaling
from halognn.mesh.box import MeshConfig, build_box_mesh
from halognn.mesh.io import load_mesh, save_mesh
from halognn.mesh.partition import partition_mesh
from halognn.nn.checkpoint import save_checkpoint

log = logging.getLogger(__name__)

RANKS_ENV = "HALO_GNN_RANKS"
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

Command = typing.Literal["mesh", "partition", "train", "verify", "bench", "report"]
ErrorType = typing.Literal["usage", "config", "verification", "runtime"]
_ERRORS: dict[ErrorType, tuple[typing.Type[Exception], ...]] = {
    "usage": (errors.UsageError,),
    "config": (
        errors.MeshError,
        errors.GraphError,
        errors.ModelConfigError,
        errors.ExchangeModeError,
        errors.CheckpointError,
        errors.SizeError,
    ),
    "verification": (errors.VerificationError, errors.DivergenceError),
    "runtime": (errors.HaloGnnError,),
}
_EXIT_CODES: dict[ErrorType, int] = {"usage": 2, "config": 2, "verification": 1, "runtime": 1}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> typing.NoReturn:
        self.print_usage(sys.stderr)
        raise errors.UsageError(message)


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from e


def _str_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _parser() -> _Parser:
    parser = _Parser(prog="halo-gnn", description="Consistent distributed GNN on simulated ranks.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    parser.add_argument("--config", help="JSON config file; flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mesh_flags(p: argparse.ArgumentParser):
        p.add_argument("--elements", type=int, help="elements per axis E")
        p.add_argument("--order", type=int, help="polynomial order p")

    def model_flags(p: argparse.ArgumentParser, multiple: bool = False):
        p.add_argument("--model", type=_str_list if multiple else str, help="small|large")
        p.add_argument("--mode", type=_str_list if multiple else str, help="none|a2a|na2a")
        p.add_argument("--norm", choices=("hidden", "output"), help="layer-norm placement in the MLPs")
        p.add_argument("--edge-features", choices=("full", "geometric"))
        p.add_argument("--seed", type=int)

    p = sub.add_parser("mesh", help="generate a box mesh")
    mesh_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--embed-positions", action="store_true")

    p = sub.add_parser("partition", help="partition a mesh and dump per-rank graphs")
    mesh_flags(p)
    p.add_argument("--mesh", help="mesh JSON (instead of --elements/--order)")
    p.add_argument("--ranks", type=int)
    p.add_argument("--strategy", choices=("slab", "block"))
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--format", choices=("binary", "json"), default="binary")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train on simulated ranks")
    mesh_flags(p)
    model_flags(p)
    p.add_argument("--ranks", type=int)
    p.add_argument("--strategy", choices=("slab", "block"))
    p.add_argument("--lr", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--trace", help="loss trace CSV")
    p.add_argument("--checkpoint", help="checkpoint written after training")
    p.add_argument("--comm-report", help="communication counters CSV")

    p = sub.add_parser("verify", help="check consistency against R=1")
    mesh_flags(p)
    model_flags(p)
    p.add_argument("--ranks", type=_int_list)
    p.add_argument("--strategy", choices=("slab", "block"))
    p.add_argument("--gradients", action="store_true", help="also compare gradients at the largest R")
    p.add_argument("--training", type=int, metavar="ITERATIONS", help="also compare training curves at the largest R")
    p.add_argument("--training-out", help="training-curve CSV")
    p.add_argument("--out", help="report CSV")

    p = sub.add_parser("bench", help="weak-scaling benchmark")
    model_flags(p, multiple=True)
    p.add_argument("--loading", type=int, help="local nodes per rank")
    p.add_argument("--ranks", type=_int_list)
    p.add_argument("--iterations", type=int)
    p.add_argument("--out", help="report CSV")

    p = sub.add_parser("report", help="render a report CSV or the parameter-count table")
    p.add_argument("csv", nargs="?")
    p.add_argument("--params", action="store_true")
    return parser


@contextmanager
def _error_handler(exit_code: list[int]):
    """Translate package errors into exit codes (first matching family wins)."""
    try:
        yield
    except errors.HaloGnnError as e:
        for error_type, families in _ERRORS.items():
            if isinstance(e, families):
                log.error(f"{type(e).__name__}: {e}")
                exit_code[0] = _EXIT_CODES[error_type]
                return
        raise


def _load_config(path: str | None) -> dict[str, typing.Any]:
    if path is None:
        return {}
    try:
        with open(path) as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise errors.UsageError(f"Cannot read config file {path}: {e}") from e
    if not isinstance(config, dict):
        raise errors.UsageError(f"Config file {path} must hold a JSON object")
    return config


def _env_ranks() -> list[int] | None:
    if (value := os.environ.get(RANKS_ENV)) is None:
        return None
    try:
        return _int_list(value)
    except argparse.ArgumentTypeError as e:
        raise errors.UsageError(f"Invalid {RANKS_ENV}={value!r}") from e


def _mesh_entry(config: dict) -> dict:
    """The config's 'mesh' entry as {elements, order}; a string entry names a mesh JSON file."""
    entry = config.get("mesh", {})
    if isinstance(entry, str):
        mesh = load_mesh(entry).config
        return {"elements": mesh.elements_per_axis, "order": mesh.poly_order}
    if not isinstance(entry, dict):
        raise errors.UsageError(f"Invalid config 'mesh' entry {entry!r}: expected an object or a mesh file path")
    return entry


def _mesh_config(args: argparse.Namespace, config: dict) -> MeshConfig:
    mesh = _mesh_entry(config)
    elements = prioritize(args.elements, mesh.get("elements"), config.get("elements"), default=None)
    order = prioritize(args.order, mesh.get("order"), config.get("order"), default=None)
    if elements is None or order is None:
        raise errors.UsageError("Mesh size required: --elements and --order (or a config 'mesh' entry)")
    return MeshConfig(elements_per_axis=elements, poly_order=order)


def _gnn_config(args: argparse.Namespace, config: dict, model=None, mode=None) -> GnnConfig:
    model = prioritize(model, config.get("model"), default="small")
    overrides = {
        "exchange_mode": parse_mode(prioritize(mode, config.get("mode"), default="na2a")),
        "norm_placement": prioritize(args.norm, config.get("norm"), default="hidden"),
        "edge_features": prioritize(args.edge_features, config.get("edge_features"), default="full"),
    }
    if isinstance(model, dict):
        return GnnConfig.from_kwargs(**{**model, **overrides})
    if model not in PRESETS:
        raise errors.UsageError(f"Invalid model {model!r}: expected one of {PRESETS} or a custom object in --config")
    return GnnConfig.preset(model, **overrides)


def _seed(args: argparse.Namespace, config: dict) -> int:
    return prioritize(getattr(args, "seed", None), config.get("seed"), default=0)


def _mesh(args: argparse.Namespace, config: dict) -> int:
    mesh = build_box_mesh(_mesh_config(args, config))
    save_mesh(mesh, args.out, embed_positions=args.embed_positions)
    return 0


def _partition(args: argparse.Namespace, config: dict) -> int:
    mesh = load_mesh(args.mesh) if args.mesh else build_box_mesh(_mesh_config(args, config))
    ranks = prioritize(args.ranks, config.get("ranks"), default=1)
    strategy = prioritize(args.strategy, config.get("strategy"), default="block")
    graphs = distribute(mesh, partition_mesh(mesh, ranks, strategy, axis=args.axis))
    save_graphs(graphs, args.out, args.format)
    print(halo_stats(graphs).format_table())
    return 0


def _train(args: argparse.Namespace, config: dict) -> int:
    mesh = _mesh_config(args, config)
    env = _env_ranks()
    ranks = prioritize(env[0] if env else None, args.ranks, config.get("ranks"), default=1)
    strategy = prioritize(args.strategy, config.get("strategy"), default="block")
    model = _gnn_config(args, config, args.model, args.mode)
    seed = _seed(args, config)
    train = TrainConfig(
        lr=prioritize(args.lr, config.get("lr"), default=1e-3),
        iterations=prioritize(args.iterations, config.get("iterations"), default=100),
        seed=seed,
    )
    runtime = RankRuntime(ranks)
    graphs = prepare_graphs(mesh, ranks, strategy, model.edge_features)
    trainer = DistributedTrainer(runtime, graphs, model, train)
    trace = trainer.run()
    log.info(f"seed={seed}: final loss {trace.losses[-1]:.12e} after {len(trace.rows)} iterations on {ranks} ranks")
    if args.trace:
        trace.to_csv(args.trace, seed=seed)
    if args.checkpoint:
        save_checkpoint(args.checkpoint, trainer.params, model.digest())
    if args.comm_report:
        runtime.report().to_csv(args.comm_report)
    return 0


def _verify(args: argparse.Namespace, config: dict) -> int:
    mesh = _mesh_config(args, config)
    ranks = prioritize(_env_ranks(), args.ranks, config.get("ranks"), default=[1, 2, 4, 8])
    if isinstance(ranks, int):
        ranks = [ranks]
    strategy = prioritize(args.strategy, config.get("strategy"), default="block")
    model = _gnn_config(args, config, args.model, args.mode)
    seed = _seed(args, config)

    report = verify_consistency(mesh, ranks, model, seed, strategy)
    consistent = model.with_mode(report.mode)
    R = max(ranks)
    if args.gradients:
        gradients = verify_gradients(mesh, R, consistent, seed, strategy)
        report.gradient_deviations[R] = gradients.max_deviation
        if gradients.fd_error > FD_TOLERANCE or not gradients.deterministic:
            raise errors.VerificationError(
                f"Gradient check failed at R={R}: fd error {gradients.fd_error:.2e}, deterministic={gradients.deterministic}"
            )
    if args.out:
        write_consistency_csv(report, args.out)
    print(format_consistency_summary(report))
    if not report.passed:
        raise errors.VerificationError("; ".join(report.failures()))

    if args.training:
        train = TrainConfig(lr=prioritize(config.get("lr"), default=1e-3), iterations=args.training, seed=seed)
        equivalence = training_equivalence(mesh, R, consistent, train, strategy)
        if args.training_out:
            write_equivalence_csv(equivalence, args.training_out, seed)
        worst = float(equivalence.consistent_deviation.max())
        print(f"training curves at R={R}: max deviation {worst:.3e} over {args.training} iterations")
        if not equivalence.passed:
            raise errors.VerificationError(f"Training curve at R={R} deviates from R=1 by {worst:.3e}")
    return 0


def _bench(args: argparse.Namespace, config: dict) -> int:
    ranks = prioritize(_env_ranks(), args.ranks, config.get("ranks"), default=[2, 4, 8])
    models = prioritize(args.model, config.get("model"), default=["small"])
    modes = prioritize(args.mode, config.get("mode"), default=["none", "a2a", "na2a"])
    scaling = ScalingConfig(
        loading=prioritize(args.loading, config.get("loading"), default=8192),
        ranks=tuple([ranks] if isinstance(ranks, int) else ranks),
        models=tuple([models] if isinstance(models, str) else models),
        modes=tuple(parse_mode(m) for m in ([modes] if isinstance(modes, str) else modes)),
        iterations=prioritize(args.iterations, config.get("iterations"), default=2),
        seed=_seed(args, config),
    )
    for model in scaling.models:
        if model not in PRESETS:
            raise errors.UsageError(f"Invalid model {model!r}: expected one of {PRESETS}")
    report = weak_scaling(scaling)
    if args.out:
        write_scaling_csv(report, args.out)
    for violation in report.byte_violations():
        raise errors.VerificationError(violation)
    return 0


def _report(args: argparse.Namespace, config: dict) -> int:
    if args.params:
        print(format_parameter_report(parameter_report()))
    if args.csv:
        try:
            print(render_csv(args.csv))
        except OSError as e:
            raise errors.UsageError(f"Cannot read {args.csv}: {e}") from e
    if not (args.params or args.csv):
        raise errors.UsageError("Nothing to report: pass a CSV path or --params")
    return 0


_COMMANDS: dict[Command, typing.Callable[[argparse.Namespace, dict], int]] = {
    "mesh": _mesh,
    "partition": _partition,
    "train": _train,
    "verify": _verify,
    "bench": _bench,
    "report": _report,
}


def run(argv: typing.Sequence[str] | None = None) -> int:
    """Execute one subcommand; 0 on success, 1 on verification failure, 2 on usage or configuration errors."""
    exit_code = [0]
    with _error_handler(exit_code):
        args = _parser().parse_args(argv)
        level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
        logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
        exit_code[0] = _COMMANDS[args.command](args, _load_config(args.config))
    return exit_code[0]


def main() -> None:
    sys.exit(run())
