import click
from pathlib import Path
import sys
from functools import wraps

from .exceptions import DataLoadError, PpfError
from .grid import bundled_case_path, load_case, parse_matpower
from .io.loader import load_json_model, read_text
from .io.writer import dumps_report, write_json_report
from .logging_config import get_logger, setup_logging
from .models.enums import Engine, Mode, Protocol
from .models.inputs import TrainConfig, UncertaintySpec


def handle_errors(func):
    # decorator to catch errors and show friendly messages
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except DataLoadError as e:
            click.echo(f"error loading file: {e}", err=True)
            sys.exit(1)
        except PpfError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(1)
        except Exception as e:
            click.echo(f"unexpected error: {e}", err=True)
            sys.exit(1)
    return wrapper


def logging_options(func):
    # --verbose / --quiet / --log on every command
    func = click.option("--log", is_flag=True, help="also log to <out>/logs/")(func)
    func = click.option("--quiet", "-q", is_flag=True, help="warnings and errors only")(func)
    func = click.option("--verbose", "-v", is_flag=True, help="show debug info")(func)
    return func


def _setup(verbose: bool, quiet: bool, log: bool, out=None, out_is_file: bool = False):
    log_dir = None
    if log:
        base = Path(out) if out else Path(".")
        if out and out_is_file:
            base = base.parent
        log_dir = base / "logs"
    command = click.get_current_context().info_name
    setup_logging(log_dir=log_dir, verbose=verbose, quiet=quiet, command=command)
    return get_logger("cli")


def _load_case(case: str):
    # a path, or the name of a bundled case such as case30
    path = Path(case)
    if path.exists():
        return load_case(path)
    bundled = bundled_case_path(case)
    if bundled.exists():
        return load_case(bundled)
    raise DataLoadError(case, "no such file or bundled case")


def _load_spec(spec, case, std_fraction=None) -> UncertaintySpec:
    if spec is None:
        return UncertaintySpec.from_case(case, std_fraction)
    return load_json_model(Path(spec), UncertaintySpec)


def _int_list(text: str):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}")


def _emit(report, out=None):
    # json to stdout, or to a file
    if out is None:
        click.echo(dumps_report(report), nl=False)
        return None
    path = Path(out)
    write_json_report(report, path)
    click.echo(f"report written to {path}", err=True)
    return path


@click.group()
@click.version_option(version="1.0.0", prog_name="ppf-dnn")
def cli():
    """
    dnn-accelerated probabilistic power flow

    builds training data with a newton-raphson solver, trains a feed-forward
    network on it, and runs monte-carlo ppf with either engine

    example: python -m ppf_dnn ppf --engine nr --case case30 --n 1000 --seed 7
    """
    pass


@cli.command("gen-data")
@click.option("--case", "-c", required=True, help="case json file or bundled case name")
@click.option("--spec", "-s", type=click.Path(exists=True), default=None,
              help="uncertainty spec json (default: normal loads from the case)")
@click.option("--std-fraction", type=float, default=None,
              help="load std as a fraction of the mean when --spec is omitted")
@click.option("--n", "n_samples", type=int, required=True, help="samples to draw")
@click.option("--seed", type=int, default=0)
@click.option("--split", default="10000,2000,10000",
              help="train,validation,test counts or fractions")
@click.option("--workers", type=int, default=1, help="solver threads")
@click.option("--warm-start", is_flag=True, help="start every solve from the base-case solution")
@click.option("--csv", "with_csv", is_flag=True, help="also export denormalized csv")
@click.option("--out", "-o", type=click.Path(), required=True, help="dataset directory")
@logging_options
@handle_errors
def gen_data(case, spec, std_fraction, n_samples, seed, split, workers, warm_start, with_csv, out,
             verbose, quiet, log):
    """draw samples, solve them and save a normalized dataset"""
    from .sampling import build_dataset, export_dataset_csv, save_dataset

    logger = _setup(verbose, quiet, log, out)
    net = _load_case(case)
    unc = _load_spec(spec, net, std_fraction)
    try:
        parts = [float(s) for s in split.split(",")]
    except ValueError:
        raise click.BadParameter(f"bad split {split!r}")

    dataset = build_dataset(net, unc, n_samples, seed, split=parts, workers=workers, warm_start=warm_start)
    save_dataset(dataset, Path(out))
    if with_csv:
        export_dataset_csv(dataset, Path(out))
    logger.info(f"dataset written to {out}")
    _emit(dataset.manifest())


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="training config json (TrainConfig fields)")
@click.option("--data", "-d", type=click.Path(exists=True), required=True, help="dataset directory")
@click.option("--case", "-c", required=True, help="case json file or bundled case name")
@click.option("--mode", "-m", type=click.Choice([m.value for m in Mode]), default=None,
              help="overrides the config's mode")
@click.option("--seed", type=int, default=None, help="overrides the config's seed")
@click.option("--hidden", default="100,100,100", help="hidden layer widths")
@click.option("--out", "-o", type=click.Path(), required=True, help="model file (.gfn)")
@click.option("--history", type=click.Path(), default=None, help="epoch history csv")
@logging_options
@handle_errors
def train(config_path, data, case, mode, seed, hidden, out, history, verbose, quiet, log):
    """train a network on a saved dataset"""
    from .nn import save_model
    from .sampling import load_dataset
    from .training.trainer import train as run_training, write_history_csv

    _setup(verbose, quiet, log, out, out_is_file=True)
    cfg = load_json_model(Path(config_path), TrainConfig) if config_path else TrainConfig()
    update = {}
    if mode is not None:
        update["mode"] = Mode(mode)
    if seed is not None:
        update["seed"] = seed
    if update:
        cfg = TrainConfig.model_validate({**cfg.model_dump(), **update})

    net = _load_case(case)
    dataset = load_dataset(Path(data))
    model, hist = run_training(cfg, dataset, net, hidden=_int_list(hidden))
    save_model(model, Path(out))
    if history:
        write_history_csv(hist, Path(history))

    click.echo(f"model written to {out}", err=True)
    _emit(hist)


@cli.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--data", "-d", type=click.Path(exists=True), required=True, help="dataset directory")
@click.option("--case", "-c", default=None, help="case (default: the one named in the model file)")
@click.option("--split", type=click.Choice(["train", "validation", "test"]), default="test")
@click.option("--out", "-o", type=click.Path(), default=None, help="metrics json file")
@logging_options
@handle_errors
def evaluate(model_path, data, case, split, out, verbose, quiet, log):
    """accuracy indexes of a trained model on a dataset split"""
    from .nn import load_model
    from .pipeline.metrics import evaluate_indexes
    from .sampling import load_dataset

    _setup(verbose, quiet, log, out, out_is_file=True)
    model = load_model(Path(model_path))
    case = case or model.case_name
    if case is None:
        raise click.UsageError("model file names no case; pass --case")
    net = _load_case(case)
    dataset = load_dataset(Path(data))

    report = evaluate_indexes(model, dataset, net, split=split)
    _emit(report, out)


@cli.command()
@click.option("--engine", "-e", type=click.Choice([e.value for e in Engine]), required=True)
@click.option("--case", "-c", required=True, help="case json file or bundled case name")
@click.option("--spec", "-s", type=click.Path(exists=True), default=None)
@click.option("--model", "model_path", type=click.Path(exists=True), default=None,
              help="trained model (dnn engine)")
@click.option("--n", "n_samples", type=int, default=10000)
@click.option("--seed", type=int, default=0)
@click.option("--workers", type=int, default=1, help="solver threads (nr engine)")
@click.option("--bins", default=None, help="histogram bins: a count or a numpy rule (default fd)")
@click.option("--against-nr", is_flag=True, help="dnn engine: also run nr and report deltas")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "markdown"]), default="json")
@click.option("--out", "-o", type=click.Path(), default=None, help="report directory")
@logging_options
@handle_errors
def ppf(engine, case, spec, model_path, n_samples, seed, workers, bins, against_nr, fmt, out,
        verbose, quiet, log):
    """monte-carlo probabilistic power flow"""
    from .explainability.ppf_view import generate_ppf_view
    from .nn import load_model
    from .pipeline.ppf import DnnEvaluator, SolverEvaluator, compare_statistics, run_ppf
    from .pipeline.report import build_report, export_report

    _setup(verbose, quiet, log, out)
    net = _load_case(case)
    unc = _load_spec(spec, net)
    if bins is not None and bins.isdigit():
        bins = int(bins)

    if Engine(engine) == Engine.DNN:
        if model_path is None:
            raise click.UsageError("--engine dnn needs --model")
        evaluator = DnnEvaluator(load_model(Path(model_path)))
    else:
        evaluator = SolverEvaluator(workers=workers)

    stats, timing = run_ppf(evaluator, net, unc, n_samples, seed, bins=bins)
    if against_nr and evaluator.engine == Engine.DNN:
        reference, _ = run_ppf(SolverEvaluator(workers=workers), net, unc, n_samples, seed, bins=bins)
        stats = compare_statistics(stats, reference)

    report = build_report(stats, timing, case=net.name, seed=seed)
    if out is not None:
        export_report(report, Path(out))
        click.echo(f"report written to {out}", err=True)
    elif fmt == "markdown":
        click.echo(generate_ppf_view(report))
    else:
        _emit(report)


@cli.command()
@click.option("--modes", default="M1,M4,M5,M6", help="comma-separated modes")
@click.option("--protocol", "-p", type=click.Choice([p.value for p in Protocol]),
              default=Protocol.FIXED_EPOCHS.value)
@click.option("--data", "-d", type=click.Path(exists=True), required=True)
@click.option("--case", "-c", required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--hidden", default="100,100,100", help="hidden layer widths")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "markdown"]), default="json")
@click.option("--out", "-o", type=click.Path(), default=None, help="output directory")
@logging_options
@handle_errors
def compare(modes, protocol, data, case, config_path, seed, hidden, fmt, out, verbose, quiet, log):
    """train several modes on the same data and compare their accuracy"""
    from .explainability.comparison_view import generate_comparison_view
    from .pipeline.compare import compare_methods, export_comparison
    from .sampling import load_dataset

    _setup(verbose, quiet, log, out)
    try:
        mode_list = [Mode(m.strip()) for m in modes.split(",") if m.strip()]
    except ValueError:
        raise click.BadParameter(f"unknown mode in {modes!r}")
    base = load_json_model(Path(config_path), TrainConfig) if config_path else TrainConfig()
    seed = base.seed if seed is None else seed

    net = _load_case(case)
    dataset = load_dataset(Path(data))
    report = compare_methods(
        mode_list, dataset, net, Protocol(protocol), base, seed, hidden=_int_list(hidden)
    )

    view = generate_comparison_view(report) if fmt == "markdown" else None
    if out is not None:
        export_comparison(report, Path(out))
        if view is not None:
            md_path = Path(out) / "comparison.md"
            with open(md_path, "w", encoding="utf-8") as f:
                f.write(view)
        click.echo(f"comparison written to {out}", err=True)
    elif view is not None:
        click.echo(view)
    else:
        _emit(report)

    if any(r.error for r in report.rows):
        sys.exit(1)


@cli.command()
@click.option("--case", "-c", required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--spec", "-s", type=click.Path(exists=True), default=None)
@click.option("--n", "n_samples", type=int, default=10000)
@click.option("--seed", type=int, default=0)
@click.option("--workers", type=int, default=1, help="also time nr with this many threads")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "markdown"]), default="json")
@click.option("--out", "-o", type=click.Path(), default=None, help="report json file")
@logging_options
@handle_errors
def bench(case, model_path, spec, n_samples, seed, workers, fmt, out, verbose, quiet, log):
    """evaluation speed of the network against the solver"""
    from .explainability.ppf_view import generate_bench_view
    from .nn import load_model
    from .pipeline.bench import bench as run_bench

    _setup(verbose, quiet, log, out, out_is_file=True)
    net = _load_case(case)
    unc = _load_spec(spec, net)
    report = run_bench(net, load_model(Path(model_path)), unc, n_samples, seed, workers)
    if fmt == "markdown" and out is None:
        click.echo(generate_bench_view(report))
    else:
        _emit(report, out)


@cli.command("convert-case")
@click.option("--matpower", "-m", type=click.Path(exists=True), required=True, help=".m case file")
@click.option("--out", "-o", type=click.Path(), required=True, help="case json file")
@logging_options
@handle_errors
def convert_case(matpower, out, verbose, quiet, log):
    """convert a matpower case to the case json format"""
    _setup(verbose, quiet, log, out, out_is_file=True)
    path = Path(matpower)
    doc = parse_matpower(read_text(path), name=path.stem)
    write_json_report(doc.model_dump(mode="json", by_alias=True), Path(out))
    # parse it back so a broken network fails here, not at gen-data
    _load_case(out)
    click.echo(f"{len(doc.buses)} buses, {len(doc.branches)} branches, {len(doc.gens)} generators")
    click.echo(f"case written to {out}")


if __name__ == "__main__":
    cli()
