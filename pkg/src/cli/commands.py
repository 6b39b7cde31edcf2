import functools
import os
from pathlib import Path
from typing import Callable, List, Optional

import typer
from pydantic import ValidationError

from src.cli import output
from src.cli.schemas import RunConfig, parse_overrides
from src.config import get_settings, settings_override
from src.core import scaling
from src.core.errors import NumericalIntegrityError, SpecError
from src.core.lattice_model import build_separable, eta_chain_builder
from src.core.report_engine import ReportEngine
from src.core.spec_loader import SpecLoader
from src.core.spectral import classify as classify_spec
from src.kernels import Partition, as_partition, build_kernel, kernel_rows_table
from src.utils.logger import get_logger, set_level

logger = get_logger(__name__)

app = typer.Typer(
    help="Entanglement entropy and criticality of harmonic lattices.",
    no_args_is_help=True,
    add_completion=False,
)

EtaOption = typer.Option(None, "--eta", help="eta of the example chain (needs --n).")
NOption = typer.Option(None, "--n", help="Number of sites per axis.")
SpecOption = typer.Option(None, "--spec", help="JSON coupling document.")
OutOption = typer.Option(None, "--out", help="Output directory.")
SizesOption = typer.Option(None, "--sizes", help="Sizes as a:b[:step].")
OverrideOption = typer.Option(None, "--tol-override", help="name=value, repeatable.")

EXIT_SPEC = 2
EXIT_INTEGRITY = 3
EXIT_IO = 4


def handle_errors(func: Callable) -> Callable:
    """Maps the error hierarchy onto the exit-code contract."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (SpecError, ValidationError, ValueError) as e:
            logger.error(f"{func.__name__}: {e}")
            typer.echo(f"error: {e}", err=True)
            raise typer.Exit(code=EXIT_SPEC)
        except NumericalIntegrityError as e:
            logger.error(f"{func.__name__}: {e}")
            typer.echo(f"integrity failure: {e}", err=True)
            raise typer.Exit(code=EXIT_INTEGRITY)
        except OSError as e:
            logger.error(f"{func.__name__}: {e}")
            typer.echo(f"i/o error: {e}", err=True)
            raise typer.Exit(code=EXIT_IO)
    return wrapper


def _run(config: RunConfig, body: Callable[[RunConfig], None]) -> None:
    with settings_override(config.settings()):
        body(config)


@app.callback()
@handle_errors
def main(log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR.")):
    # --log-level, then HARM_ENT_LOG_LEVEL, then logging.level from settings
    set_level(log_level or os.getenv("HARM_ENT_LOG_LEVEL") or get_settings().logging.level)


@app.command()
@handle_errors
def classify(
    eta: Optional[float] = EtaOption,
    n: Optional[int] = NOption,
    spec: Optional[Path] = SpecOption,
    tol_override: Optional[List[str]] = OverrideOption,
):
    """Prints the spectral classification of a 1D spec as JSON."""
    config = RunConfig.build(command="classify", eta=eta, n=n, spec_path=spec,
                             tol_overrides=parse_overrides(tol_override))

    def body(cfg: RunConfig) -> None:
        typer.echo(classify_spec(cfg.spec()).model_dump_json())

    _run(config, body)


@app.command()
@handle_errors
def report(
    eta: Optional[float] = EtaOption,
    n: Optional[int] = NOption,
    spec: Optional[Path] = SpecOption,
    n1: Optional[int] = typer.Option(None, "--n1", help="Block size (default half/half)."),
    out: Optional[Path] = OutOption,
    tol_override: Optional[List[str]] = OverrideOption,
):
    """Entanglement report for one block: JSON on stdout; CSV, JSON and the coupling under --out."""
    config = RunConfig.build(command="report", eta=eta, n=n, spec_path=spec, n1=n1, out_dir=out,
                             tol_overrides=parse_overrides(tol_override))

    def body(cfg: RunConfig) -> None:
        coupling = cfg.spec()
        if cfg.n1 is not None:
            block = as_partition(cfg.n1, coupling.dimension)
        elif coupling.dimension == 1:
            block = Partition.half_half(coupling.n_sites)
        else:
            raise SpecError("--n1 is required for d > 1")
        result = ReportEngine().report(coupling, block)
        typer.echo(result.model_dump_json())
        if cfg.out_dir is not None:
            output.write_csv(cfg.out_dir / "report.csv", result.CSV_HEADER, [result.csv_row()], cfg.config_hash())
            output.write_text(cfg.out_dir / "report.json", output.json_text(result))
            SpecLoader.save(coupling, cfg.out_dir / "spec.json")

    _run(config, body)


@app.command()
@handle_errors
def fig1(
    eta: Optional[List[float]] = typer.Option(None, "--eta", help="eta values (repeatable)."),
    n: Optional[int] = NOption,
    sizes: Optional[str] = SizesOption,
    out: Path = typer.Option(Path("results/fig1"), "--out", help="Output directory."),
    tol_override: Optional[List[str]] = OverrideOption,
):
    """S against N1 at fixed N for several eta chains: CSV per eta, fits JSON and SVG."""
    defaults = get_settings().fig1
    etas = list(eta or defaults.etas)
    config = RunConfig.build(command="fig1", etas=etas, n=n or defaults.n, sizes=sizes or defaults.sizes,
                             out_dir=out, tol_overrides=parse_overrides(tol_override))

    def body(cfg: RunConfig) -> None:
        block_sizes = cfg.size_list(defaults.sizes)
        if block_sizes[-1] >= cfg.n:
            raise SpecError(f"block sizes reach {block_sizes[-1]} but N={cfg.n}")
        settings = get_settings()
        engine = ReportEngine(settings)
        curves, summary = {}, {}
        for value in cfg.etas:
            label = f"eta={value:g}"
            builder = eta_chain_builder(value, settings.tolerances)
            reports = scaling.entropy_sweep(builder, block_sizes, scaling.PartitionRule.FIXED_N_VARY_BLOCK,
                                            n=cfg.n, engine=engine)
            output.write_csv(cfg.out_dir / f"fig1_eta{value:g}.csv", output.SWEEP_HEADER,
                             output.sweep_rows(f"fig1-{label}", label, reports), cfg.config_hash())
            curves[label] = [(r.block_size, r.entropy) for r in reports]
            summary[label] = _fig1_summary(reports, cfg.n, settings.scaling.fit_min_block, defaults.saturation_from)
        output.write_text(cfg.out_dir / "fig1_fits.json", output.json_text(summary))
        output.write_text(cfg.out_dir / "fig1.svg",
                          output.render_entropy_plot(curves, f"Entanglement entropy, N = {cfg.n}"))
        typer.echo(output.json_text(summary), nl=False)

    _run(config, body)


def _fig1_summary(reports, n: int, fit_from: int, saturation_from: int) -> dict:
    entropies = [r.entropy for r in reports]
    fit_points = [(r.block_size, r.entropy) for r in reports if r.block_size >= fit_from]
    summary = {
        "strictly_increasing": all(b > a for a, b in zip(entropies, entropies[1:])),
        "saturation_spread": scaling.saturation_spread(reports, saturation_from),
    }
    if len(fit_points) >= 3:
        fit = scaling.fit_chord_growth([x for x, _ in fit_points], [y for _, y in fit_points], n)
        summary.update(log_slope=fit.slope, log_r_squared=fit.r_squared)
    return summary


@app.command()
@handle_errors
def widom(
    eta: Optional[float] = EtaOption,
    spec: Optional[Path] = SpecOption,
    sizes: Optional[str] = typer.Option(None, "--sizes", help="System sizes a:b[:step]; default doubles 65..2049."),
    no_snap: bool = typer.Option(False, "--no-snap", help="Keep requested sizes even near resonance."),
    out: Optional[Path] = OutOption,
    tol_override: Optional[List[str]] = OverrideOption,
):
    """Fits half/half mutual information against ln N."""
    config = RunConfig.build(command="widom", eta=eta, spec_path=spec,
                             sizes=sizes, out_dir=out, tol_overrides=parse_overrides(tol_override))

    def body(cfg: RunConfig) -> None:
        size_list = cfg.size_list(cfg.sizes) if cfg.sizes else [65, 129, 257, 513, 1025, 2049]
        fit = scaling.widom_slope(cfg.spec_builder(), size_list, snap=not no_snap)
        typer.echo(fit.model_dump_json())
        if cfg.out_dir is not None:
            output.write_text(cfg.out_dir / "widom.json", output.json_text(fit))

    _run(config, body)


@app.command()
@handle_errors
def szego(
    eta: Optional[float] = EtaOption,
    n: Optional[int] = NOption,
    spec: Optional[Path] = SpecOption,
    sizes: Optional[str] = typer.Option(None, "--sizes", help="Block sizes a:b[:step]."),
    out: Optional[Path] = OutOption,
    tol_override: Optional[List[str]] = OverrideOption,
):
    """ln det D - c0 N1 against N1: Szego plateau (Regular) or Widom slope (Singular)."""
    config = RunConfig.build(command="szego", eta=eta, n=n, spec_path=spec, sizes=sizes, out_dir=out,
                             tol_overrides=parse_overrides(tol_override))

    def body(cfg: RunConfig) -> None:
        coupling = cfg.spec()
        block_sizes = cfg.size_list("8:256:8")
        if classify_spec(coupling).is_regular:
            fit = scaling.szego_det_check(coupling, block_sizes)
        else:
            fit = scaling.widom_det_check(coupling, block_sizes)
        typer.echo(fit.model_dump_json())
        if cfg.out_dir is not None:
            output.write_text(cfg.out_dir / "szego.json", output.json_text(fit))

    _run(config, body)


@app.command("area-law")
@handle_errors
def area_law(
    eta: Optional[float] = EtaOption,
    n: Optional[int] = typer.Option(None, "--n", help="Torus side N (N x N)."),
    spec: Optional[Path] = SpecOption,
    sizes: Optional[str] = typer.Option(None, "--sizes", help="Block sides a:b[:step]."),
    mode: str = typer.Option("product", "--mode", help="Separable form for --eta: product or sum."),
    out: Optional[Path] = OutOption,
    tol_override: Optional[List[str]] = OverrideOption,
):
    """Entropy of square blocks on a 2D torus, per unit boundary."""
    config = RunConfig.build(command="area-law", eta=eta, n=n, spec_path=spec, sizes=sizes, out_dir=out,
                             tol_overrides=parse_overrides(tol_override))

    def body(cfg: RunConfig) -> None:
        if cfg.eta is not None:
            chain = cfg.spec()
            coupling = build_separable([chain, chain], mode)
        else:
            coupling = cfg.spec()
        rows = scaling.area_law_2d(coupling, cfg.size_list("4:12:2"))
        typer.echo(output.json_text(rows), nl=False)
        if cfg.out_dir is not None:
            output.write_csv(
                cfg.out_dir / "area_law.csv",
                ("n", "S", "S_per_4n", "boundary_excess", "excess_per_4n", "reference_available"),
                [(r.n, f"{r.entropy:.12g}", f"{r.entropy_per_boundary:.12g}", f"{r.boundary_excess:.12g}",
                  f"{r.excess_per_boundary:.12g}", r.reference_available) for r in rows],
                cfg.config_hash(),
            )

    _run(config, body)


@app.command("kernel-rows")
@handle_errors
def kernel_rows(
    eta: Optional[float] = EtaOption,
    n: Optional[int] = NOption,
    spec: Optional[Path] = SpecOption,
    out: Optional[Path] = OutOption,
    tol_override: Optional[List[str]] = OverrideOption,
):
    """First rows of V^{1/2} and V^{-1/2} as CSV."""
    config = RunConfig.build(command="kernel-rows", eta=eta, n=n, spec_path=spec, out_dir=out,
                             tol_overrides=parse_overrides(tol_override))

    def body(cfg: RunConfig) -> None:
        rows = [(k, f"{a:.17g}", f"{b:.17g}") for k, a, b in kernel_rows_table(build_kernel(cfg.spec()))]
        text = output.csv_text(output.KERNEL_ROWS_HEADER, rows, cfg.config_hash())
        if cfg.out_dir is not None:
            output.write_text(cfg.out_dir / "kernel_rows.csv", text)
        else:
            typer.echo(text, nl=False)

    _run(config, body)
