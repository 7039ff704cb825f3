import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Sequence

from pydantic import ValidationError

from app.commands import run_command
from app.container import AppContainer
from core.errors import ConfigError, PdmError
from core.verification.models import TOOL_VERSION, RunConfig

logger = logging.getLogger(__name__)

CONFIG_PATH = Path(__file__).with_name("config.yml")

EXIT_CODES = """exit codes:
  0  success (verify: every check passed)
  2  configuration error: unknown entry or profile, malformed flags or run-config file
  3  admissibility error: the entry's mu-window is not covered by the mass profile
  4  verification failure: at least one crosscheck failed
  5  numeric error: quadrature, eigensolver, singularity or normalizability failure
  6  parameter error: invalid kappa (coherent states need kappa != 0, +-1),
     catalog constraint violation, unsupported reduction
"""

GRID_FLAGS = ("xmin", "xmax", "n")


def create_app(container: AppContainer | None = None) -> AppContainer:
    if container is None:
        container = AppContainer()

        container.config.from_yaml(CONFIG_PATH)
        container.config.runtime.threads.from_env(
            "PDMCS_THREADS",
            default=container.config.runtime.threads() or 4,
            as_=int,
        )
        container.config.logging.level.from_env(
            "PDMCS_LOG_LEVEL",
            default=container.config.logging.level() or "WARNING",
        )

    return container


def _entry_flags(parser: argparse.ArgumentParser, entry_default: str | None = None) -> None:
    parser.add_argument("--entry", default=entry_default, help="catalog entry name")
    parser.add_argument("--kappa", type=float)
    for name in ("k0", "k1", "a", "b", "c", "d"):
        parser.add_argument(f"--{name}", type=float)


def _profile_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mass", help="bundled mass profile id (default: constant)")
    parser.add_argument("--mass-expr", help="mass profile m(x) as an expression in x")


def _grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--xmin", type=float)
    parser.add_argument("--xmax", type=float)
    parser.add_argument("--n", type=int, help="grid points, at least 64")


def _output_flags(parser: argparse.ArgumentParser, formats: bool = True) -> None:
    parser.add_argument("--output", help="write to this path instead of stdout")
    if formats:
        parser.add_argument("--format", choices=("json", "csv", "table"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdmcs",
        description="Factorization, coherent states and pseudo-Hermitian maps "
        "for position-dependent-mass Schrodinger operators",
        epilog=EXIT_CODES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    parser.add_argument("--config", help="JSON run-config file; explicit flags win")
    commands = parser.add_subparsers(dest="command", required=True)

    catalog = commands.add_parser("catalog", help="list the catalog of solvable systems")
    catalog.add_argument("action", choices=("list",))
    _output_flags(catalog)

    derive = commands.add_parser("derive", help="emit V, psi0, coherent state, F and mu samples")
    _entry_flags(derive)
    _profile_flags(derive)
    _grid_flags(derive)
    _output_flags(derive, formats=False)

    coherent = commands.add_parser("coherent", help="emit HCS and PHCS samples and the uncertainty report")
    _entry_flags(coherent)
    _profile_flags(coherent)
    _grid_flags(coherent)
    coherent.add_argument("--xi-im", type=float, help="imaginary part of xi")
    _output_flags(coherent, formats=False)

    spectrum = commands.add_parser("spectrum", help="lowest eigenvalues of the divergence-form operator")
    _entry_flags(spectrum)
    _profile_flags(spectrum)
    _grid_flags(spectrum)
    spectrum.add_argument("--k", type=int, help="number of eigenvalues (default 5)")
    _output_flags(spectrum)

    swanson = commands.add_parser("swanson", help="pseudo-Hermitian checks of a Swanson operator")
    swanson.add_argument("--alpha", type=float)
    swanson.add_argument("--beta", type=float)
    swanson.add_argument("--w-spec", help='superpotential class JSON, e.g. \'{"class": 1, "c": 1, "k0": 1}\'')
    swanson.add_argument("--phi0", type=float, nargs=2, metavar=("MU0", "PHI0"))
    swanson.add_argument("--k", type=int, help="number of eigenvalues (default 5)")
    _profile_flags(swanson)
    _grid_flags(swanson)
    _output_flags(swanson, formats=False)

    verify = commands.add_parser("verify", help="crosscheck catalog entries; exit 0 iff all pass")
    _entry_flags(verify, entry_default=None)
    _profile_flags(verify)
    verify.add_argument("--n", type=int, help="grid points, at least 64")
    _output_flags(verify)

    return parser


def _read_json(source: str, what: str) -> Dict[str, Any]:
    try:
        payload = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed {what}: {exc.msg}", position=exc.pos) from None
    if not isinstance(payload, dict):
        raise ConfigError(f"{what} must be a JSON object")
    return payload


def load_run_config(
    args: argparse.Namespace, defaults: Dict[str, Any] | None = None
) -> RunConfig:
    """Run config from ``defaults``, then the optional JSON file, then the explicit flags."""
    defaults = dict(defaults or {})
    payload: Dict[str, Any] = {}
    if args.config is not None:
        try:
            source = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read run-config file {args.config}: {exc}") from None
        payload = _read_json(source, f"run-config file {args.config}")

    flags = {
        name: value
        for name, value in vars(args).items()
        if value is not None and name not in ("config", "action")
    }
    grid = {
        **defaults.pop("grid", {}),
        **payload.get("grid", {}),
        **{k: flags.pop(k) for k in GRID_FLAGS if k in flags},
    }
    if "w_spec" in flags:
        flags["w_spec"] = _read_json(flags["w_spec"], "--w-spec")

    try:
        return RunConfig.model_validate({**defaults, **payload, **flags, "grid": grid})
    except ValidationError as exc:
        raise ConfigError(f"invalid run config: {exc}") from None


def _config_defaults(container: AppContainer) -> Dict[str, Any]:
    defaults: Dict[str, Any] = {}
    if container.config.grid.n() is not None:
        defaults["grid"] = {"n": container.config.grid.n()}
    if container.config.output.format() is not None:
        defaults["format"] = container.config.output.format()
    return defaults


def run(argv: Sequence[str] | None, container: AppContainer) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_run_config(args, defaults=_config_defaults(container))
        return run_command(config, container)
    except PdmError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    container = create_app()
    logging.basicConfig(
        level=str(container.config.logging.level()).upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    return run(argv, container)


if __name__ == "__main__":
    sys.exit(main())
