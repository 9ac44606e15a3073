"""Command line entry point: `gaussian-igc <command> [flags]`.

Tables go to stdout (or --out) as CSV or JSON, logs go to stderr. Exit codes:
0 success, 2 configuration or admissibility error, 3 integration failure,
4 convergence diagnostic failure.
"""
import argparse
import io
import logging
import sys
from typing import Dict, List, Optional

from . import EntropicMotionToolkit
from .adapters import adapter_for
from .configuration import LOG_LEVELS, RunConfig
from .constants import CorrelationStructure, ExitCode, OutputFormat, VolumeMode
from .errors import IGCError

COMMANDS = {
    'metric': "Fisher-Rao metric (closed form and moment engine) and curvature at one point",
    'curvature': "sectional curvature, Riemann antisymmetry residuals and constancy per sigma",
    'geodesic': "numerical geodesic next to the closed form, with residual and drift footer",
    'igc': "volume and information geometric complexity along the geodesic",
    'figure1': "complexity ratios R(rho) of the four correlated structures",
    'report': "JSON report: decay rate, asymptotic law, ratio curves, peaks and discrepancies",
}


def _common_flags() -> argparse.ArgumentParser:
    # flags default to SUPPRESS so only the ones given override the config file
    parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parent.add_argument("--config", help="key=value or .json file mirroring the flags")
    parent.add_argument("--structure", choices=[str(s) for s in CorrelationStructure])
    parent.add_argument("--rho", type=float, help="correlation coefficient")
    parent.add_argument("--rho-min", type=float, help="lower end of the rho grid")
    parent.add_argument("--rho-max", type=float, help="upper end of the rho grid")
    parent.add_argument("--rho-count", type=int, help="number of rho grid points")
    parent.add_argument("--sigma", type=float, help="sigma of the evaluation point")
    parent.add_argument("--mu", type=float, help="mu of the evaluation point")
    parent.add_argument("--sigma0", type=float, help="initial sigma of the geodesic")
    parent.add_argument("--a1", type=float, help="geodesic constant A1")
    parent.add_argument("--a2", type=float, help="geodesic constant A2")
    parent.add_argument("--tau", type=float, help="time horizon")
    parent.add_argument("--step", type=float, help="integration step")
    parent.add_argument("--mode", choices=[str(m) for m in VolumeMode])
    parent.add_argument("--format", choices=[str(f) for f in OutputFormat])
    parent.add_argument("--out", help="output file (default stdout)")
    parent.add_argument("--workers", type=int, help="processes for rho sweeps")
    parent.add_argument("--log-level", choices=LOG_LEVELS)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gaussian-igc',
        description="Information geometric complexity of correlated Gaussian models.")
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    parent = _common_flags()
    for name, help_text in COMMANDS.items():
        subparsers.add_parser(name, parents=[parent], help=help_text, description=help_text)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults < --config file < explicit flags."""
    flags: Dict[str, object] = {key: value for key, value in vars(args).items()
                                if key not in ('command', 'config')}
    config = RunConfig.defaults()
    if getattr(args, 'config', None):
        config = RunConfig.parse_file(args.config, config)
    config = RunConfig.from_mapping(flags, config)
    if args.command == 'report':
        config.format = OutputFormat.JSON
    RunConfig.sanity_check_configs(config)
    return config


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(args, 'log_level', 'WARNING'), stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    logger = logging.getLogger('gaussian_igc.cli')
    try:
        config = resolve_config(args)
        logging.getLogger().setLevel(config.log_level.upper())
        toolkit = EntropicMotionToolkit(config)
        sink = io.StringIO(newline='') if config.out else sys.stdout
        toolkit.set_adapter(adapter_for(config.format, sink))
        toolkit.run(args.command)
        if config.out:
            with open(config.out, 'w', newline='') as stream:
                stream.write(sink.getvalue())
    except IGCError as error:
        logger.debug(f"main: {args.command} exits with {error.code}")
        print(f"gaussian-igc: {error.description}: {error}", file=sys.stderr)
        return error.code
    except OSError as error:
        print(f"gaussian-igc: cannot write output: {error}", file=sys.stderr)
        return ExitCode.CONFIG
    return ExitCode.SUCCESS
