# CLI Handlers Package
from cli.handlers import crosscheck, mc, pde, s0_curve, series, waves
from cli.run_config import Subcommand

HANDLERS = {
    Subcommand.SERIES: series,
    Subcommand.WAVES: waves,
    Subcommand.PDE: pde,
    Subcommand.MC: mc,
    Subcommand.S0_CURVE: s0_curve,
    Subcommand.CROSSCHECK: crosscheck,
}

__all__ = ["HANDLERS"]
