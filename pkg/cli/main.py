import sys
import argparse
import logging
from pathlib import Path

from sqlalchemy.exc import SQLAlchemyError

from cli import __version__
from cli.handlers import HANDLERS
from cli.middlewares import RegistryMiddleware
from cli.output import OutputDir, summary_lines, write_failure
from cli.run_config import RunConfig, Subcommand, build_run_config
from config import Settings, get_settings
from database.engine import init_db, make_engine, make_session_maker, registry_url
from model.errors import LabError
from pde import Scheme


LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]
INTERRUPTED = 130

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--config", type=Path, help="TOML/JSON, перекрывает флаги")
    common.add_argument("--log-level", dest="log_level", choices=LOG_LEVELS)
    common.add_argument("--no-registry", dest="registry", action="store_const", const=False)
    common.add_argument("--progress", action="store_const", const=True)

    parser = argparse.ArgumentParser(prog="bbmlab", description="Ветвящееся броуновское движение с поглощением в нуле")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    series = sub.add_parser(Subcommand.SERIES.value, parents=[common], help="коэффициенты ряда и s0, B0, B_s0")
    series.add_argument("--n-max", dest="n_max", type=int)

    waves = sub.add_parser(Subcommand.WAVES.value, parents=[common], help="стоячие волны, h_*, волна вымирания")
    waves.add_argument("--n-max", dest="n_max", type=int)
    waves.add_argument("--tol", type=float)
    waves.add_argument("--rtol", type=float)
    waves.add_argument("--s", dest="s_values", type=float, nargs="+")

    pde = sub.add_parser(Subcommand.PDE.value, parents=[common], help="конечно-разностное решение и фронт")
    pde.add_argument("--dx", type=float)
    pde.add_argument("--dt", type=float)
    pde.add_argument("--horizon", type=float)
    pde.add_argument("--s", type=float)
    pde.add_argument("--scheme", choices=[scheme.value for scheme in Scheme])
    pde.add_argument("--snapshot-times", dest="snapshot_times", type=float, nargs="+")

    mc = sub.add_parser(Subcommand.MC.value, parents=[common], help="Монте-Карло для K(∞)")
    mc.add_argument("--x0", type=float)
    mc.add_argument("--s", type=float)
    mc.add_argument("--replicas", type=int)
    mc.add_argument("--epsilon", type=float)
    mc.add_argument("--dt", type=float)
    mc.add_argument("--seed", type=int)
    mc.add_argument("--threads", type=int)
    mc.add_argument("--batch-size", dest="batch_size", type=int)
    mc.add_argument("--population-cap", dest="population_cap", type=int)
    mc.add_argument("--k-cap", dest="k_cap", type=int)
    mc.add_argument("--horizon", dest="mc_horizon", type=float)
    mc.add_argument("--n-tail", dest="n_tail", type=int)
    mc.add_argument("--martingale-times", dest="martingale_times", type=float, nargs="+")
    mc.add_argument("--spines", type=int)

    curve = sub.add_parser(Subcommand.S0_CURVE.value, parents=[common], help="s0 вдоль μ/√β")
    curve.add_argument("--ratios", type=float, nargs="+")
    curve.add_argument("--n-max", dest="n_max", type=int)

    cross = sub.add_parser(Subcommand.CROSSCHECK.value, parents=[common], help="ряд / ОДУ / Монте-Карло")
    cross.add_argument("--x0", dest="x_points", type=float, nargs="+")
    cross.add_argument("--s", dest="s_values", type=float, nargs="+")
    cross.add_argument("--replicas", type=int)
    cross.add_argument("--epsilon", type=float)
    cross.add_argument("--seed", type=int)
    cross.add_argument("--threads", type=int)
    cross.add_argument("--n-max", dest="n_max", type=int)
    return parser


def _registry(config: RunConfig, settings: Settings) -> RegistryMiddleware | None:
    try:
        engine = make_engine(registry_url(config.output_dir, settings.registry_url))
        init_db(engine)
    except SQLAlchemyError as e:
        logger.warning(f"Реестр запусков недоступен, продолжаем без него: {e}")
        return None
    return RegistryMiddleware(make_session_maker(engine))


def _failure_dir(path: str) -> OutputDir | None:
    try:
        return OutputDir(path)
    except LabError:
        return None


def run(config: RunConfig, settings: Settings) -> int:
    """Выполнить подкоманду; код возврата из иерархии LabError."""
    out = None
    try:
        out = OutputDir(config.output_dir)
        out.write_manifest(config.resolved(), __version__)
        module = HANDLERS[config.subcommand]
        module.regime_filter.check(config)

        data = {"out": out}
        registry = _registry(config, settings) if config.registry else None
        if registry is not None:
            summary = registry(module.handle, config, data)
        else:
            summary = module.handle(config, **data)

        out.write_summary(summary)
        print("\n".join(summary_lines(summary)))
        return 0
    except LabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        write_failure(out, e, e.exit_code)
        return e.exit_code


def main(argv: list[str] | None = None) -> int:
    """Точка входа."""
    args = build_parser().parse_args(argv)
    settings = get_settings()

    flags = vars(args).copy()
    config_file = flags.pop("config")
    flags["subcommand"] = flags.pop("command")

    # Логирование
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )

    try:
        config = build_run_config(flags, settings, config_file)
    except LabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        write_failure(_failure_dir(flags.get("output_dir") or settings.output_dir), e, e.exit_code)
        return e.exit_code
    logging.getLogger().setLevel(config.log_level)

    logger.info(f"Запуск {config.subcommand.value}, вывод в {config.output_dir}")
    try:
        return run(config, settings)
    except KeyboardInterrupt:
        logger.info("Остановлено пользователем")
        return INTERRUPTED
