import json
import logging
from datetime import datetime
from typing import Any, Callable

from sqlalchemy.orm import Session, sessionmaker

from cli.output import format_value
from cli.run_config import RunConfig
from database.models import Run, RunSummary
from model.errors import LabError


logger = logging.getLogger(__name__)


class RegistryMiddleware:
    """Middleware: записывает запуск и его сводку в реестр."""

    def __init__(self, session_maker: sessionmaker[Session]):
        self.session_maker = session_maker

    def __call__(
        self,
        handler: Callable[..., dict[str, Any]],
        config: RunConfig,
        data: dict[str, Any],
    ) -> dict[str, Any]:
        with self.session_maker() as session:
            run = Run(
                subcommand=config.subcommand.value,
                mu=config.mu,
                beta=config.beta,
                seed=config.seed,
                config_json=json.dumps(config.resolved(), ensure_ascii=False, sort_keys=True),
                output_dir=str(config.output_dir),
            )
            session.add(run)
            session.commit()

            try:
                summary = handler(config, **data)
            except LabError as e:
                run.status = "failed"
                run.exit_code = e.exit_code
                run.error = str(e)
                run.finished_at = datetime.now()
                session.commit()
                raise

            run.status = "ok"
            run.exit_code = 0
            run.finished_at = datetime.now()
            run.summary = [RunSummary(key=key, value=format_value(value)) for key, value in summary.items()]
            session.commit()
            logger.debug(f"Запуск #{run.id} записан в реестр")
            return summary
