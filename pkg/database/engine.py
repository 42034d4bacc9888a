from pathlib import Path

from sqlalchemy import create_engine, Engine
from sqlalchemy.orm import sessionmaker, Session

from database.models import Base


REGISTRY_FILE = "registry.sqlite3"


def registry_url(output_dir: str | Path, url: str = "") -> str:
    """URL реестра: явный или SQLite в каталоге вывода."""
    if url:
        return url
    return f"sqlite:///{Path(output_dir) / REGISTRY_FILE}"


def make_engine(url: str) -> Engine:
    return create_engine(
        url,
        echo=False,  # True для логирования SQL запросов
        pool_pre_ping=True,
    )


def make_session_maker(engine: Engine) -> sessionmaker[Session]:
    return sessionmaker(engine, expire_on_commit=False)


def init_db(engine: Engine) -> None:
    """Создание всех таблиц в базе данных."""
    Base.metadata.create_all(engine)
