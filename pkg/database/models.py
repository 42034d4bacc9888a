from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship
from sqlalchemy import Integer, String, Float, Text, ForeignKey, DateTime
from datetime import datetime


class Base(DeclarativeBase):
    __abstract__ = True


class Run(Base):
    """Запуск подкоманды."""
    __tablename__ = 'runs'

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    subcommand: Mapped[str] = mapped_column(String(32))

    mu: Mapped[float | None] = mapped_column(Float, nullable=True)
    beta: Mapped[float | None] = mapped_column(Float, nullable=True)
    seed: Mapped[int | None] = mapped_column(Integer, nullable=True)

    # Полная разрешённая конфигурация (JSON)
    config_json: Mapped[str] = mapped_column(Text)
    output_dir: Mapped[str] = mapped_column(String(1024))

    # running / ok / failed
    status: Mapped[str] = mapped_column(String(16), default="running")
    exit_code: Mapped[int | None] = mapped_column(Integer, nullable=True)
    error: Mapped[str | None] = mapped_column(Text, nullable=True)

    started_at: Mapped[datetime] = mapped_column(DateTime, default=datetime.now)
    finished_at: Mapped[datetime | None] = mapped_column(DateTime, nullable=True)

    summary: Mapped[list["RunSummary"]] = relationship(back_populates="run", cascade="all, delete-orphan")

    @property
    def duration(self) -> float | None:
        """Длительность в секундах."""
        if self.finished_at is None:
            return None
        return (self.finished_at - self.started_at).total_seconds()


class RunSummary(Base):
    """Строка key = value из итоговой сводки запуска."""
    __tablename__ = 'run_summaries'

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)

    run_id: Mapped[int] = mapped_column(ForeignKey('runs.id'))
    run: Mapped["Run"] = relationship(back_populates="summary")

    key: Mapped[str] = mapped_column(String(255))
    value: Mapped[str] = mapped_column(Text)
