"""
Исключения лаборатории.

Каждый класс знает свой код выхода CLI:
    2 - ошибка конфигурации / входных данных
    3 - численный сбой
    4 - провал перекрёстной проверки
"""


class LabError(Exception):
    """Базовая ошибка."""
    exit_code: int = 3


# Входные данные (код 2)

class InvalidParameterError(LabError, ValueError):
    """Недопустимые параметры модели или аргументы операции."""
    exit_code = 2


class UnsupportedRegimeError(LabError):
    """Операция не определена для данного режима."""
    exit_code = 2


class NoFiniteMomentError(LabError):
    """s > s0: производящая функция бесконечна."""
    exit_code = 2

    def __init__(self, s: float, s0: float):
        self.s = s
        self.s0 = s0
        super().__init__(f"s={s:.6g} больше s0={s0:.6g}, момент бесконечен")


# Численные сбои (код 3)

class OutOfDiscError(LabError):
    """Аргумент ряда вне оценённого круга сходимости."""

    def __init__(self, z: float, radius: float):
        self.z = z
        self.radius = radius
        super().__init__(f"|z|={abs(z):.6g} вне круга сходимости (R≈{radius:.6g})")


class RadiusExceededError(LabError):
    """Корень не найден внутри круга сходимости."""

    def __init__(self, what: str, largest_usable: float):
        self.largest_usable = largest_usable
        super().__init__(f"{what}: корень или аргумент вне |z| < {largest_usable:.6g}")


class NoConvergenceError(LabError):
    """Бисекция не сошлась за отведённое число итераций."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        self.bracket = bracket
        if bracket is not None:
            message = f"{message} (скобка [{bracket[0]:.17g}, {bracket[1]:.17g}])"
        super().__init__(message)


class SolverFailureError(LabError):
    """Траектория ОДУ не обладает нужными свойствами."""


class QuadratureError(LabError):
    """Адаптивная квадратура не сошлась."""


class StabilityError(LabError):
    """Разностная схема вышла за пределы принципа максимума."""


class FrontExitError(LabError):
    """Фронт вышел за сетку, а расширять больше нельзя."""


class SpineHorizonError(LabError):
    """Хребет не достиг уровня усечения за отведённое время."""


# Перекрёстная проверка (код 4)

class CrosscheckFailure(LabError):
    """Хотя бы одно попарное расхождение больше допуска."""
    exit_code = 4
