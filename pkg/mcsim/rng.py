"""
Воспроизводимые независимые потоки: Philox с ключом (master_seed, номер пакета).
"""

import numpy as np

from model.errors import InvalidParameterError

# второй элемент ключа разводит потоки разных оценщиков
STREAM_PARTICLES = 0
STREAM_SPINE = 1


def replica_stream(master_seed: int, index: int, stream: int = STREAM_PARTICLES) -> np.random.Generator:
    if master_seed < 0 or index < 0:
        raise InvalidParameterError(f"seed и номер пакета должны быть ≥ 0: {master_seed}, {index}")
    sequence = np.random.SeedSequence(master_seed, spawn_key=(index, stream))
    return np.random.Generator(np.random.Philox(sequence))
