"""
Pool de workers borné partagé par les calculs parallélisables
(évaluation des configurations, cellules de grille, particules).

Les résultats sont toujours rendus dans l'ordre des entrées, quel que
soit l'ordre de terminaison : la réduction qui suit est déterministe.
"""

import os
import concurrent.futures
from typing import Callable, Iterable, List, Optional, TypeVar

from .errors import ConfigError

T = TypeVar('T')
R = TypeVar('R')

WORKERS_ENV = "GRIDOPT_WORKERS"


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    Nombre de workers effectif : argument explicite, sinon variable
    d'environnement GRIDOPT_WORKERS, sinon 1
    """
    if workers is None:
        raw = os.environ.get(WORKERS_ENV)
        if raw is None or raw.strip() == "":
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} invalide: {raw!r}")
    if workers < 1:
        raise ConfigError(f"nombre de workers invalide: {workers}")
    return workers


def max_workers() -> int:
    """Nombre de coeurs disponibles"""
    return os.cpu_count() or 1


class WorkerPool:
    """
    Map ordonné sur un pool de processus ou de threads

    Avec un seul worker, le map est exécuté en série dans le processus
    courant (aucun pool créé).
    """

    def __init__(self, workers: Optional[int] = None, kind: str = "process"):
        """
        Args:
            workers: Nombre de workers (None = GRIDOPT_WORKERS ou 1)
            kind: "process" ou "thread"
        """
        if kind not in ("process", "thread"):
            raise ConfigError(f"type de pool inconnu: {kind}")
        self.workers = resolve_workers(workers)
        self.kind = kind

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Applique func à chaque élément

        Returns:
            Liste des résultats dans l'ordre des éléments
        """
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [func(item) for item in items]

        executor_cls = (concurrent.futures.ProcessPoolExecutor
                        if self.kind == "process"
                        else concurrent.futures.ThreadPoolExecutor)
        n = min(self.workers, len(items))
        chunksize = max(1, len(items) // (4 * n))
        with executor_cls(max_workers=n) as executor:
            if self.kind == "process":
                return list(executor.map(func, items, chunksize=chunksize))
            return list(executor.map(func, items))

    def get_stats(self) -> dict:
        return {'workers': self.workers, 'kind': self.kind}
