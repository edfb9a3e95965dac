"""
Sous-flux aléatoires nommés dérivés d'une graine racine.

Chaque module tire ses nombres d'un générateur obtenu par
substream(seed, "module/usage"), jamais d'un générateur global : le
résultat ne dépend ni de l'ordre d'exécution ni du nombre de workers.
"""

import zlib
from typing import Union

import numpy as np


def _name_key(name: str) -> int:
    return zlib.crc32(name.encode('utf-8'))


def substream(seed: int, name: Union[str, int], *more: Union[str, int]) -> np.random.Generator:
    """
    Générateur numpy indépendant pour (graine, nom[, indices...])

    Args:
        seed: Graine racine
        name: Nom du sous-flux (ex: "scheduler/hour")
        more: Clés supplémentaires (heure, particule, essai...)

    Returns:
        numpy.random.Generator déterministe
    """
    keys = [int(seed) & 0xFFFFFFFF]
    for key in (name,) + more:
        keys.append(_name_key(key) if isinstance(key, str) else int(key) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(keys))
