"""
Module Core - Hiérarchie des erreurs

Deux familles : les erreurs d'entrée (fichiers, configuration,
préconditions) et les erreurs numériques (divergence, infaisabilité).
Le CLI traduit la première famille en code de sortie 2, la seconde en 3.
"""

from typing import Optional


class GridOptError(Exception):
    """Erreur de base du projet"""

    def to_dict(self) -> dict:
        return {
            'error': str(self),
            'type': type(self).__name__,
            'detail': getattr(self, 'detail', None)
        }


class InputError(GridOptError):
    """Données d'entrée invalides"""


class ParseError(InputError):
    """Ligne de fichier mal formée"""

    def __init__(self, path: str, row: int, message: str):
        self.path = path
        self.row = row
        self.detail = {'path': str(path), 'row': row}
        super().__init__(f"{path}, ligne {row}: {message}")


class TopologyError(InputError):
    """Extrémité de branche inexistante, graphe incohérent"""


class ValidationError(InputError):
    """Invariant de type violé (id dupliqué, bornes incohérentes...)"""


class ConfigError(InputError):
    """Paramètre de configuration hors domaine"""


class CapacityError(InputError):
    """Taille de recherche au-delà de la garde combinatoire"""


class PreconditionError(InputError):
    """Précondition d'une opération non satisfaite"""


class MissingInputError(InputError):
    """Fichier d'entrée introuvable"""

    def __init__(self, path: str):
        self.detail = {'path': str(path)}
        super().__init__(f"fichier introuvable: {path}")


class NumericalError(GridOptError):
    """Échec numérique"""


class DivergenceError(NumericalError):
    """Itéré non fini pendant une résolution"""

    def __init__(self, iteration: int, message: Optional[str] = None):
        self.iteration = iteration
        self.detail = {'iteration': iteration}
        super().__init__(message or f"itéré non fini à l'itération {iteration}")


class ProgramError(NumericalError):
    """Programme conique mal dimensionné ou système KKT singulier"""


class SingularityError(NumericalError):
    """Matrice des régresseurs de rang déficient"""


class InfeasibleHourError(NumericalError):
    """Intervalle admissible vide pour une heure donnée"""

    def __init__(self, hour: int, constraint: str, lower: float, upper: float):
        self.hour = hour
        self.constraint = constraint
        self.detail = {'hour': hour, 'constraint': constraint,
                       'lower': lower, 'upper': upper}
        super().__init__(
            f"heure {hour}: intervalle vide [{lower:.4f}, {upper:.4f}] "
            f"(contrainte liante: {constraint})"
        )


class ReportError(NumericalError):
    """Aucun résultat exploitable pour construire un rapport"""


class UndefinedShareError(NumericalError):
    """Part temps réel indéfinie (charge nulle)"""
