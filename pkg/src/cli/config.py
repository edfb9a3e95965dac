"""
Configuration d'une exécution du CLI (fichier JSON + options de ligne de commande)
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

from ..core.errors import ConfigError, MissingInputError
from ..core.workers import resolve_workers

SUBCOMMANDS = ('forecast', 'tune', 'reconfig', 'opf3', 'fit-errors', 'schedule',
               'validate', 'regress', 'operate', 'benchmark')
TOLERANCE_KEYS = ('penalty', 'eps_abs', 'eps_rel', 'max_iter')
DATA_DIR = Path(__file__).resolve().parents[2] / "data"


@dataclass
class RunConfig:
    """
    Paramètres d'une exécution

    Attributes:
        subcommand: Pipeline exécuté
        inputs: Chemins d'entrée par rôle (bus_file, branch_file, series,
            prices, forecasts, error_model, errors, schedule, regression)
        out: Répertoire de sortie
        workers: Nombre de workers (None = GRIDOPT_WORKERS ou 1)
        seed: Graine racine
        tolerances: Surcharges ADMM (penalty, eps_abs, eps_rel, max_iter)
        gamma, alpha, beta, rho: Paramètres des contraintes en chance et du coût total
        options: Paramètres propres au pipeline
        visualize: Produire les figures
    """
    subcommand: str = 'schedule'
    inputs: Dict[str, str] = field(default_factory=dict)
    out: str = 'results'
    workers: Optional[int] = None
    seed: int = 0
    tolerances: Dict[str, float] = field(default_factory=dict)
    gamma: float = 0.97
    alpha: float = 0.95
    beta: float = 1.0
    rho: float = 0.9
    options: Dict[str, Any] = field(default_factory=dict)
    visualize: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"sous-commande inconnue: {self.subcommand}")
        self.workers = resolve_workers(self.workers)
        unknown = set(self.tolerances) - set(TOLERANCE_KEYS)
        if unknown:
            raise ConfigError(f"tolérances inconnues: {sorted(unknown)}")
        if self.beta <= 0:
            raise ConfigError(f"β doit être > 0: {self.beta}")

    @classmethod
    def from_json(cls, path, **overrides) -> 'RunConfig':
        """
        Charge un fichier JSON reprenant les champs de RunConfig ; les
        surcharges non None (options de ligne de commande) l'emportent
        """
        path = Path(path)
        if not path.exists():
            raise MissingInputError(str(path))
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: JSON invalide ({e})")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: objet JSON attendu")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"{path}: champs inconnus {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def with_overrides(self, **kwargs) -> 'RunConfig':
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def input_path(self, role: str, default: Optional[Path] = None) -> Optional[Path]:
        """Chemin d'une entrée (relatif au répertoire courant) ou valeur par défaut"""
        raw = self.inputs.get(role)
        return Path(raw) if raw else default

    def option(self, name: str, default=None):
        return self.options.get(name, default)

    def prepare_output(self) -> Path:
        """Crée le répertoire de sortie et vérifie qu'il est inscriptible"""
        out = Path(self.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"répertoire de sortie inaccessible: {out} ({e})")
        if not os.access(out, os.W_OK):
            raise ConfigError(f"répertoire de sortie non inscriptible: {out}")
        return out

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
