#!/usr/bin/env python3
"""
Script Principal - gridopt

Point d'entrée en lot : chaque sous-commande lit ses entrées (fichier
de configuration JSON + options), exécute un pipeline et écrit ses
rapports CSV/JSON ainsi qu'un manifeste dans le répertoire de sortie.

Codes de sortie: 0 succès, 1 usage, 2 entrée invalide, 3 échec numérique.
"""

import argparse
import json
import sys

from src.cli import EXIT_INPUT, EXIT_OK, EXIT_USAGE, RunConfig, SUBCOMMANDS, run
from src.core.errors import GridOptError


class GridOptParser(argparse.ArgumentParser):
    """argparse avec le code de sortie 1 pour les erreurs d'usage"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: erreur: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = GridOptParser(prog="gridopt",
                           description="Optimisation de réseaux de distribution")
    parser.add_argument('subcommand', choices=SUBCOMMANDS,
                        help='Pipeline à exécuter')
    parser.add_argument('--config', type=str, default=None,
                        help='Fichier JSON reprenant les champs de RunConfig')
    parser.add_argument('--workers', type=int, default=None,
                        help='Nombre de workers (défaut: GRIDOPT_WORKERS ou 1)')
    parser.add_argument('--seed', type=int, default=None,
                        help='Graine racine')
    parser.add_argument('--out', type=str, default=None,
                        help='Répertoire de sortie')
    parser.add_argument('--visualize', action='store_true', default=None,
                        help='Générer les figures')
    return parser


def main(argv=None) -> int:
    """Point d'entrée principal"""
    args = build_parser().parse_args(argv)
    if args.workers is not None and args.workers < 1:
        build_parser().error(f"--workers doit être ≥ 1 ({args.workers})")

    overrides = {'subcommand': args.subcommand, 'workers': args.workers,
                 'seed': args.seed, 'out': args.out, 'visualize': args.visualize}
    try:
        if args.config:
            cfg = RunConfig.from_json(args.config, **overrides)
        else:
            cfg = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    except GridOptError as e:
        print(json.dumps(e.to_dict(), indent=2), file=sys.stderr)
        return EXIT_INPUT

    print(f"\n{'='*60}")
    print(f"  GRIDOPT - {cfg.subcommand.upper()}")
    print(f"{'='*60}\n")
    print(f"Workers: {cfg.workers} | Graine: {cfg.seed} | Sortie: {cfg.out}\n")

    status, summary = run(cfg)
    if status == EXIT_OK:
        print("Résultats:")
        for key, value in summary.items():
            if not isinstance(value, (dict, list)):
                print(f"  {key}: {value}")
    else:
        print(f"✗ Échec ({summary.get('type')}): {summary.get('error')}")
        print(f"  Détails dans {cfg.out}/error.json")

    print(f"\n{'='*60}\n")
    return status


if __name__ == '__main__':
    sys.exit(main())
