"""
Module Analytics - Intervalles de confiance et visualisation

Ce module implémente:
- Le calcul des intervalles de confiance (t ou z selon la taille)
- Les bornes binomiales utilisées pour la validation Monte-Carlo
- Les figures optionnelles (prévision, PSO, GMM, coûts horaires,
  convergence ADMM, pertes avec/sans OPF)
"""

import os
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats
import matplotlib.pyplot as plt
import seaborn as sns


class ConfidenceInterval:
    """
    Calcul des intervalles de confiance
    """

    @staticmethod
    def calculate_ci(data: np.ndarray,
                     confidence: float = 0.95) -> Tuple[float, float, float]:
        """
        Calcule l'intervalle de confiance pour une série de données

        Args:
            data: Données à analyser
            confidence: Niveau de confiance (0.95 = 95%)

        Returns:
            Tuple (moyenne, borne_inf, borne_sup)
        """
        data = np.asarray(data, dtype=float)
        if len(data) == 0:
            return 0.0, 0.0, 0.0
        mean = float(np.mean(data))
        if len(data) == 1:
            return mean, mean, mean

        std_error = stats.sem(data)
        # t pour petit échantillon, z au-delà de 30
        if len(data) < 30:
            value = stats.t.ppf((1 + confidence) / 2, len(data) - 1)
        else:
            value = stats.norm.ppf((1 + confidence) / 2)
        margin = float(value * std_error)
        return mean, mean - margin, mean + margin

    @staticmethod
    def binomial_slack(p: float, n: int, sigmas: float = 3.0) -> float:
        """Marge σ·√(p(1−p)/n) d'une fréquence empirique"""
        if n <= 0:
            return float('inf')
        return float(sigmas * np.sqrt(p * (1 - p) / n))

    @staticmethod
    def binomial_lower_bound(successes: int, n: int, confidence: float = 0.95) -> float:
        """Borne inférieure exacte (Clopper-Pearson) d'une proportion"""
        if n <= 0 or successes <= 0:
            return 0.0
        return float(stats.beta.ppf(1 - confidence, successes, n - successes + 1))


class Visualizer:
    """
    Figures des résultats (toutes optionnelles, derrière --visualize)
    """

    def __init__(self, output_dir: Optional[str] = None):
        """
        Args:
            output_dir: Répertoire des figures (affichage interactif si None)
        """
        self.output_dir = output_dir
        if output_dir:
            os.makedirs(output_dir, exist_ok=True)
        sns.set_style("whitegrid")

    def _finish(self, name: Optional[str]):
        if self.output_dir and name:
            path = os.path.join(self.output_dir, name)
            plt.savefig(path, dpi=300, bbox_inches='tight')
            plt.close()
            return path
        plt.show()
        plt.close()
        return None

    def plot_forecast(self, frame: pd.DataFrame, name: str = "forecast.png"):
        """Prévision vs réel (colonnes origin, predicted, actual, horizon_step)"""
        first = frame[frame['horizon_step'] == 1]
        plt.figure(figsize=(12, 6))
        plt.plot(range(len(first)), first['actual'], label='Réel')
        plt.plot(range(len(first)), first['predicted'], '--', label='Prévu')
        plt.xlabel('Origine')
        plt.ylabel('Charge (kW)')
        plt.title('Prévision à un pas')
        plt.legend()
        return self._finish(name)

    def plot_pso_trace(self, trace: List[float], name: str = "pso_trace.png"):
        plt.figure(figsize=(10, 5))
        plt.plot(range(1, len(trace) + 1), trace, marker='o')
        plt.xlabel('Itération')
        plt.ylabel('Risque (meilleur global)')
        plt.title('Convergence PSO')
        return self._finish(name)

    def plot_gmm_fit(self, data: np.ndarray, densities: Dict[str, np.ndarray],
                     grid: np.ndarray, name: str = "gmm_fit.png"):
        """Histogramme des erreurs et densités ajustées par modèle"""
        plt.figure(figsize=(12, 6))
        plt.hist(np.asarray(data).ravel(), bins=100, density=True, alpha=0.4,
                 edgecolor='black', label='Erreurs observées')
        for label, dens in densities.items():
            plt.plot(grid, dens, label=label)
        plt.xlabel('Erreur relative')
        plt.ylabel('Densité')
        plt.title('Ajustement des erreurs de prévision')
        plt.legend()
        return self._finish(name)

    def plot_hourly_costs(self, with_ca: pd.DataFrame, without_ca: pd.DataFrame,
                          name: str = "hourly_costs.png"):
        plt.figure(figsize=(12, 6))
        plt.plot(with_ca['hour'], with_ca['cost'], marker='o', label='Avec revente')
        plt.plot(without_ca['hour'], without_ca['cost'], marker='s', label='Sans revente')
        plt.xlabel('Heure')
        plt.ylabel('Coût ($)')
        plt.title('Coût horaire au poste')
        plt.legend()
        return self._finish(name)

    def plot_admm_convergence(self, trace: pd.DataFrame, name: str = "admm.png"):
        plt.figure(figsize=(10, 5))
        plt.semilogy(trace['iter'], trace['primal_residual'], label='Résidu primal')
        plt.semilogy(trace['iter'], trace['dual_residual'], label='Résidu dual')
        plt.xlabel('Itération')
        plt.ylabel('Résidu')
        plt.title('Convergence ADMM')
        plt.legend()
        return self._finish(name)

    def plot_line_loss(self, intervals: pd.DataFrame, name: str = "line_loss.png"):
        """Pertes par intervalle avec et sans OPF (colonnes loss_kwh, loss_no_opf_kwh)"""
        plt.figure(figsize=(12, 6))
        plt.plot(intervals['minute'] / 60.0, intervals['loss_kwh'], label='Avec OPF')
        plt.plot(intervals['minute'] / 60.0, intervals['loss_no_opf_kwh'], label='Sans OPF')
        plt.xlabel('Heure')
        plt.ylabel('Pertes (kWh)')
        plt.title('Pertes en ligne')
        plt.legend()
        return self._finish(name)

    def plot_comparison(self, results: Dict[str, float], metric: str,
                        name: Optional[str] = None):
        """Compare une métrique entre configurations (ex: temps par nombre de workers)"""
        labels = list(results.keys())
        plt.figure(figsize=(10, 6))
        plt.bar(labels, [results[k] for k in labels], edgecolor='black', alpha=0.7)
        plt.xlabel('Configuration')
        plt.ylabel(metric)
        plt.title(f'Comparaison: {metric}')
        plt.xticks(rotation=45, ha='right')
        return self._finish(name or f"{metric}.png")
