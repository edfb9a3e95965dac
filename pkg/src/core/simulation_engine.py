"""
Module Core - Journal d'événements et moteur de simulation

Ce module fournit:
- Un journal centralisé des événements de calcul (itérations ADMM,
  configurations évaluées, générations GAEM, heures planifiées...)
  exporté en DataFrame pour l'analyse
- Le moteur SimPy utilisé pour dérouler une journée d'exploitation
"""

import simpy
import pandas as pd
from datetime import datetime
from typing import List, Dict, Any, Optional
from enum import Enum


class EventType(Enum):
    """Types d'événements journalisés"""
    ADMM_ITERATION = "admm_iteration"
    ADMM_RHO_UPDATE = "admm_rho_update"
    CONFIG_EVALUATED = "config_evaluated"
    CONFIG_REJECTED = "config_rejected"
    GRID_CELL_EVALUATED = "grid_cell_evaluated"
    PSO_ITERATION = "pso_iteration"
    EM_ITERATION = "em_iteration"
    COMPONENT_RESEEDED = "component_reseeded"
    GAEM_GENERATION = "gaem_generation"
    HOUR_SCHEDULED = "hour_scheduled"
    HOUR_INFEASIBLE = "hour_infeasible"
    INTERVAL_DISPATCHED = "interval_dispatched"
    WARNING = "warning"


class EventLogger:
    """
    Système de logging centralisé pour collecter les événements
    des différents calculs et générer des DataFrames pour l'analyse.
    """

    def __init__(self):
        self.events: List[Dict[str, Any]] = []

    def log_event(self,
                  time: float,
                  event_type: EventType,
                  entity_id: Any,
                  entity_type: str,
                  value: Optional[float] = None,
                  extra_data: Optional[Dict[str, Any]] = None):
        """
        Enregistre un événement dans le log

        Args:
            time: Horodatage logique (itération, heure, minute simulée)
            event_type: Type d'événement
            entity_id: Identifiant de l'entité (configuration, heure, composant)
            entity_type: Famille de l'entité ("admm", "reconfig", "gaem"...)
            value: Valeur principale associée (résidu, perte, MDL...)
            extra_data: Données supplémentaires spécifiques
        """
        event = {
            'time': time,
            'event_type': event_type.value,
            'entity_id': entity_id,
            'entity_type': entity_type,
            'value': value,
            'timestamp': datetime.now()
        }

        if extra_data:
            event.update(extra_data)

        self.events.append(event)

    def get_dataframe(self, event_type: Optional[EventType] = None) -> pd.DataFrame:
        """
        Retourne les événements sous forme de DataFrame, éventuellement
        filtrés sur un type
        """
        df = pd.DataFrame(self.events)
        if event_type is not None and not df.empty:
            df = df[df['event_type'] == event_type.value].reset_index(drop=True)
        return df

    def count(self, event_type: EventType) -> int:
        """Nombre d'événements d'un type donné"""
        return sum(1 for e in self.events if e['event_type'] == event_type.value)

    def get_summary(self) -> Dict[str, Any]:
        """
        Retourne un résumé statistique des événements
        """
        df = self.get_dataframe()
        if df.empty:
            return {}

        summary = {'total_events': len(df)}
        for event_type in EventType:
            summary[event_type.value] = int((df['event_type'] == event_type.value).sum())
        return summary

    def clear(self):
        """Efface tous les événements"""
        self.events.clear()


class OperationEngine:
    """
    Moteur de simulation à événements discrets de la journée d'exploitation
    (pas horaire au poste source, pas de quelques minutes au départ)
    """

    def __init__(self, random_seed: Optional[int] = None):
        """
        Args:
            random_seed: Graine racine, transmise aux sous-flux nommés
        """
        self.env = simpy.Environment()
        self.logger = EventLogger()
        self.random_seed = random_seed

    def run(self, duration: float):
        """
        Lance la simulation

        Args:
            duration: Durée simulée en minutes
        """
        self.env.run(until=duration)

    def get_summary(self) -> Dict[str, Any]:
        """Récupère un résumé du journal"""
        return self.logger.get_summary()

    def reset(self):
        """Réinitialise l'environnement et le journal"""
        self.env = simpy.Environment()
        self.logger.clear()
