"""
Module Grid - Modèle de réseau de distribution

Ce module implémente:
- Les barres (Bus) avec charges par phase et bornes de tension au carré
- Les branches (Branch) avec impédances par phase et limite de courant
- Le réseau (Network) et ses invariants
- Les états d'interrupteurs (SwitchConfig)
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple, List, Optional, Iterable

import networkx as nx

from ..core.errors import ValidationError, TopologyError, ConfigError

PHASES = ('a', 'b', 'c')

BranchKey = Tuple[int, int]


def _check_phases(phases: str) -> str:
    if not phases or any(p not in PHASES for p in phases) or len(set(phases)) != len(phases):
        raise ValidationError(f"phases invalides: {phases!r}")
    return ''.join(p for p in PHASES if p in phases)


@dataclass(frozen=True, eq=False)
class Bus:
    """Barre du réseau (charges en kW/kvar, tensions en pu²)"""
    id: int
    phases: str
    load_p: Dict[str, float]
    load_q: Dict[str, float]
    v_min: float
    v_max: float
    is_slack: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'phases', _check_phases(self.phases))
        if not self.v_min > 0:
            raise ValidationError(f"barre {self.id}: v_min doit être > 0")
        if self.v_min > self.v_max:
            raise ValidationError(f"barre {self.id}: v_min > v_max")
        for name, loads in (('load_p', self.load_p), ('load_q', self.load_q)):
            if set(loads) != set(self.phases):
                raise ValidationError(
                    f"barre {self.id}: {name} doit avoir une entrée par phase déclarée"
                )

    def p(self, phase: str) -> float:
        return self.load_p.get(phase, 0.0)

    def q(self, phase: str) -> float:
        return self.load_q.get(phase, 0.0)

    def total_load(self) -> Tuple[float, float]:
        """(kW, kvar) sommés sur les phases"""
        return sum(self.load_p.values()), sum(self.load_q.values())


@dataclass(frozen=True, eq=False)
class Branch:
    """Branche (ligne ou interrupteur), impédances par phase en pu"""
    from_bus: int
    to_bus: int
    r: Dict[str, float]
    x: Dict[str, float]
    i_max: float
    switchable: bool = False
    initially_closed: bool = True

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise ValidationError(f"branche {self.key}: extrémités identiques")
        if any(v < 0 for v in self.r.values()):
            raise ValidationError(f"branche {self.key}: r négative")
        if not self.i_max > 0:
            raise ValidationError(f"branche {self.key}: i_max doit être > 0")

    @property
    def key(self) -> BranchKey:
        return (self.from_bus, self.to_bus)

    def r_phase(self, phase: str) -> float:
        return self.r.get(phase, 0.0)

    def x_phase(self, phase: str) -> float:
        return self.x.get(phase, 0.0)


@dataclass(frozen=True, eq=False)
class SwitchConfig:
    """
    États des branches manœuvrables : clé de branche -> fermé (True) / ouvert
    """
    states: Dict[BranchKey, bool] = field(default_factory=dict)

    def is_closed(self, key: BranchKey) -> bool:
        return self.states[key]

    def open_switches(self) -> List[BranchKey]:
        return sorted(k for k, closed in self.states.items() if not closed)

    def encoding(self) -> str:
        """Encodage stable, ex: '0110' dans l'ordre des clés triées"""
        return ''.join('1' if self.states[k] else '0' for k in sorted(self.states))

    def label(self) -> str:
        opened = self.open_switches()
        if not opened:
            return "aucun"
        return ' '.join(f"{a}-{b}" for a, b in opened)

    def __eq__(self, other):
        return isinstance(other, SwitchConfig) and self.states == other.states

    def __hash__(self):
        return hash(tuple(sorted(self.states.items())))


def _check_islands(buses, branches):
    """
    Chaque composante du graphe complet contient au moins une slack et
    chaque composante du graphe des branches fixes au plus une
    """
    slacks = {b.id for b in buses if b.is_slack}
    full = nx.Graph()
    full.add_nodes_from(b.id for b in buses)
    full.add_edges_from(br.key for br in branches)
    for component in nx.connected_components(full):
        if not component & slacks:
            raise TopologyError(f"barres non alimentables: {sorted(component)}")
    fixed = nx.Graph()
    fixed.add_nodes_from(b.id for b in buses)
    fixed.add_edges_from(br.key for br in branches if not br.switchable)
    for component in nx.connected_components(fixed):
        tied = sorted(component & slacks)
        if len(tied) > 1:
            raise TopologyError(f"slacks reliées par des branches fixes: {tied}")


@dataclass(frozen=True, eq=False)
class Network:
    """Réseau : barres, branches et bases du système"""
    buses: Tuple[Bus, ...]
    branches: Tuple[Branch, ...]
    base_kv: float = 4.16
    base_kva: float = 1000.0

    def __post_init__(self):
        object.__setattr__(self, 'buses', tuple(self.buses))
        object.__setattr__(self, 'branches', tuple(self.branches))
        ids = [b.id for b in self.buses]
        seen = set()
        for bus_id in ids:
            if bus_id in seen:
                raise ValidationError(f"identifiant de barre dupliqué: {bus_id}")
            seen.add(bus_id)
        if not any(b.is_slack for b in self.buses):
            raise ValidationError("aucune barre slack")
        keys = set()
        for br in self.branches:
            for end in (br.from_bus, br.to_bus):
                if end not in seen:
                    raise TopologyError(f"branche {br.key}: barre {end} inexistante")
            unordered = frozenset(br.key)
            if unordered in keys:
                raise ValidationError(f"branche dupliquée: {br.key}")
            keys.add(unordered)
        if not self.base_kva > 0 or not self.base_kv > 0:
            raise ValidationError("bases du système invalides")
        _check_islands(self.buses, self.branches)
        object.__setattr__(self, '_index', {bus_id: i for i, bus_id in enumerate(ids)})
        object.__setattr__(self, '_by_id', {b.id: b for b in self.buses})

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    def bus(self, bus_id: int) -> Bus:
        return self._by_id[bus_id]

    def index(self, bus_id: int) -> int:
        return self._index[bus_id]

    def slack_ids(self) -> List[int]:
        return [b.id for b in self.buses if b.is_slack]

    def branch(self, key: BranchKey) -> Branch:
        for br in self.branches:
            if br.key == key:
                return br
        raise KeyError(key)

    def switchable_keys(self) -> List[BranchKey]:
        """Clés des branches manœuvrables, triées"""
        return sorted(br.key for br in self.branches if br.switchable)

    def base_config(self) -> SwitchConfig:
        """Configuration initiale (états initially_closed)"""
        return SwitchConfig({br.key: br.initially_closed
                             for br in self.branches if br.switchable})

    def closed_branches(self, cfg: SwitchConfig) -> List[Branch]:
        """Branches fixes plus interrupteurs fermés dans cfg"""
        check_config(self, cfg)
        return [br for br in self.branches
                if not br.switchable or cfg.states[br.key]]

    def phases(self) -> str:
        present = set()
        for b in self.buses:
            present.update(b.phases)
        return ''.join(p for p in PHASES if p in present)

    def with_loads(self, load_p: Dict[int, Dict[str, float]],
                   load_q: Optional[Dict[int, Dict[str, float]]] = None) -> 'Network':
        """
        Copie du réseau avec de nouvelles charges (barres absentes inchangées)
        """
        load_q = load_q or {}
        buses = []
        for b in self.buses:
            p = load_p.get(b.id, b.load_p)
            q = load_q.get(b.id, b.load_q)
            buses.append(Bus(b.id, b.phases,
                             {ph: float(p.get(ph, 0.0)) for ph in b.phases},
                             {ph: float(q.get(ph, 0.0)) for ph in b.phases},
                             b.v_min, b.v_max, b.is_slack))
        return Network(tuple(buses), self.branches, self.base_kv, self.base_kva)

    def scaled(self, factor: float) -> 'Network':
        """Copie du réseau avec toutes les charges multipliées par factor"""
        return self.with_loads(
            {b.id: {ph: v * factor for ph, v in b.load_p.items()} for b in self.buses},
            {b.id: {ph: v * factor for ph, v in b.load_q.items()} for b in self.buses},
        )

    def get_summary(self) -> Dict:
        p_tot = sum(b.total_load()[0] for b in self.buses)
        q_tot = sum(b.total_load()[1] for b in self.buses)
        return {
            'buses': self.n_buses,
            'branches': len(self.branches),
            'switchable': len(self.switchable_keys()),
            'slack': self.slack_ids(),
            'load_kw': p_tot,
            'load_kvar': q_tot,
            'base_kva': self.base_kva,
            'base_kv': self.base_kv
        }


def check_config(net: Network, cfg: SwitchConfig):
    """Vérifie que cfg couvre exactement les branches manœuvrables"""
    expected = set(net.switchable_keys())
    given = set(cfg.states)
    if given != expected:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        raise ConfigError(
            f"configuration incomplète (manquants: {missing}, inconnus: {extra})"
        )


def uniform_bus(bus_id: int, p: float = 0.0, q: float = 0.0, phases: str = 'a',
                v_min: float = 0.81, v_max: float = 1.21, is_slack: bool = False) -> Bus:
    """Barre avec la même charge sur chaque phase déclarée"""
    return Bus(bus_id, phases, {ph: p for ph in phases}, {ph: q for ph in phases},
               v_min, v_max, is_slack)


def uniform_branch(from_bus: int, to_bus: int, r: float, x: float,
                   i_max: float = 100.0, phases: Iterable[str] = PHASES,
                   switchable: bool = False, closed: bool = True) -> Branch:
    """Branche avec la même impédance sur chaque phase"""
    return Branch(from_bus, to_bus, {ph: r for ph in phases}, {ph: x for ph in phases},
                  i_max, switchable, closed)
