"""
Lecture des fichiers de départ (buses.csv / branches.csv).

Formats :
    buses.csv    id,phases,p_a,q_a,p_b,q_b,p_c,q_c,vmin2,vmax2,slack
    branches.csv from,to,r_a,x_a,r_b,x_b,r_c,x_c,imax2,switchable,closed
Les lignes commençant par '#' sont des commentaires.
"""

from pathlib import Path
from typing import List, Tuple, Union

import pandas as pd

from .network import Bus, Branch, Network, PHASES
from ..core.errors import ParseError, MissingInputError, ValidationError

BUS_COLUMNS = ['id', 'phases', 'p_a', 'q_a', 'p_b', 'q_b', 'p_c', 'q_c',
               'vmin2', 'vmax2', 'slack']
BRANCH_COLUMNS = ['from', 'to', 'r_a', 'x_a', 'r_b', 'x_b', 'r_c', 'x_c',
                  'imax2', 'switchable', 'closed']

PathLike = Union[str, Path]


def _data_line_numbers(path: Path) -> List[int]:
    """Numéros de ligne (1-based) des lignes non vides hors commentaires"""
    numbers = []
    with open(path, 'r', encoding='utf-8') as f:
        for i, line in enumerate(f, start=1):
            stripped = line.strip()
            if stripped and not stripped.startswith('#'):
                numbers.append(i)
    return numbers


def _read_table(path: PathLike, columns: List[str]) -> Tuple[pd.DataFrame, List[int]]:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(str(path))
    lines = _data_line_numbers(path)
    if not lines:
        raise ParseError(str(path), 0, "fichier vide")
    try:
        df = pd.read_csv(path, comment='#', dtype=str, skipinitialspace=True,
                         keep_default_na=False)
    except pd.errors.ParserError as e:
        raise ParseError(str(path), 0, str(e))
    df.columns = [c.strip() for c in df.columns]
    if list(df.columns) != columns:
        raise ParseError(str(path), lines[0],
                         f"en-tête attendu {','.join(columns)}")
    return df, lines[1:]


def _number(path, row, value: str, name: str) -> float:
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise ParseError(str(path), row, f"{name}: nombre invalide {value!r}")
    if result != result or result in (float('inf'), float('-inf')):
        raise ParseError(str(path), row, f"{name}: valeur non finie")
    return result


def _integer(path, row, value: str, name: str) -> int:
    number = _number(path, row, value, name)
    if number != int(number):
        raise ParseError(str(path), row, f"{name}: entier attendu {value!r}")
    return int(number)


def _flag(path, row, value: str, name: str) -> bool:
    if value.strip() not in ('0', '1'):
        raise ParseError(str(path), row, f"{name}: 0 ou 1 attendu, reçu {value!r}")
    return value.strip() == '1'


def parse_feeder(bus_file: PathLike, branch_file: PathLike,
                 base_kv: float = 4.16, base_kva: float = 1000.0) -> Network:
    """
    Construit un Network validé à partir des deux fichiers CSV

    Args:
        bus_file: Chemin de buses.csv
        branch_file: Chemin de branches.csv
        base_kv: Tension de base (kV)
        base_kva: Puissance de base (kVA)

    Returns:
        Network validé

    Raises:
        ParseError: ligne mal formée (numéro de ligne dans le message)
        TopologyError: extrémité de branche inexistante
        ValidationError: identifiant dupliqué, bornes incohérentes
    """
    bus_df, bus_rows = _read_table(bus_file, BUS_COLUMNS)
    buses = []
    for (_, rec), row in zip(bus_df.iterrows(), bus_rows):
        bus_id = _integer(bus_file, row, rec['id'], 'id')
        phases = rec['phases'].strip()
        if not phases or any(p not in PHASES for p in phases):
            raise ParseError(str(bus_file), row, f"phases invalides {phases!r}")
        load_p = {ph: _number(bus_file, row, rec[f'p_{ph}'], f'p_{ph}') for ph in phases}
        load_q = {ph: _number(bus_file, row, rec[f'q_{ph}'], f'q_{ph}') for ph in phases}
        try:
            buses.append(Bus(
                id=bus_id,
                phases=phases,
                load_p=load_p,
                load_q=load_q,
                v_min=_number(bus_file, row, rec['vmin2'], 'vmin2'),
                v_max=_number(bus_file, row, rec['vmax2'], 'vmax2'),
                is_slack=_flag(bus_file, row, rec['slack'], 'slack')
            ))
        except ValidationError as e:
            raise ValidationError(f"{bus_file}, ligne {row}: {e}")

    branch_df, branch_rows = _read_table(branch_file, BRANCH_COLUMNS)
    branches = []
    for (_, rec), row in zip(branch_df.iterrows(), branch_rows):
        try:
            branches.append(Branch(
                from_bus=_integer(branch_file, row, rec['from'], 'from'),
                to_bus=_integer(branch_file, row, rec['to'], 'to'),
                r={ph: _number(branch_file, row, rec[f'r_{ph}'], f'r_{ph}') for ph in PHASES},
                x={ph: _number(branch_file, row, rec[f'x_{ph}'], f'x_{ph}') for ph in PHASES},
                i_max=_number(branch_file, row, rec['imax2'], 'imax2'),
                switchable=_flag(branch_file, row, rec['switchable'], 'switchable'),
                initially_closed=_flag(branch_file, row, rec['closed'], 'closed')
            ))
        except ValidationError as e:
            raise ValidationError(f"{branch_file}, ligne {row}: {e}")

    return Network(tuple(buses), tuple(branches), base_kv, base_kva)


def write_feeder(net: Network, bus_file: PathLike, branch_file: PathLike):
    """Écrit un Network au format CSV lu par parse_feeder"""
    bus_records = []
    for b in net.buses:
        rec = {'id': b.id, 'phases': b.phases}
        for ph in PHASES:
            rec[f'p_{ph}'] = b.p(ph)
            rec[f'q_{ph}'] = b.q(ph)
        rec.update({'vmin2': b.v_min, 'vmax2': b.v_max, 'slack': int(b.is_slack)})
        bus_records.append(rec)
    pd.DataFrame(bus_records, columns=BUS_COLUMNS).to_csv(bus_file, index=False)

    branch_records = []
    for br in net.branches:
        rec = {'from': br.from_bus, 'to': br.to_bus}
        for ph in PHASES:
            rec[f'r_{ph}'] = br.r_phase(ph)
            rec[f'x_{ph}'] = br.x_phase(ph)
        rec.update({'imax2': br.i_max, 'switchable': int(br.switchable),
                    'closed': int(br.initially_closed)})
        branch_records.append(rec)
    pd.DataFrame(branch_records, columns=BRANCH_COLUMNS).to_csv(branch_file, index=False)
