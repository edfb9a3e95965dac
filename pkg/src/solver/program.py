"""
Module Solver - Programme conique

Ce module implémente:
- ConicProgram : variables nommées, objectif (linéaire + quadratique
  diagonal), contraintes d'égalité creuses, bornes, appartenances aux cônes
- ProgramBuilder : construction incrémentale compilée en matrices creuses
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .cones import svec_dim
from ..core.errors import ProgramError

SOC = "SOC"
PSD = "PSD"

Indices = Union[Sequence[int], np.ndarray]


@dataclass(frozen=True)
class ConeBlock:
    """
    Appartenance d'un tuple de variables à un cône

    SOC : indices = (t, u_1, ..., u_k), contrainte ‖u‖ ≤ t.
    PSD : indices = svec du bloc size×size (hermitien si hermitian).
    """
    kind: str
    indices: Tuple[int, ...]
    size: int = 0
    hermitian: bool = False
    label: Optional[str] = None

    def signature(self) -> Tuple:
        return (self.kind, len(self.indices), self.size, self.hermitian)


@dataclass
class ConicProgram:
    """
    min  ½ zᵀ diag(q) z + cᵀ z + constant
    s.c. A z = b,  lb ≤ z ≤ ub,  z[bloc] ∈ cône pour chaque ConeBlock
    """
    blocks: Dict[str, np.ndarray]
    c: np.ndarray
    q: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    cones: List[ConeBlock] = field(default_factory=list)
    constant: float = 0.0
    row_labels: List[str] = field(default_factory=list)
    meta: Dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def validate(self):
        """
        Vérifie la cohérence des dimensions

        Raises:
            ProgramError: dimension incohérente
        """
        n = self.n
        for name, arr in (('q', self.q), ('lb', self.lb), ('ub', self.ub)):
            if arr.shape != (n,):
                raise ProgramError(f"{name}: dimension {arr.shape} au lieu de ({n},)")
        if self.A.shape[1] != n:
            raise ProgramError(f"A: {self.A.shape[1]} colonnes pour {n} variables")
        if self.b.shape != (self.A.shape[0],):
            raise ProgramError(f"b: dimension {self.b.shape} pour {self.A.shape[0]} lignes")
        if np.any(self.lb > self.ub):
            raise ProgramError("borne inférieure > borne supérieure")
        if np.any(self.q < 0):
            raise ProgramError("coefficient quadratique négatif")
        for name, idx in self.blocks.items():
            if len(idx) and (idx.min() < 0 or idx.max() >= n):
                raise ProgramError(f"bloc {name}: indice hors bornes")
        for cone in self.cones:
            idx = np.asarray(cone.indices)
            if len(idx) == 0 or idx.min() < 0 or idx.max() >= n:
                raise ProgramError(f"cône {cone.label}: indice hors bornes")
            if cone.kind == SOC:
                if len(idx) < 2:
                    raise ProgramError(f"cône SOC {cone.label}: au moins 2 variables")
            elif cone.kind == PSD:
                if len(idx) != svec_dim(cone.size, cone.hermitian):
                    raise ProgramError(
                        f"cône PSD {cone.label}: {len(idx)} variables pour un bloc "
                        f"{cone.size}×{cone.size}"
                    )
            else:
                raise ProgramError(f"type de cône inconnu: {cone.kind}")

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * np.dot(self.q * z, z) + np.dot(self.c, z) + self.constant)

    def value(self, z: np.ndarray, name: str) -> np.ndarray:
        return z[self.blocks[name]]

    def equality_residual(self, z: np.ndarray) -> np.ndarray:
        return self.A @ z - self.b

    def get_stats(self) -> Dict:
        return {
            'variables': self.n,
            'equalities': self.m,
            'soc_blocks': sum(1 for c in self.cones if c.kind == SOC),
            'psd_blocks': sum(1 for c in self.cones if c.kind == PSD),
            'nnz': int(self.A.nnz)
        }


class ProgramBuilder:
    """
    Construction incrémentale d'un ConicProgram

    Exemple :
        pb = ProgramBuilder()
        x = pb.add_variable('x', 2)
        pb.add_equality({x[0]: 1.0, x[1]: -1.0}, 0.0)
        pb.add_quadratic(x[0], 2.0)
        prog = pb.build()
    """

    def __init__(self):
        self._blocks: Dict[str, np.ndarray] = {}
        self._c: List[float] = []
        self._q: List[float] = []
        self._lb: List[float] = []
        self._ub: List[float] = []
        self._rows: List[int] = []
        self._cols: List[int] = []
        self._vals: List[float] = []
        self._b: List[float] = []
        self._labels: List[str] = []
        self._cones: List[ConeBlock] = []
        self.constant = 0.0
        self.meta: Dict = {}

    @property
    def n(self) -> int:
        return len(self._c)

    def add_variable(self, name: str, size: int = 1,
                     lb: float = -np.inf, ub: float = np.inf) -> np.ndarray:
        """
        Déclare un bloc de variables

        Returns:
            Indices des variables créées
        """
        if name in self._blocks:
            raise ProgramError(f"variable déjà déclarée: {name}")
        if size < 0:
            raise ProgramError(f"taille négative pour {name}")
        start = self.n
        idx = np.arange(start, start + size)
        self._blocks[name] = idx
        self._c.extend([0.0] * size)
        self._q.extend([0.0] * size)
        self._lb.extend([lb] * size)
        self._ub.extend([ub] * size)
        return idx

    def block(self, name: str) -> np.ndarray:
        return self._blocks[name]

    def _check_index(self, i: int):
        if not 0 <= i < self.n:
            raise ProgramError(f"variable {i} non déclarée")

    def set_bounds(self, i: int, lb: float = -np.inf, ub: float = np.inf):
        self._check_index(i)
        if lb > ub:
            raise ProgramError(f"variable {i}: bornes [{lb}, {ub}] vides")
        self._lb[i] = lb
        self._ub[i] = ub

    def set_cost(self, i: int, c: float):
        self._check_index(i)
        self._c[i] = c

    def add_cost(self, i: int, c: float):
        self._check_index(i)
        self._c[i] += c

    def add_quadratic(self, i: int, q: float):
        """Ajoute ½·q·z_i² à l'objectif"""
        self._check_index(i)
        self._q[i] += q

    def add_equality(self, coeffs: Dict[int, float], rhs: float, label: str = ""):
        """Ajoute la ligne Σ coeffs[i]·z_i = rhs"""
        row = len(self._b)
        for i, a in coeffs.items():
            self._check_index(int(i))
            if a != 0.0:
                self._rows.append(row)
                self._cols.append(int(i))
                self._vals.append(float(a))
        self._b.append(float(rhs))
        self._labels.append(label)
        return row

    def add_cone(self, kind: str, indices: Indices, size: int = 0,
                 hermitian: bool = False, label: Optional[str] = None):
        for i in indices:
            self._check_index(int(i))
        self._cones.append(ConeBlock(kind, tuple(int(i) for i in indices),
                                     size, hermitian, label))

    def build(self) -> ConicProgram:
        n = self.n
        m = len(self._b)
        a = sp.coo_matrix((self._vals, (self._rows, self._cols)), shape=(m, n)).tocsr()
        a.sum_duplicates()
        prog = ConicProgram(
            blocks=dict(self._blocks),
            c=np.array(self._c, dtype=float),
            q=np.array(self._q, dtype=float),
            A=a,
            b=np.array(self._b, dtype=float),
            lb=np.array(self._lb, dtype=float),
            ub=np.array(self._ub, dtype=float),
            cones=list(self._cones),
            constant=self.constant,
            row_labels=list(self._labels),
            meta=dict(self.meta)
        )
        prog.validate()
        return prog
