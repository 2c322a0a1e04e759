"""
Network case: parsing, validation and the immutable types the rest of the
package reads. All electrical quantities are kept in p.u. on base_mva; the MW /
MVAr figures from the file are kept next to them so a case serializes back
exactly.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..config import config
from ..exceptions import CaseSyntaxError, CaseValidationError, DataLoadError
from ..logging_config import get_logger
from ..models.enums import BusKind
from ..models.inputs import BranchRecord, BusRecord, CaseDocument, GenRecord

logger = get_logger("grid")


@dataclass(frozen=True)
class Bus:
    id: int  # internal 0-based index
    label: int  # id used in the case file
    kind: BusKind
    p_load: float  # p.u.
    q_load: float  # p.u.
    v_setpoint: float
    shunt_g: float
    shunt_b: float
    p_load_mw: float
    q_load_mvar: float


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x: float
    b_charge: float
    tap: float
    g_series: float
    b_series: float

    @classmethod
    def create(cls, from_bus: int, to_bus: int, r: float, x: float,
               b_charge: float = 0.0, tap: float = 1.0) -> "Branch":
        z2 = r * r + x * x
        return cls(
            from_bus=from_bus,
            to_bus=to_bus,
            r=r,
            x=x,
            b_charge=b_charge,
            tap=tap,
            g_series=r / z2,
            b_series=-x / z2,
        )


@dataclass(frozen=True)
class Generator:
    bus: int  # internal index
    p_mw: float
    q_mvar: float
    p_gen: float  # p.u.
    q_gen: float  # p.u.


@dataclass(frozen=True)
class NetworkCase:
    buses: Tuple[Bus, ...]
    branches: Tuple[Branch, ...]
    generators: Tuple[Generator, ...]
    base_mva: float = 100.0
    name: Optional[str] = None
    simplified: bool = True

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def n_branch(self) -> int:
        return len(self.branches)

    @property
    def slack(self) -> int:
        return next(b.id for b in self.buses if b.kind == BusKind.SLACK)

    @property
    def pv(self) -> np.ndarray:
        return np.array([b.id for b in self.buses if b.kind == BusKind.PV], dtype=np.int64)

    @property
    def pq(self) -> np.ndarray:
        return np.array([b.id for b in self.buses if b.kind == BusKind.PQ], dtype=np.int64)

    def v_setpoints(self) -> np.ndarray:
        # PQ setpoints are just the flat-start guess
        return np.array([
            b.v_setpoint if b.kind != BusKind.PQ else 1.0 for b in self.buses
        ])

    def base_injections(self) -> Tuple[np.ndarray, np.ndarray]:
        """scheduled net injections (p.u.); generator Q only counts at PQ buses"""
        p = -np.array([b.p_load for b in self.buses])
        q = -np.array([b.q_load for b in self.buses])
        for g in self.generators:
            p[g.bus] += g.p_gen
            if self.buses[g.bus].kind == BusKind.PQ:
                q[g.bus] += g.q_gen
        return p, q


def _from_document(doc: CaseDocument, simplified: bool) -> NetworkCase:
    if not doc.base_mva > 0:
        raise CaseValidationError("non-positive base_mva", f"base_mva = {doc.base_mva}")
    if not doc.buses:
        raise CaseValidationError("empty case", "no buses")

    index = {}
    for pos, rec in enumerate(doc.buses):
        if rec.id in index:
            raise CaseValidationError("duplicate bus id", f"bus {rec.id}")
        index[rec.id] = pos

    slacks = [rec.id for rec in doc.buses if rec.kind == BusKind.SLACK]
    if not slacks:
        raise CaseValidationError("missing slack bus")
    if len(slacks) > 1:
        raise CaseValidationError("multiple slack buses", f"buses {slacks}")

    base = doc.base_mva
    buses = []
    for pos, rec in enumerate(doc.buses):
        if rec.kind != BusKind.PQ and not rec.v_setpoint > 0:
            raise CaseValidationError(
                "non-positive voltage setpoint", f"bus {rec.id} has v_setpoint {rec.v_setpoint}"
            )
        buses.append(Bus(
            id=pos,
            label=rec.id,
            kind=rec.kind,
            p_load=rec.p_load_mw / base,
            q_load=rec.q_load_mvar / base,
            v_setpoint=rec.v_setpoint,
            shunt_g=rec.shunt_g,
            shunt_b=rec.shunt_b,
            p_load_mw=rec.p_load_mw,
            q_load_mvar=rec.q_load_mvar,
        ))

    branches = []
    dropped = 0
    for k, rec in enumerate(doc.branches):
        for end in (rec.from_bus, rec.to_bus):
            if end not in index:
                raise CaseValidationError("dangling branch", f"branch {k} references unknown bus {end}")
        if rec.from_bus == rec.to_bus:
            raise CaseValidationError("self-loop branch", f"branch {k} connects bus {rec.from_bus} to itself")
        if rec.r * rec.r + rec.x * rec.x == 0:
            raise CaseValidationError("zero impedance branch", f"branch {k} ({rec.from_bus}-{rec.to_bus})")

        tap = rec.tap if rec.tap != 0 else 1.0  # matpower writes 0 for plain lines
        b_charge = rec.b_charge
        if simplified and (tap != 1.0 or b_charge != 0.0):
            dropped += 1
            tap, b_charge = 1.0, 0.0

        branches.append(Branch.create(
            index[rec.from_bus], index[rec.to_bus], rec.r, rec.x, b_charge, tap
        ))

    if dropped:
        logger.warning(
            f"simplified model: dropped taps / line charging on {dropped} of {len(branches)} branches"
        )

    generators = []
    for rec in doc.gens:
        if rec.bus not in index:
            raise CaseValidationError("dangling generator", f"generator at unknown bus {rec.bus}")
        generators.append(Generator(
            bus=index[rec.bus],
            p_mw=rec.p_mw,
            q_mvar=rec.q_mvar,
            p_gen=rec.p_mw / base,
            q_gen=rec.q_mvar / base,
        ))

    _check_connected(len(buses), branches)

    return NetworkCase(
        buses=tuple(buses),
        branches=tuple(branches),
        generators=tuple(generators),
        base_mva=base,
        name=doc.name,
        simplified=simplified,
    )


def _check_connected(n: int, branches) -> None:
    if n == 1:
        return
    f = [br.from_bus for br in branches]
    t = [br.to_bus for br in branches]
    graph = csr_matrix((np.ones(len(f)), (f, t)), shape=(n, n))
    count, labels = connected_components(graph, directed=False)
    if count > 1:
        island = np.flatnonzero(labels != labels[0])
        raise CaseValidationError(
            "disconnected network", f"{count} components, e.g. bus index {int(island[0])} is unreachable"
        )


def parse_case(text: str, simplified: bool = None) -> NetworkCase:
    """
    Parse a JSON case document into a validated NetworkCase.

    Args:
        text: case file content
        simplified: force taps to 1 and drop line charging (default from config)

    Raises:
        CaseSyntaxError: text is not valid JSON (line/column annotated)
        CaseValidationError: schema violation or a broken network invariant
    """
    if simplified is None:
        simplified = config.solver.simplified_model

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise CaseSyntaxError(e.lineno, e.colno, e.msg) from e

    try:
        doc = CaseDocument.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise CaseValidationError("schema", f"{where}: {first['msg']}") from e

    return _from_document(doc, simplified)


def to_document(case: NetworkCase) -> CaseDocument:
    by_index = {b.id: b.label for b in case.buses}
    return CaseDocument(
        name=case.name,
        base_mva=case.base_mva,
        buses=[
            BusRecord(
                id=b.label,
                kind=b.kind,
                p_load_mw=b.p_load_mw,
                q_load_mvar=b.q_load_mvar,
                v_setpoint=b.v_setpoint,
                shunt_g=b.shunt_g,
                shunt_b=b.shunt_b,
            )
            for b in case.buses
        ],
        branches=[
            BranchRecord(
                from_bus=by_index[br.from_bus],
                to_bus=by_index[br.to_bus],
                r=br.r,
                x=br.x,
                b_charge=br.b_charge,
                tap=br.tap,
            )
            for br in case.branches
        ],
        gens=[
            GenRecord(bus=by_index[g.bus], p_mw=g.p_mw, q_mvar=g.q_mvar)
            for g in case.generators
        ],
    )


def serialize_case(case: NetworkCase) -> str:
    data = to_document(case).model_dump(mode="json", by_alias=True)
    return json.dumps(data, indent=2)


def load_case(path: Path, simplified: bool = None) -> NetworkCase:
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), "file not found")
    with open(path, encoding="utf-8") as f:
        text = f.read()
    case = parse_case(text, simplified=simplified)
    if case.name is None:
        # fall back to the file stem so models and reports can name their case
        case = NetworkCase(
            buses=case.buses,
            branches=case.branches,
            generators=case.generators,
            base_mva=case.base_mva,
            name=path.stem,
            simplified=case.simplified,
        )
    return case


def bundled_case_path(name: str) -> Path:
    """path of a case shipped with the package, e.g. 'case30'"""
    return Path(__file__).resolve().parent.parent / "data" / f"{name}.json"
