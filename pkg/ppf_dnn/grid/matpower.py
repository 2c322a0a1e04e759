"""
Import of MATPOWER .m case files into our JSON case schema.

Only the parts the package models are read: mpc.baseMVA, mpc.bus, mpc.gen,
mpc.branch. Out-of-service generators and branches are skipped; phase
shifters and isolated buses are rejected.
"""

import re
from typing import Dict, List

from ..exceptions import CaseSyntaxError, CaseValidationError
from ..logging_config import get_logger
from ..models.enums import BusKind
from ..models.inputs import BranchRecord, BusRecord, CaseDocument, GenRecord

logger = get_logger("grid")

_BUS_TYPES = {1: BusKind.PQ, 2: BusKind.PV, 3: BusKind.SLACK}

_SCALAR = re.compile(r"mpc\.baseMVA\s*=\s*([^;]+);")
_MATRIX = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\];", re.DOTALL)


def _strip_comments(text: str) -> str:
    # keep line structure so positions stay meaningful
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _line_col(text: str, offset: int):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _parse_matrix(text: str, body: str, body_offset: int) -> List[List[float]]:
    rows = []
    pos = body_offset
    for chunk in re.split(r"[;\n]", body):
        tokens = chunk.replace(",", " ").split()
        if tokens:
            row = []
            for tok in tokens:
                try:
                    row.append(float(tok))
                except ValueError:
                    line, col = _line_col(text, pos + max(chunk.find(tok), 0))
                    raise CaseSyntaxError(line, col, f"not a number: {tok!r}")
            rows.append(row)
        pos += len(chunk) + 1
    return rows


def _matrices(text: str) -> Dict[str, List[List[float]]]:
    out = {}
    for m in _MATRIX.finditer(text):
        out[m.group(1)] = _parse_matrix(text, m.group(2), m.start(2))
    return out


def _need(rows: List[List[float]], width: int, name: str, text: str) -> None:
    for k, row in enumerate(rows):
        if len(row) < width:
            raise CaseValidationError(
                f"short {name} row", f"row {k + 1} has {len(row)} columns, need {width}"
            )


def parse_matpower(text: str, name: str = None) -> CaseDocument:
    """
    Convert MATPOWER case text to a CaseDocument.

    Column semantics follow the matpower manual: bus [BUS_I TYPE PD QD GS BS ...
    VM ...], gen [GEN_BUS PG QG ... VG ... GEN_STATUS], branch [F T R X B
    RATE_A RATE_B RATE_C TAP SHIFT BR_STATUS]. GS/BS are MW/MVAr at 1 p.u. and
    are converted to p.u.; generator VG overrides the bus VM setpoint.
    """
    clean = _strip_comments(text)

    m = _SCALAR.search(clean)
    if m is None:
        raise CaseValidationError("missing mpc.baseMVA")
    try:
        base = float(m.group(1))
    except ValueError:
        line, col = _line_col(clean, m.start(1))
        raise CaseSyntaxError(line, col, f"baseMVA is not a number: {m.group(1).strip()!r}")

    mats = _matrices(clean)
    for key in ("bus", "gen", "branch"):
        if key not in mats:
            raise CaseValidationError(f"missing mpc.{key}")

    bus_rows, gen_rows, br_rows = mats["bus"], mats["gen"], mats["branch"]
    _need(bus_rows, 8, "bus", clean)
    _need(gen_rows, 8, "gen", clean)
    _need(br_rows, 11, "branch", clean)

    vg = {}
    gens = []
    for row in gen_rows:
        if row[7] <= 0:
            continue
        bus_id = int(row[0])
        vg[bus_id] = row[5]
        gens.append(GenRecord(bus=bus_id, p_mw=row[1], q_mvar=row[2]))

    buses = []
    for row in bus_rows:
        bus_id, kind = int(row[0]), int(row[1])
        if kind not in _BUS_TYPES:
            raise CaseValidationError("unsupported bus type", f"bus {bus_id} has type {kind}")
        buses.append(BusRecord(
            id=bus_id,
            kind=_BUS_TYPES[kind],
            p_load_mw=row[2],
            q_load_mvar=row[3],
            v_setpoint=vg.get(bus_id, row[7]),
            shunt_g=row[4] / base,
            shunt_b=row[5] / base,
        ))

    branches = []
    skipped = 0
    for row in br_rows:
        if row[10] <= 0:
            skipped += 1
            continue
        if row[9] != 0:
            raise CaseValidationError(
                "phase shifter not supported", f"branch {int(row[0])}-{int(row[1])} shift {row[9]}"
            )
        branches.append(BranchRecord(
            from_bus=int(row[0]), to_bus=int(row[1]),
            r=row[2], x=row[3], b_charge=row[4], tap=row[8] if row[8] != 0 else 1.0,
        ))
    if skipped:
        logger.info(f"skipped {skipped} out-of-service branches")

    return CaseDocument(name=name, base_mva=base, buses=buses, branches=branches, gens=gens)
