# grid subpackage
from .case import (
    Branch,
    Bus,
    Generator,
    NetworkCase,
    bundled_case_path,
    load_case,
    parse_case,
    serialize_case,
    to_document,
)
from .matpower import parse_matpower
from .ybus import AdmittanceMatrix, build_ybus

__all__ = [
    "AdmittanceMatrix",
    "Branch",
    "Bus",
    "Generator",
    "NetworkCase",
    "build_ybus",
    "bundled_case_path",
    "load_case",
    "parse_case",
    "parse_matpower",
    "serialize_case",
    "to_document",
]
