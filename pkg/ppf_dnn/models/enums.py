from enum import Enum


class BusKind(str, Enum):
    SLACK = "slack"
    PV = "pv"
    PQ = "pq"


class Mode(str, Enum):
    """training variants; see ppf_dnn.training.modes for what each switches on"""
    M0 = "M0"
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M4 = "M4"
    M5 = "M5"
    M6 = "M6"


class Guidance(str, Enum):
    """how much of the branch-flow penalty reaches the output gradient"""
    NONE = "none"
    FULL = "full"  # all eight sensitivities, V and theta rows
    ANGLE = "angle"  # theta rows only, P and Q
    ANGLE_ACTIVE = "angle_active"  # theta rows only, P only


class InitScheme(str, Enum):
    HE = "he"
    BALANCED = "balanced"


class StopReason(str, Enum):
    PATIENCE = "patience"
    MAX_EPOCHS = "max_epochs"
    ACCURACY = "accuracy"


class Protocol(str, Enum):
    FIXED_EPOCHS = "fixed-epochs"
    STOP_ON_ACCURACY = "stop-on-accuracy"


class Engine(str, Enum):
    DNN = "dnn"
    NR = "nr"


class LoadRole(str, Enum):
    LOAD = "load"
    GENERATION = "generation"
