from typing import Optional, Tuple


class PpfError(Exception):
    """base error for everything in ppf_dnn"""
    pass


class DataLoadError(PpfError):
    """when we cant load a file"""
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"failed to load {path}: {reason}")


class CaseSyntaxError(PpfError):
    """case text is not well-formed"""
    def __init__(self, line: int, column: int, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


class CaseValidationError(PpfError):
    """case parsed but breaks a network invariant"""
    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class NonConvergenceError(PpfError):
    """newton-raphson ran out of iterations"""
    def __init__(self, iterations: int, max_mismatch: float, solution=None):
        self.iterations = iterations
        self.max_mismatch = max_mismatch
        self.solution = solution
        super().__init__(
            f"power flow did not converge after {iterations} iterations "
            f"(max mismatch {max_mismatch:.3e} p.u.)"
        )


class SingularJacobianError(PpfError):
    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"singular jacobian at iteration {iteration}")


class DistributionError(PpfError):
    """bad distribution parameters in an uncertainty spec"""
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class DatasetError(PpfError):
    """too many samples failed to solve"""
    def __init__(self, failed: int, total: int, limit: float = 0.01):
        self.failed = failed
        self.total = total
        super().__init__(
            f"{failed} of {total} samples did not converge "
            f"(limit {limit:.0%}) - uncertainty spec is probably ill-posed"
        )


class ShapeMismatchError(PpfError):
    def __init__(self, what: str, expected: Tuple, got: Tuple):
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected shape {expected}, got {got}")


class NonFiniteGradientError(PpfError):
    def __init__(self, layer: int):
        self.layer = layer
        super().__init__(f"non-finite gradient at layer {layer}")


class TrainingDivergedError(PpfError):
    def __init__(self, epoch: int, mode: Optional[str] = None):
        self.epoch = epoch
        self.mode = mode
        prefix = f"{mode}: " if mode else ""
        super().__init__(f"{prefix}loss became non-finite at epoch {epoch}")


class ModelFormatError(PpfError):
    """model file is not one of ours, or is truncated"""
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"bad model file {path}: {reason}")


class ReportWriteError(PpfError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"failed to write {path}: {reason}")
