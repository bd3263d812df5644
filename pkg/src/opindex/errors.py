"""Exception types raised across the package."""


class OpIndexError(Exception):
    """Base class for all package errors."""


class NotInCSError(OpIndexError):
    def __init__(self, what: str = ""):
        super().__init__("symbol not in CS(R)" + (f": {what}" if what else ""))


class NotInvertibleError(OpIndexError):
    def __init__(self, min_abs: float):
        super().__init__(f"symbol not invertible (min |sample| = {min_abs:.3e})")
        self.min_abs = min_abs


class UndersampledLoopError(OpIndexError):
    def __init__(self, step: float, position: int):
        super().__init__(f"undersampled loop (phase step {step:.3f} rad at sample {position})")
        self.step = step
        self.position = position


class GridIncommensurableError(OpIndexError):
    def __init__(self, j: int, spacing: float):
        super().__init__(
            f"grid incommensurable with unit translation (j={j}, spacing={spacing!r})")


class NotFredholmError(OpIndexError):
    def __init__(self, min_abs: float):
        super().__init__(f"not Fredholm: symbol vanishes on the probe (min |phi| = {min_abs:.3e})")
        self.min_abs = min_abs


class NotTraceReadyError(OpIndexError):
    def __init__(self, detail: str):
        super().__init__(f"not trace-ready at this truncation: {detail}")


class SupportLeakError(OpIndexError):
    def __init__(self, phi: float, leak: float):
        super().__init__(f"support leak {leak:.3e} beyond the single site at phi={phi!r}")
        self.phi = phi
        self.leak = leak


class InconsistentDiagramError(OpIndexError):
    def __init__(self, node: str, detail: str = ""):
        super().__init__(f"inconsistent constraints at node {node}" + (f": {detail}" if detail else ""))
        self.node = node


class CorroborationError(OpIndexError):
    """A reliable independent check disagrees with the primary computation."""
