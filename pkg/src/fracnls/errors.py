"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Inadmissible parameters or inputs."""


class NumericalError(RuntimeError):
    """Numerical failure: blow-up, non-contraction, non-convergence."""


class BlowUpError(NumericalError):
    def __init__(self, time, msg="non-finite state"):
        super().__init__(f"{msg} at t={time:.6g}")
        self.time = time


class NonContractionError(NumericalError):
    def __init__(self, ratios, msg="iteration does not contract"):
        tail = ", ".join(f"{r:.3g}" for r in ratios[-6:])
        super().__init__(f"{msg}; ratio history [..., {tail}]")
        self.ratios = list(ratios)


class ExpansionError(NumericalError):
    def __init__(self, block, terms, bound):
        super().__init__(
            f"symbol expansion of block (k={block[0]}, j={block[1]}) needs more than {terms} terms "
            f"(tail bound {bound:.3g}); symbol is not admissible at this resolution"
        )
        self.block = block


class QuadratureError(NumericalError):
    def __init__(self, achieved):
        super().__init__(f"quadrature did not converge, achieved tolerance {achieved:.3g}")
        self.achieved = achieved
