class PolaronLabError(Exception):
    """Base class for every error raised by the lab."""

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(PolaronLabError):
    pass


class GridError(PolaronLabError, ValueError):
    pass


class BasisBudgetError(PolaronLabError):
    pass


class DimensionMismatchError(PolaronLabError, ValueError):
    pass


class PolarizationError(PolaronLabError, ValueError):
    def __init__(self, detail: str, node=None):
        super().__init__(detail)
        self.node = node


class HermiticityError(PolaronLabError):
    pass


class SpectrumError(PolaronLabError):
    pass


class SolverError(PolaronLabError):
    pass


class SymmetryError(PolaronLabError):
    pass


class SectorError(SymmetryError):
    pass
