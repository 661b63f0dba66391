"""Exception hierarchy shared by all modules."""


class HyperGibbsError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class EuclideanOrSpherical(HyperGibbsError, ValueError):
    def __init__(self, p, q):
        s = 1 / p + 1 / q
        self.regime = "euclidean" if (p - 2) * (q - 2) == 4 else "spherical"
        super().__init__(
            f"{{{p},{q}}} is {self.regime}: 1/p + 1/q = {s:.6g} >= 1/2"
        )


class ResourceLimitError(HyperGibbsError):
    pass


class TruncationTooShallow(HyperGibbsError):
    pass


class FrontierContamination(HyperGibbsError):
    pass


class MissingSpinError(HyperGibbsError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class OutOfRegionError(HyperGibbsError):
    pass


class DegenerateParameters(HyperGibbsError, ValueError):
    pass


class NeighboringTrees(HyperGibbsError, ValueError):
    pass


class BranchOutOfRange(HyperGibbsError, ValueError):
    pass


class NotSeparating(HyperGibbsError):
    pass


class BudgetError(HyperGibbsError):
    pass
