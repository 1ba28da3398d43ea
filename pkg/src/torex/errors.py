"""Exception hierarchy. Every error names the violated invariant in its message."""


class TorexError(Exception):
    pass


class InputError(TorexError):
    """Bad user input (CLI maps these to exit code 2)."""


class MalformedDocument(InputError):
    pass


class UnboundedPolytope(InputError):
    pass


class NotSimple(InputError):
    pass


class EmptyInterior(InputError):
    pass


class NotUnimodular(InputError):
    pass


class DegreeTooHigh(TorexError):
    pass


class SingularGram(TorexError):
    pass


class DegenerateCrease(TorexError):
    pass


class NotQuadrilateral(TorexError):
    pass


class NotTriangle(TorexError):
    pass


class MixedUnstable(TorexError):
    pass


class OppositeCusps(TorexError):
    pass


class InconsistentBeta(TorexError):
    pass


class PositivityFailure(TorexError):
    pass


class NoRootInInterval(TorexError):
    pass


class NotSimplexNormalized(TorexError):
    pass


class OutsideDomain(TorexError):
    pass


class GridTooCoarse(TorexError):
    pass


class UnknownChart(TorexError):
    pass


class NonPositiveAlpha(TorexError):
    pass


class NoAdmissibleNormalization(TorexError):
    pass


class AlphaPole(TorexError):
    """a0*l = 4 in the explicit (alpha, beta) formula."""


class ConsistencyFailure(TorexError):
    """Internal cross-check failed (CLI exit code 3)."""
