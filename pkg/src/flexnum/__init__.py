"""flexnum: arithmetic and convergence calculus for external numbers.

An external number is a real representative plus a neutrix (a convex additive
group of reals) modelling an order of magnitude of imprecision.  The package
provides, on an asymptotic scale generated by one infinitesimal ``e``:

- ``scale``       neutrices and their algebra
- ``extnum``      external numbers: arithmetic, absolute value, order
- ``seq``         flexible sequences: limits, Cauchy tests, segment limits
- ``recur``       flexible recurrence relations and stability verdicts
- ``apps``        shadow expansions and slow-curve matching
- ``concretize``  the numeric interval model used as a cross-checking oracle
- ``dsl``/``cli`` text syntax and the command-line front end
"""

from . import apps, concretize, dsl, errors, extnum, recur, scale, seq
from .concretize import Concretization
from .extnum import ExternalNumber, FormalSeries
from .scale import Neutrix
from .seq import LimitReport, NormalForm, Segment, Term

__version__ = "0.1.0"

__all__ = [
    "apps",
    "concretize",
    "dsl",
    "errors",
    "extnum",
    "recur",
    "scale",
    "seq",
    "Concretization",
    "ExternalNumber",
    "FormalSeries",
    "Neutrix",
    "LimitReport",
    "NormalForm",
    "Segment",
    "Term",
    "__version__",
]
