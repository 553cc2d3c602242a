"""Exact-arithmetic effective slice spectral sequences.

The package computes the slice E_1 pages of the very effective cover ko of
hermitian K-theory and of the fiber L of psi^3 - 1 on it, turns pages with
integer homology, carries the eta-inverted comparison, applies the hidden
extension ledger, assembles homotopy groups, and draws the charts.  All
arithmetic is over Python integers, so results are exact.
"""

__version__ = "0.1.0"

from .grading import (  # noqa: F401
    EffssError,
    PresentationError,
    TriDegree,
    GeneratorSpec,
    RewriteRule,
    RingPresentation,
)
from .engine import (  # noqa: F401
    EngineError,
    NotCertifiedError,
    ObjectSpec,
    PageGroup,
    SliceSS,
    Window,
)
from .objects import (  # noqa: F401
    ALL_OBJECTS,
    ETA_LOCAL,
    TRI_GRADED,
    get_object,
    spec_from_dict,
    spec_to_dict,
)
from .fiber import FiberError, splitting_report, val_3_pow_minus_1  # noqa: F401
from .eta import EtaObject, compare, eta_schedule, get_eta, parse_eta  # noqa: F401
from .assemble import (  # noqa: F401
    AssembleError,
    HiddenExtension,
    HomotopyGroup,
    LedgerError,
    assemble,
    expand_ledger,
    load_ledger,
    order_pattern_check,
)
from .charts import (  # noqa: F401
    ChartDatum,
    ChartError,
    ChartSpec,
    chart_data,
    emit_svg,
    parse_chart_text,
    render_chart_text,
)
from .verify import CHECKS, run_check  # noqa: F401
