"""Built-in machine corpus.

Ten machines, each stored as canonical format text so that the parser is the
single construction path and every constant enters as an exact expression
rather than a hand-typed decimal.  The five single machines all have one
internal state and a trivial shared symbol, so their tables are exactly
their outcome distributions q(A, B | a, b).

Expected reports: the four conditional expectations, the CHSH combination,
and its classification for each entry.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .belltest import ChshReport
from .core import BellsimError
from .mdf import MdfDocument, parse


class UnknownNameError(BellsimError):
    def __init__(self, name: str):
        super().__init__(f"no machine named {name!r} (see names())")
        self.name = name


_RT2 = math.sqrt(2.0)
_HALF_RT2 = _RT2 / 2.0

_M1 = """\
machine fpsm M1
inputs (0,0,l0) (0,1,l0) (1,0,l0) (1,1,l0)
outputs (-1,-1) (-1,1) (1,-1) (1,1)
states s0
init s0 = 1
p[(-1,-1), s0 | (0,0,l0), s0] = 1/4
p[(-1,-1), s0 | (0,1,l0), s0] = 1/4
p[(-1,-1), s0 | (1,0,l0), s0] = 1/4
p[(-1,-1), s0 | (1,1,l0), s0] = 1/4
p[(-1,1), s0 | (0,0,l0), s0] = 1/4
p[(-1,1), s0 | (0,1,l0), s0] = 1/4
p[(-1,1), s0 | (1,0,l0), s0] = 1/4
p[(-1,1), s0 | (1,1,l0), s0] = 1/4
p[(1,-1), s0 | (0,0,l0), s0] = 1/4
p[(1,-1), s0 | (0,1,l0), s0] = 1/4
p[(1,-1), s0 | (1,0,l0), s0] = 1/4
p[(1,-1), s0 | (1,1,l0), s0] = 1/4
p[(1,1), s0 | (0,0,l0), s0] = 1/4
p[(1,1), s0 | (0,1,l0), s0] = 1/4
p[(1,1), s0 | (1,0,l0), s0] = 1/4
p[(1,1), s0 | (1,1,l0), s0] = 1/4
"""

_M2 = """\
machine fpsm M2
inputs (0,0,l0) (0,1,l0) (1,0,l0) (1,1,l0)
outputs (-1,-1) (-1,1) (1,-1) (1,1)
states s0
init s0 = 1
p[(1,1), s0 | (0,0,l0), s0] = 1
p[(1,1), s0 | (0,1,l0), s0] = 1
p[(1,1), s0 | (1,0,l0), s0] = 1
p[(1,1), s0 | (1,1,l0), s0] = 1
"""

_M3 = """\
machine fpsm M3
inputs (0,0,l0) (0,1,l0) (1,0,l0) (1,1,l0)
outputs (-1,-1) (-1,1) (1,-1) (1,1)
states s0
init s0 = 1
p[(1,-1), s0 | (1,1,l0), s0] = 1
p[(1,1), s0 | (0,0,l0), s0] = 1
p[(1,1), s0 | (0,1,l0), s0] = 1
p[(1,1), s0 | (1,0,l0), s0] = 1
"""

_M4 = """\
machine fpsm M4
inputs (0,0,l0) (0,1,l0) (1,0,l0) (1,1,l0)
outputs (-1,-1) (-1,1) (1,-1) (1,1)
states s0
init s0 = 1
p[(-1,-1), s0 | (0,0,l0), s0] = 1/2
p[(-1,-1), s0 | (0,1,l0), s0] = 1/2
p[(-1,-1), s0 | (1,0,l0), s0] = 1/2
p[(-1,1), s0 | (1,1,l0), s0] = 1/2
p[(1,-1), s0 | (1,1,l0), s0] = 1/2
p[(1,1), s0 | (0,0,l0), s0] = 1/2
p[(1,1), s0 | (0,1,l0), s0] = 1/2
p[(1,1), s0 | (1,0,l0), s0] = 1/2
"""

_M5 = """\
machine fpsm M5
inputs (0,0,l0) (0,1,l0) (1,0,l0) (1,1,l0)
outputs (-1,-1) (-1,1) (1,-1) (1,1)
states s0
init s0 = 1
p[(-1,-1), s0 | (0,0,l0), s0] = (2+sqrt(2))/8
p[(-1,-1), s0 | (0,1,l0), s0] = (2+sqrt(2))/8
p[(-1,-1), s0 | (1,0,l0), s0] = (2+sqrt(2))/8
p[(-1,-1), s0 | (1,1,l0), s0] = (2-sqrt(2))/8
p[(-1,1), s0 | (0,0,l0), s0] = (2-sqrt(2))/8
p[(-1,1), s0 | (0,1,l0), s0] = (2-sqrt(2))/8
p[(-1,1), s0 | (1,0,l0), s0] = (2-sqrt(2))/8
p[(-1,1), s0 | (1,1,l0), s0] = (2+sqrt(2))/8
p[(1,-1), s0 | (0,0,l0), s0] = (2-sqrt(2))/8
p[(1,-1), s0 | (0,1,l0), s0] = (2-sqrt(2))/8
p[(1,-1), s0 | (1,0,l0), s0] = (2-sqrt(2))/8
p[(1,-1), s0 | (1,1,l0), s0] = (2+sqrt(2))/8
p[(1,1), s0 | (0,0,l0), s0] = (2+sqrt(2))/8
p[(1,1), s0 | (0,1,l0), s0] = (2+sqrt(2))/8
p[(1,1), s0 | (1,0,l0), s0] = (2+sqrt(2))/8
p[(1,1), s0 | (1,1,l0), s0] = (2-sqrt(2))/8
"""

_M1_PAIR = """\
machine pair_fpsm M1_pair
lambda l0
states_a s0
states_b s0
init_a s0 = 1
init_b s0 = 1
pa[-1, s0 | 0, 0, l0, s0] = 1/2
pa[-1, s0 | 0, 1, l0, s0] = 1/2
pa[-1, s0 | 1, 0, l0, s0] = 1/2
pa[-1, s0 | 1, 1, l0, s0] = 1/2
pa[1, s0 | 0, 0, l0, s0] = 1/2
pa[1, s0 | 0, 1, l0, s0] = 1/2
pa[1, s0 | 1, 0, l0, s0] = 1/2
pa[1, s0 | 1, 1, l0, s0] = 1/2
pb[-1, s0 | 0, 0, l0, s0] = 1/2
pb[-1, s0 | 0, 1, l0, s0] = 1/2
pb[-1, s0 | 1, 0, l0, s0] = 1/2
pb[-1, s0 | 1, 1, l0, s0] = 1/2
pb[1, s0 | 0, 0, l0, s0] = 1/2
pb[1, s0 | 0, 1, l0, s0] = 1/2
pb[1, s0 | 1, 0, l0, s0] = 1/2
pb[1, s0 | 1, 1, l0, s0] = 1/2
"""

_M2_PAIR = """\
machine pair_fpsm M2_pair
lambda l0
states_a s0
states_b s0
init_a s0 = 1
init_b s0 = 1
pa[1, s0 | 0, 0, l0, s0] = 1
pa[1, s0 | 0, 1, l0, s0] = 1
pa[1, s0 | 1, 0, l0, s0] = 1
pa[1, s0 | 1, 1, l0, s0] = 1
pb[1, s0 | 0, 0, l0, s0] = 1
pb[1, s0 | 0, 1, l0, s0] = 1
pb[1, s0 | 1, 0, l0, s0] = 1
pb[1, s0 | 1, 1, l0, s0] = 1
"""

_M3_PAIR = """\
machine pair_fpsm M3_pair
lambda l0
states_a s0
states_b s0
init_a s0 = 1
init_b s0 = 1
pa[1, s0 | 0, 0, l0, s0] = 1
pa[1, s0 | 0, 1, l0, s0] = 1
pa[1, s0 | 1, 0, l0, s0] = 1
pa[1, s0 | 1, 1, l0, s0] = 1
pb[-1, s0 | 1, 1, l0, s0] = 1
pb[1, s0 | 0, 0, l0, s0] = 1
pb[1, s0 | 0, 1, l0, s0] = 1
pb[1, s0 | 1, 0, l0, s0] = 1
"""

_Q_TABLES = """\
phia[-1, 0 | 0, 0] = 1
phia[-1, 0 | 1, 0] = 1/sqrt(2)
phia[-1, 0 | 1, 1] = 1/sqrt(2)
phia[1, 1 | 0, 1] = 1
phia[1, 1 | 1, 0] = 1/sqrt(2)
phia[1, 1 | 1, 1] = -1/sqrt(2)
phib[-1, 0 | 0, 0] = -1/sqrt(4+2*sqrt(2))
phib[-1, 0 | 0, 1] = (1+sqrt(2))/sqrt(4+2*sqrt(2))
phib[-1, 0 | 1, 0] = 1/sqrt(4+2*sqrt(2))
phib[-1, 0 | 1, 1] = (1+sqrt(2))/sqrt(4+2*sqrt(2))
phib[1, 1 | 0, 0] = (1+sqrt(2))/sqrt(4+2*sqrt(2))
phib[1, 1 | 0, 1] = 1/sqrt(4+2*sqrt(2))
phib[1, 1 | 1, 0] = -(1+sqrt(2))/sqrt(4+2*sqrt(2))
phib[1, 1 | 1, 1] = 1/sqrt(4+2*sqrt(2))
"""

_Q_PAIR_ENTANGLED = (
    """\
machine pair_fqsm Q_pair_entangled
states_a 0 1
states_b 0 1
init_entangled (0,1) = 1/sqrt(2)
init_entangled (1,0) = -1/sqrt(2)
"""
    + _Q_TABLES
)

_Q_PAIR_PRODUCT = (
    """\
machine pair_fqsm Q_pair_product
states_a 0 1
states_b 0 1
init_a 0 = 1
init_b 0 = 1
"""
    + _Q_TABLES
)

SOURCES: dict[str, str] = {
    "M1": _M1,
    "M2": _M2,
    "M3": _M3,
    "M4": _M4,
    "M5": _M5,
    "M1_pair": _M1_PAIR,
    "M2_pair": _M2_PAIR,
    "M3_pair": _M3_PAIR,
    "Q_pair_entangled": _Q_PAIR_ENTANGLED,
    "Q_pair_product": _Q_PAIR_PRODUCT,
}

_EXPECTED: dict[str, ChshReport] = {
    "M1": ChshReport(0.0, 0.0, 0.0, 0.0, 0.0, "classical"),
    "M2": ChshReport(1.0, 1.0, 1.0, 1.0, 2.0, "classical"),
    "M3": ChshReport(1.0, 1.0, 1.0, -1.0, 4.0, "supraquantum"),
    "M4": ChshReport(1.0, 1.0, 1.0, -1.0, 4.0, "supraquantum"),
    "M5": ChshReport(
        _HALF_RT2, _HALF_RT2, _HALF_RT2, -_HALF_RT2, 2.0 * _RT2, "superclassical"
    ),
    "M1_pair": ChshReport(0.0, 0.0, 0.0, 0.0, 0.0, "classical"),
    "M2_pair": ChshReport(1.0, 1.0, 1.0, 1.0, 2.0, "classical"),
    "M3_pair": ChshReport(1.0, 1.0, 1.0, -1.0, 4.0, "supraquantum"),
    "Q_pair_entangled": ChshReport(
        _HALF_RT2, _HALF_RT2, _HALF_RT2, -_HALF_RT2, 2.0 * _RT2, "superclassical"
    ),
    # product init: <A|a=0> = -1, <A|a=1> = 0, <B|b> = sqrt(2)/2 for both b,
    # so the CHSH combination collapses to -sqrt(2)
    "Q_pair_product": ChshReport(
        -_HALF_RT2, -_HALF_RT2, 0.0, 0.0, -_RT2, "classical"
    ),
}


@dataclass(frozen=True)
class ZooEntry:
    name: str
    document: MdfDocument
    expected: ChshReport

    @property
    def machine(self):
        return self.document.machine


def names() -> tuple[str, ...]:
    """All machine names, in a fixed presentation order."""
    return tuple(SOURCES)


@functools.lru_cache(maxsize=None)
def builtin(name: str) -> ZooEntry:
    """Parse (and so validate) one zoo machine."""
    if name not in SOURCES:
        raise UnknownNameError(name)
    return ZooEntry(name=name, document=parse(SOURCES[name]), expected=_EXPECTED[name])


def export(name: str) -> str:
    """Canonical format text for one machine."""
    if name not in SOURCES:
        raise UnknownNameError(name)
    return SOURCES[name]
