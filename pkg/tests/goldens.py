"""Reference phasing-source expressions, transcribed term by term."""
from fractions import Fraction

from echo_area.phasing import TrigPoly as P

G2, G4 = P.gamma(2), P.gamma(4)
s, c = P.sin, P.cos
S, C = P.sin_half_sq, P.cos_half_sq  # sin^2(x/2), cos^2(x/2)


def _h(x):
    return P.const(Fraction(1, 2)) * x


# primary echo, pulses 1, 2
PRIMARY_V = G2 * s("1") * S("2")
PRIMARY_W = -(c("1") * c("2"))

# secondary echo, pulses 1, 2, e1
SECONDARY_V = _h(G2 * s("1") * s("e1") * s("2")) + G2 * c("1") * S("e1") * s("2")
SECONDARY_W = -(G2 * s("1") * S("2") * s("e1")) - c("1") * c("2") * c("e1")

# third echo, pulses 1, 2, e1, e2
THIRD_V_REFERENCE = (
    _h(G2 * (s("1") * s("2") * c("e1") * s("e2")
             + c("1") * s("2") * s("e1") * s("e2")
             + P.const(2) * c("1") * c("2") * s("e1") * S("e2")))
    + G4 * (s("1") * C("2") * S("e1") * C("e2")
            - s("1") * S("2") * C("e1") * S("e2"))
)
# conjugation path 1 -> 2 -> e1 -> e2 (each pulse flipping the phase) absent above
THIRD_V_MISSING = G4 * s("1") * S("2") * S("e1") * S("e2")
THIRD_W = (
    -(c("1") * c("2") * c("e1") * c("e2"))
    - G2 * (s("1") * S("2") * s("e1") * c("e2")
            + c("1") * s("2") * S("e1") * s("e2")
            + _h(s("1") * s("2") * s("e1") * s("e2")))
)
