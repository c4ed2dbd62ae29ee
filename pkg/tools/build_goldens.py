"""Regenerate the hand-transcribed golden fixtures.

The decompositions below are typed in by hand from the displayed conservative
form of the pedestrian system; they are not produced by the derivation
pipeline. Run from the repository root:

    python tools/build_goldens.py
"""

from pathlib import Path

from mfderive.conserve import Decomposition
from mfderive.sexp import dump_decomposition, dump_system
from mfderive.symexpr import VarId, const, deriv, hpow, param, total_derivative

ROOT = Path(__file__).resolve().parents[1]
X, Y = VarId("x", 0), VarId("y", 1)

r, b = deriv("r", 0, 0), deriv("b", 0, 0)
alpha, g0, g1, g2 = (param(n) for n in ("alpha", "gamma0", "gamma1", "gamma2"))
h = hpow()
half = const(1) / 2
rho = r + b


def dx(e):
    return total_derivative(e, X)


def dy(e):
    return total_derivative(e, Y)


def pedestrian(c, other, sign, ahead):
    """Conservative form for species ``c``; ``sign`` is +1 for red (moving +x)
    and -1 for blue. ``ahead`` is d_x of the other species, as displayed."""
    x_inner = Decomposition(
        -sign * (1 - rho) * (1 + alpha * c) * c + h * (1 - rho) * dx(c),
        ((X, Decomposition(-half * h * c * (1 - rho) * (1 + alpha * c))),),
    )
    y_flux = (
        sign * (g1 - g2) * (1 - rho) * b * r
        + half * h * (
            (g1 + g2) * ((1 - rho) * dy(r * b) + b * r * dy(rho))
            + 2 * g0 * ((1 - rho) * dy(c) + c * dy(rho))
            + 2 * (g1 - g2) * (1 - rho) * c * ahead
        )
    )
    return Decomposition(const(0), ((X, x_inner), (Y, Decomposition(y_flux))))


SYSTEM_HEADER = """\
; Golden conservative form of the two-species pedestrian model
; (bundled pedestrian.json), default pipeline settings K=2, s=1, keep=2.
; Hand transcription, with rho = r + b:
;
; dt r = -dx((1-rho)(1+alpha r) r) + (gamma1-gamma2) dy((1-rho) b r)
;        - h/2 [dx^2(r(1-rho)(1+alpha r)) - 2 dx((1-rho) dx r)]
;        + h/2 [(gamma1+gamma2) dy((1-rho) dy(r b) + b r dy rho)
;               + 2 gamma0 dy((1-rho) dy r + r dy rho)
;               + 2 (gamma1-gamma2) dy((1-rho) r dx b)]
;
; dt b =  dx((1-rho)(1+alpha b) b) - (gamma1-gamma2) dy((1-rho) b r)
;        - h/2 [dx^2(b(1-rho)(1+alpha b)) - 2 dx((1-rho) dx b)]
;        + h/2 [(gamma1+gamma2) dy((1-rho) dy(r b) + b r dy rho)
;               + 2 gamma0 dy((1-rho) dy b + b dy rho)
;               + 2 (gamma1-gamma2) dy((1-rho) b dx r)]
;
; Each x-flux is nested as dx(F + dx(G)); products inside a flux, including
; inner derivatives such as dy(r b), are written out as expanded polynomials.
; Compare by flattening, never syntactically.
"""

ALGORITHM_HEADER = """\
; Conservative form of the red species as printed for the reference
; implementation of the integration algorithm (rho = b + r):
;
; dt r = dx(r (b+r-1)(alpha r+1)) - (gamma1-gamma2) dy(b r (b+r-1))
;   + h ( 1/2 dx( dx(r(alpha b r - b + alpha r^2 - alpha r + 1)) + 2 r dx b )
;         - (gamma1-gamma2) dy(r (b+r-1) dx b)
;         + gamma0 dy(2 r dy b - dy((b-1) r))
;         + 1/2 (gamma1+gamma2) dy(r (2b - r) dy b - dy((b-1) b r)) )
;
; Inner dy(...) terms are expanded; the factor h and the numeric factors are
; moved inside the fluxes.
"""


def algorithm_red():
    x_inner = Decomposition(
        r * (b + r - 1) * (alpha * r + 1) + h * r * dx(b),
        ((X, Decomposition(half * h * r * (alpha * b * r - b + alpha * r * r - alpha * r + 1))),),
    )
    y_flux = (
        -(g1 - g2) * b * r * (b + r - 1)
        - h * (g1 - g2) * r * (b + r - 1) * dx(b)
        + h * g0 * (2 * r * dy(b) - dy((b - 1) * r))
        + half * h * (g1 + g2) * (r * (2 * b - r) * dy(b) - dy((b - 1) * b * r))
    )
    return Decomposition(const(0), ((X, x_inner), (Y, Decomposition(y_flux))))


def main():
    system = [
        ("r", pedestrian(r, b, 1, dx(b))),
        ("b", pedestrian(b, r, -1, dx(r))),
    ]
    out = ROOT / "src" / "mfderive" / "data" / "pedestrian_golden.sexp"
    out.write_text(SYSTEM_HEADER + dump_system(system, ("x", "y")) + "\n", encoding="utf-8")
    alg = ROOT / "tests" / "fixtures" / "pedestrian_red_algorithm.sexp"
    alg.write_text(ALGORITHM_HEADER + dump_decomposition(algorithm_red(), ("x", "y")) + "\n", encoding="utf-8")
    print(f"wrote {out.relative_to(ROOT)} and {alg.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
