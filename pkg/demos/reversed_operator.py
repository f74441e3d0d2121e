"""Why the sign of K matters: the reversed operator refuses to run.

With K = x^2 - y^2 the hyperbolic components sit above and below the
origin and y-marching carries Cauchy data away from the elliptic lobes.
Flip the sign (K = y^2 - x^2) and the hyperbolic components flank
sideways: marching in y immediately exits them, so the same recipe
cannot produce a solution.  Forcing a march anyway blows up, because
inside the elliptic cone the leapfrog recursion amplifies every mode.
"""

from mixtype import composite
from mixtype.errors import InstabilityDetected, OrientationFailure
from mixtype.fields import CoefficientSet, ScalarField


def main():
    print("control: K = x^2 - y^2")
    ok = composite.demonstrate_failure_mode(CoefficientSet.tricomi_cross())
    print(f"  orientation check: {'pass' if ok['failure_mode'] is None else 'fail'}\n")

    reversed_coeffs = CoefficientSet(
        a=ScalarField("1"),
        K=ScalarField("y**2 - x**2"),
        b1=ScalarField("0"),
        b2=ScalarField("0"),
        c=ScalarField("0"),
    )
    print("reversed: K = y^2 - x^2")
    diag = composite.demonstrate_failure_mode(reversed_coeffs)
    print(f"  failure mode: {diag['failure_mode']}")

    try:
        composite.counterexample_reversed_operator(h=1.0 / 32)
    except OrientationFailure as exc:
        print(f"  full solve refused: {exc}")

    print("\nforcing a march with the signed wave speed anyway:")
    try:
        composite.demonstrate_failure_mode(reversed_coeffs, force=True)
        print("  (unexpectedly stayed bounded)")
    except InstabilityDetected as exc:
        print(f"  {exc}")


if __name__ == "__main__":
    main()
