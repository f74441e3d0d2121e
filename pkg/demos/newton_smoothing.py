"""Smoothed Newton iteration for det D^2 u = K psi near a degeneracy.

The ansatz u = x1^2/2 + eps^5 w turns the fully nonlinear equation into
F(w) = (1 + eps w_11) w_22 - eps w_12^2 - K psi / eps = 0 on the unit
square, with K = eps^4 (x1^2 - x2^2) changing sign across the
diagonals.  Each step linearizes, kills the mixed second-order term
with a coordinate change, solves the resulting mixed-type linear
problem with the composite solver, and smooths the correction with a
spectral low-pass before accepting it.
"""

from mixtype import nashmoser as nm


def main():
    eps, h = 0.05, 1.0 / 64
    print(f"eps = {eps}, h = 1/{round(1 / h)}, psi = 1\n")
    p = nm.NashMoserProblem(eps=eps, h=h, psi="1")
    w, history = p.iterate(n_steps=3)
    print("H^2 residual on the measurement disk:")
    for level, r in enumerate(history):
        note = "   (start, w = 0)" if level == 0 else ""
        print(f"  after step {level}: {r:.3e}{note}")
    print(f"\ndecay over 3 steps: {history[-1] / history[0]:.2e}")
    print("the first step does most of the work; later steps hold the")
    print("residual at the level the grid can represent.  The smoothing")
    print("keeps each correction from re-exciting grid-scale noise that")
    print("the loss-of-derivatives estimate cannot absorb.")


if __name__ == "__main__":
    main()
