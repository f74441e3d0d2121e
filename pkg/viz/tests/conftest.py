"""Shared fixture: real solver artifacts produced through its CLI.

The plotting package must consume only the solver's documented file
formats, so the fixture shells out to the ``mixtype`` command instead
of importing anything from that package.
"""

import shutil
import subprocess

import pytest

SOLVER = shutil.which("mixtype")


def run_solver(args):
    proc = subprocess.run([SOLVER, *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Artifacts of a mixed solve, an energy march, and an iteration run."""
    if SOLVER is None:
        pytest.skip("solver CLI not installed")
    root = tmp_path_factory.mktemp("artifacts")

    comp = root / "composite"
    cfg = root / "composite.cfg"
    cfg.write_text(
        "[run]\nscenario = composite-linear\n"
        "[grid]\nh = 1/64\n"
        "[solver]\nconvergence_h = 1/32, 1/64\n"
    )
    run_solver(["--config", str(cfg), "--out", str(comp)])

    hyp = root / "hyperbolic"
    cfg = root / "hyperbolic.cfg"
    cfg.write_text(
        "[run]\nscenario = hyperbolic-only\n"
        "[grid]\nh = 1/64\n"
        "[coeffs]\npreset = custom\nK = -1\n"
        "[data]\nkind = expression\nf = 0\ng = 1\nphi = 1\npsi = 0\n"
        "[solver]\ncfl = 0.8\n"
    )
    run_solver(["--config", str(cfg), "--out", str(hyp)])

    nm = root / "iteration"
    cfg = root / "iteration.cfg"
    cfg.write_text(
        "[run]\nscenario = nash-moser\n"
        "[grid]\nh = 1/64\n"
        "[solver]\neps = 0.05\nsteps = 3\n"
    )
    run_solver(["--config", str(cfg), "--out", str(nm)])

    return {
        "region": comp / "region.csv",
        "solution": comp / "solution.csv",
        "convergence": comp / "convergence.csv",
        "energy": hyp / "energy.csv",
        "report": nm / "report.json",
    }
