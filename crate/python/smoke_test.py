"""Smoke test for the vecgrav_py extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import math
import pathlib
import tempfile

import vecgrav_py as vg

ROOT = pathlib.Path(__file__).resolve().parent.parent
SMALL = """
grid.n = 25
grid.dx = 0.15
solver.sponge_width = 3
solver.init = static
scenario.kind = oscillating_blob
scenario.mass = 1
scenario.width = 0.3
scenario.axis = 0, 0, 1
scenario.amplitude = 0.1
scenario.omega = 3.141592653589793
run.duration = 0.5
"""


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL {what}")
    print(f"ok   {what}")


def main():
    u = vg.Units(2.0, 0.5)
    check(u.c == 2.0 and abs(u.four_pi_kappa() - 2 * math.pi) < 1e-15, "units")
    check(abs(vg.lorentz_factor([0.6, 0.0, 0.0]) - 1.25) < 1e-15, "lorentz factor")
    v = vg.four_velocity([0.6, 0.0, 0.0])
    check(abs(v[0][0] - 0.75) < 1e-15 and abs(v[3][1] - 1.25) < 1e-15, "four velocity")
    try:
        vg.lorentz_factor([1.0, 0.0, 0.0])
        check(False, "superluminal rejected")
    except ValueError:
        check(True, "superluminal rejected")

    rows = vg.identity_checks(2000, seed=1)
    check(all(r[3] for r in rows), f"{len(rows)} force-law identities")
    rows = vg.tensor_checks(2000, seed=1)
    check(all(r[3] for r in rows), f"{len(rows)} tensor identities")

    w, s, p = vg.field_stress([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    check(abs(w + 1.0 / (4 * math.pi)) < 1e-15 and w <= 0.0, "energy density is negative")
    check(all(abs(a - b) < 1e-15 for a, b in zip(s, p)), "flux equals momentum at c = 1")

    phi, a = vg.retarded(SMALL, [0.0, 0.0, 3.0], 3.5, 24)
    check(abs(phi + 1.0 / 3.0) < 0.02, f"retarded phi {phi:.4f} near -M/r when the source is at rest")

    sim = vg.Simulation(SMALL)
    check(sim.shape == [25, 25, 25], "simulation shape")
    sim.step(10)
    check(sim.step_count == 10 and abs(sim.time - 10 * sim.dt) < 1e-12, "simulation steps")
    t, f, g = sim.fields()
    check(len(f) == 3 * 25**3 and all(math.isfinite(x) for x in f + g), "fields finite")
    check(sim.max_energy_density() <= 0.0, "max W never positive")

    text = (ROOT / "configs" / "identities.conf").read_text()
    with tempfile.TemporaryDirectory() as out:
        passed, report = vg.run("identities", text, out)
        check(passed and (pathlib.Path(out) / "report.txt").exists(), "identities command")
    print("smoke test passed")


if __name__ == "__main__":
    main()
