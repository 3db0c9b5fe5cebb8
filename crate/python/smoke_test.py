"""Exercise the Python bindings end to end."""

import math
import os
import tempfile

import sdpme


def main():
    nl = sdpme.Nonlinearity.power_law(2.0)
    assert nl.phi(0.5) == 0.25
    assert abs(nl.beta(nl.phi(0.3)) - 0.3) < 1e-12

    sc = nl.structural_constants()
    assert abs(sc.m - 2.0) < 1e-12
    checks = {name: passed for name, passed, _, _ in nl.validate(sc)}
    assert checks["H1_monotone"] and not checks["H2_divergence"]
    dgc = sc.degiorgi(1, c_struct=0.05)
    steps = dgc.scheme(0.5 * dgc.r_max, 0.3, 3)
    assert [n for n, _, _ in steps] == [0, 1, 2, 3]
    assert all(b[1] < a[1] for a, b in zip(steps, steps[1:]))

    profile = sdpme.Barenblatt.with_peak(2.0, 0.25, 1.0)
    cells, lo, hi = 256, -3.0, 3.0
    h = (hi - lo) / cells
    u0 = [profile.value([lo + (i + 0.5) * h], 1.0) for i in range(cells)]
    traj = sdpme.run_simulation(u0, [lo], [hi], [cells], nl, dt=0.5 * h, t_end=1.5, t_start=1.0)
    masses = traj.masses()
    assert abs(masses[-1] - masses[0]) < 1e-12 * masses[0]
    u = traj.values(-1)
    exact = [profile.value([lo + (i + 0.5) * h], traj.times[-1]) for i in range(cells)]
    err = sum(abs(a - b) for a, b in zip(u, exact)) * h
    assert err < 2e-3, err

    osc = traj.oscillation([0.0], 1.5, 0.1, 0.3, 2.0)
    assert 0.0 <= osc["essosc"] <= osc["mu_plus"]
    fit = traj.holder_exponent([1.0], 1.5, [0.02, 0.04, 0.08, 0.16])
    assert 0.5 < fit["alpha"] <= 1.0

    values, bounds = sdpme.geometric_bound(2.0, 4.0, 0.5, 1e-4, 8)
    assert all(y <= b * (1 + 1e-12) for y, b in zip(values, bounds))

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "u.snap")
        sdpme.write_snapshot(path, u, [lo], [hi], [cells], t=traj.times[-1])
        name, t, back, blo, bhi, bcells = sdpme.read_snapshot(path)
        assert name == "u" and t == traj.times[-1] and back == u
        assert (blo, bhi, bcells) == ([lo], [hi], [cells])
        with open(path, "r+b") as f:
            f.truncate(100)
        try:
            sdpme.read_snapshot(path)
        except sdpme.ValidationError:
            pass
        else:
            raise AssertionError("truncated snapshot accepted")

    cfg = """
equation = "biofilm"
[grid]
lo = [0.0, 0.0]
hi = [1.0, 1.0]
cells = [24, 24]
[initial]
kind = "bump"
value = 0.4
width = 0.2
[solver]
dt = 0.01
t_end = 0.05
"""
    bio = sdpme.run_config(cfg)
    assert len(bio) == 6 and min(bio.values(-1)) >= 0.0

    try:
        sdpme.Nonlinearity.power_law(0.5)
    except sdpme.ValidationError:
        pass
    else:
        raise AssertionError("m < 1 accepted")

    print("smoke test passed: L1 error %.3e, alpha %.3f" % (err, fit["alpha"]))
    assert math.isfinite(err)


if __name__ == "__main__":
    main()
