#!/usr/bin/env python3
"""Smoke test for the fbl_gausac_py extension module.

Builds the cdylib with cargo, loads it from a scratch directory under the
name Python expects, and exercises each exposed entry point once with
cheap parameters. Exits nonzero on the first failed check.
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def build_extension() -> Path:
    subprocess.run(
        ["cargo", "build", "-p", "fbl-gausac-py"],
        cwd=REPO_ROOT,
        check=True,
    )
    for name in ("libfbl_gausac_py.so", "libfbl_gausac_py.dylib", "fbl_gausac_py.dll"):
        candidate = REPO_ROOT / "target" / "debug" / name
        if candidate.exists():
            return candidate
    sys.exit("built library not found under target/debug")


def load_module(lib_path: Path, scratch: Path):
    suffix = ".pyd" if lib_path.suffix == ".dll" else ".so"
    target = scratch / f"fbl_gausac_py{suffix}"
    shutil.copy2(lib_path, target)
    sys.path.insert(0, str(scratch))
    import fbl_gausac_py  # noqa: E402

    return fbl_gausac_py


def approx(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main() -> None:
    lib_path = build_extension()
    with tempfile.TemporaryDirectory() as scratch:
        fbl = load_module(lib_path, Path(scratch))

        # scalar formulas against stdlib math
        assert approx(fbl.capacity(1.0), 0.5 * math.log(2.0))
        assert approx(fbl.dispersion_v(1.0), 3.0 / 8.0)
        assert approx(fbl.cross_dispersion(2, 1.0), 1.0 / 9.0)
        assert approx(fbl.gaussian_q(1.0), 0.5 * math.erfc(1.0 / math.sqrt(2.0)))
        assert approx(fbl.gaussian_q(fbl.gaussian_q_inv(0.05)), 0.05, tol=1e-10)
        assert approx(fbl.sphere_coord_cdf(0.0, 16), 0.5)

        # rate expansion: positive at a comfortable operating point and
        # equal to its own definition recomputed here
        n, k, p, eps = 2000, 2, 1.0, 0.1
        log_m = fbl.achievable_logm_symmetric(n, k, p, eps)
        v_sum = fbl.dispersion_v(k * p) + fbl.cross_dispersion(k, p)
        expected = (
            n * fbl.capacity(k * p)
            - math.sqrt(n * v_sum) * fbl.gaussian_q_inv(eps)
            + 0.5 * math.log(n)
        ) / k
        assert approx(log_m, expected, tol=1e-9)

        # structured shapes
        cv = fbl.capacity_vector([1.0, 2.0])
        assert cv["users"] == 2 and approx(cv["entries"]["3"], fbl.capacity(3.0))
        dm = fbl.dispersion_matrix([1.0, 1.0])
        assert approx(dm["entries"]["1"]["2"], 0.125)
        assert dm["entries"]["1"]["3"] == dm["entries"]["3"]["1"]

        gate = fbl.min_n0(22026, 1.0, 0.1)
        assert gate["n0"] >= 2 and 0.0 < gate["lambda0"] < 1.0
        assert fbl.stam_bound(50, 1) <= 8.0 / 50.0
        assert approx(fbl.repetition_probability(2, 256), 1.0 / 256.0)

        # sphere sample sits on the sphere
        coords = fbl.sample_sphere(32, 2.0, seed=7)
        assert len(coords) == 32
        assert approx(sum(x * x for x in coords), 32 * 2.0, tol=1e-10)

        # region membership at a clearly interior point
        check = fbl.rate_tuple_achievable(
            [1.0, 1.0], 500, [0.1, 0.1], 0.1, samples=20_000, seed=3
        )
        assert check["verdict"] == "Achievable"
        assert check["probability"]["point"] > 0.99
        assert len(check["thresholds"]) == 3

        # simulations: sane outputs and seed-determinism
        sim = fbl.simulate_mac(16, [1.0, 1.0], [4, 4], trials=2000, seed=5)
        again = fbl.simulate_mac(16, [1.0, 1.0], [4, 4], trials=2000, seed=5)
        assert sim == again
        assert 0.0 <= sim["error_prob"]["point"] <= 1.0
        assert sim["trials"] == 2000
        rcu = fbl.rcu_mc_estimate(16, [1.0, 1.0], [4, 4], 2000, 50, seed=5)
        assert 0.0 <= rcu["point"] <= 1.0 and rcu["half_width"] > 0.0

        # rateless schedule: pinned construction and a short protocol run
        schedule = fbl.RacSchedule.build(2, 1.0, 0.1, messages=256)
        assert schedule.times == [48, 49, 50]
        assert schedule.message_count == 256
        assert "RacSchedule" in repr(schedule)
        assert schedule.wrong_time_bound(0) <= 0.1 + 1e-12
        report = schedule.simulate(k_actual=1, epochs=300, seed=9)
        assert report["epochs"] == 300
        total = report["repetition"] + report["wrong_time"] + report["wrong_message"]
        assert approx(report["error_prob"]["point"], total / 300.0, tol=1e-12)
        as_dict = schedule.to_dict()
        assert as_dict["times"] == [48, 49, 50]

        # invalid inputs surface as ValueError, not a crash
        for bad in (
            lambda: fbl.capacity(-1.0),
            lambda: fbl.gaussian_q_inv(1.5),
            lambda: fbl.RacSchedule.build(2, 1.0, 0.1),  # no target
            lambda: fbl.RacSchedule.build(2, 1.0, 0.1, messages=4, final_time=9),
        ):
            try:
                bad()
            except ValueError:
                pass
            else:
                raise AssertionError("expected ValueError")

    print("smoke test passed: all bindings behave")


if __name__ == "__main__":
    main()
