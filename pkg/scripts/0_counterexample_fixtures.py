import logging
import time

from EngelFlagPy import cauchy_characteristic, check_generalized_engel, counterexample_fixtures
from EngelFlagPy.distributions import flag_generators, sample_points
from EngelFlagPy.exterior import RationalPoint
from EngelFlagPy import config
from EngelFlagPy.heartbeat import report_progress as _heartbeat

STEP_ID = "step0"
logging.basicConfig(level=config.SETTINGS.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")


def report_progress(status, msg):
    """Updates the job heartbeat for Step 0"""
    _heartbeat(STEP_ID, status, msg)


def run_fixture_audit():
    print("🚀 INITIALIZING STEP 0: R^8 FIXTURE AUDIT")
    report_progress("running", "🔍 Checking the three rank-4 fixtures...")
    start = time.time()
    mismatches = []

    for fx in counterexample_fixtures():
        chart = fx.distribution.chart
        origin = RationalPoint.origin(chart)
        points = sample_points(chart, extra=[origin])
        print(f"📡 Fixture ({fx.name}) on {chart!r}: {len(points)} sample points")

        report = check_generalized_engel(fx.distribution, points)
        failed = tuple(report.failed_conditions())
        L = cauchy_characteristic(flag_generators(fx.distribution, 2), origin)
        print(f"   🔍 Cauchy rank at origin: {L.rank} (expected {fx.expected['cauchy_rank']})")
        print(f"   🔍 failed conditions: {list(failed)} (expected {list(fx.expected_failed)})")
        if report.corank_L_in_D is not None:
            print(f"   🔍 corank of L in D: {report.corank_L_in_D}")

        if failed != fx.expected_failed or L.rank != fx.expected["cauchy_rank"]:
            print(f"   ❌ Fixture ({fx.name}) does not match: {fx.note}")
            mismatches.append(fx.name)
        else:
            print(f"   ✅ {fx.note}")

    duration = round(time.time() - start, 2)
    print("=" * 80)
    print(f"🏁 Audit completed in {duration} seconds.")
    print("=" * 80)
    if mismatches:
        raise RuntimeError(f"fixtures with unexpected verdicts: {mismatches}")
    report_progress("success", "✅ All three fixtures fail exactly their expected condition.")


if __name__ == "__main__":
    try:
        run_fixture_audit()
    except Exception as e:
        import traceback
        traceback.print_exc()
        report_progress("error", f"❌ Fixture audit failed: {str(e)[:50]}")
        exit(1)
