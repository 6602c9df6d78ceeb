import logging
import os
import time

from EngelFlagPy import cartan_prolongation, check_generalized_engel, derived_flag
from EngelFlagPy.distributions import flag_ranks, sample_points
from EngelFlagPy import config
from EngelFlagPy.heartbeat import report_progress as _heartbeat

STEP_ID = "step1"
logging.basicConfig(level=config.SETTINGS.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
MAX_N = int(os.getenv("ENGEL_PROLONG_MAX_N", "3"))


def report_progress(status, msg):
    """Updates the job heartbeat for Step 1"""
    _heartbeat(STEP_ID, status, msg)


def run_prolongation_flags():
    print(f"🚀 INITIALIZING STEP 1: CARTAN PROLONGATIONS n = 1..{MAX_N}")
    start = time.time()
    for n in range(1, MAX_N + 1):
        report_progress("running", f"🧮 Prolongation n={n}...")
        pro = cartan_prolongation(n)
        points = sample_points(pro.chart)
        ranks = {flag_ranks(pro.D, p) for p in points}
        report = check_generalized_engel(pro.D, points)
        growth = derived_flag(pro.D, points[0]).ranks
        print(f"📡 n={n}: chart dim {pro.chart.dim}, flag ranks {sorted(ranks)}, growth {growth}")
        if ranks != {pro.expected_ranks} or not report.verdict:
            raise RuntimeError(f"prolongation n={n}: ranks {ranks}, verdict {report.verdict}")
        print(f"   ✅ generalized Engel with rank vector {pro.expected_ranks}")

    print("=" * 80)
    print(f"🏁 Process Completed in {round(time.time() - start, 2)} seconds.")
    print("=" * 80)
    report_progress("success", f"✅ Prolongations 1..{MAX_N} verified.")


if __name__ == "__main__":
    try:
        run_prolongation_flags()
    except Exception as e:
        import traceback
        traceback.print_exc()
        report_progress("error", f"❌ Error: {str(e)[:50]}")
        exit(1)
