import logging
import time

from EngelFlagPy import (
    integrate_moser_flow, engel_translation_family, sliding_engel_family, verify_stability_pipeline,
)
from EngelFlagPy import config
from EngelFlagPy.heartbeat import report_progress as _heartbeat
from EngelFlagPy.moser import trajectory_difference

STEP_ID = "step5"
logging.basicConfig(level=config.SETTINGS.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
P0 = (0.2, -0.1, 0.3, 0.5)
STEPS = 100


def report_progress(status, msg):
    """Updates the job heartbeat for Step 5"""
    _heartbeat(STEP_ID, status, msg)


def run_stability_pipeline():
    print("🚀 INITIALIZING STEP 5: TWO-STAGE STABILITY PIPELINE")
    start = time.time()

    report_progress("running", "🧮 Sliding family (theta and omega both vary)...")
    flow = verify_stability_pipeline(sliding_engel_family(), P0, steps=STEPS)
    print(f"🔍 composed max angles: {flow.max_angles()}")
    print(f"🔍 phi_1(p0) = {[round(float(v), 10) for v in flow.final_point]}")

    report_progress("running", "🧮 Constant theta: pipeline against stage two alone...")
    fam = engel_translation_family()
    diff = trajectory_difference(
        verify_stability_pipeline(fam, P0, steps=STEPS),
        integrate_moser_flow(fam, P0, steps=STEPS, checkpoints=False),
    )
    print(f"🔍 pipeline vs direct Moser flow: {diff:.2e}")

    print("=" * 80)
    print(f"🏁 Process Completed in {round(time.time() - start, 2)} seconds.")
    print("=" * 80)
    if flow.max_angle > 1e-4 or diff > 1e-10:
        raise RuntimeError("pipeline verification out of tolerance")
    report_progress("success", f"✅ Composed D angle {flow.max_angle:.2e}.")


if __name__ == "__main__":
    try:
        run_stability_pipeline()
    except Exception as e:
        import traceback
        traceback.print_exc()
        report_progress("error", f"❌ Error: {str(e)[:50]}")
        exit(1)
