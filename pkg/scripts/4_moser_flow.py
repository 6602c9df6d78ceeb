import logging
import os
import time

from EngelFlagPy import engel_translation_family, integrate_moser_flow
from EngelFlagPy import config
from EngelFlagPy.heartbeat import report_progress as _heartbeat

STEP_ID = "step4"
logging.basicConfig(level=config.SETTINGS.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
P0 = (0.2, -0.1, 0.3, 0.5)
CSV_PATH = os.getenv("ENGEL_FLOW_CSV")


def report_progress(status, msg):
    """Updates the job heartbeat for Step 4"""
    _heartbeat(STEP_ID, status, msg)


def run_moser_flow():
    print("🚀 INITIALIZING STEP 4: MOSER FLOW OF THE ENGEL TRANSLATION FAMILY")
    report_progress("running", f"🧮 Integrating with h={config.SETTINGS.step}...")
    start = time.time()
    flow = integrate_moser_flow(engel_translation_family(), P0)
    frame = flow.to_frame()
    print(frame.iloc[:: max(1, len(frame) // 10)].to_string(index=False))
    if CSV_PATH:
        flow.to_csv(CSV_PATH)
        print(f"📤 Flow table written to {CSV_PATH}")

    angles = flow.max_angles()
    w_end = flow.final_point[3]
    print(f"🔍 max angles: {angles}")
    print(f"🔍 w(phi_1(p0)) = {w_end:.12f}")
    for cp in flow.checkpoints:
        print(f"   🔍 exact checkpoint t={cp['t']}: float drift {cp['drift']:.2e}")
    print("=" * 80)
    print(f"🏁 Process Completed in {round(time.time() - start, 2)} seconds.")
    print("=" * 80)
    if flow.truncated or angles["D"] > 1e-6 or abs(w_end + 0.5) > 1e-8:
        raise RuntimeError("flow does not reproduce the translation isotopy")
    report_progress("success", f"✅ Max D angle {angles['D']:.2e}.")


if __name__ == "__main__":
    try:
        run_moser_flow()
    except Exception as e:
        import traceback
        traceback.print_exc()
        report_progress("error", f"❌ Error: {str(e)[:50]}")
        exit(1)
