import logging
import time

from EngelFlagPy import check_pfaffian_criteria, engel_local_forms, normal_form
from EngelFlagPy.distributions import sample_points
from EngelFlagPy import config
from EngelFlagPy.heartbeat import report_progress as _heartbeat

STEP_ID = "step2"
logging.basicConfig(level=config.SETTINGS.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
GRID = [(l, r) for l in (0, 1, 2) for r in (0, 1)]


def report_progress(status, msg):
    """Updates the job heartbeat for Step 2"""
    _heartbeat(STEP_ID, status, msg)


def run_normal_forms():
    print("🚀 INITIALIZING STEP 2: NORMAL-FORM PFAFFIAN CRITERIA")
    start = time.time()
    failures = []
    for l, r in GRID:
        report_progress("running", f"🧮 Normal form l={l}, r={r}...")
        nf = normal_form(l, r)
        report = check_pfaffian_criteria(nf.Theta, nf.Omegas, sample_points(nf.chart))
        mark = "✅" if report.verdict else "❌"
        print(f"{mark} l={l} r={r} dim={nf.chart.dim}: {report.conditions()}")
        if not report.verdict:
            failures.append((l, r))

    for variant in ("intro", "normal"):
        theta, omegas = engel_local_forms(variant)
        report = check_pfaffian_criteria(theta, omegas, sample_points(theta.chart))
        print(f"{'✅' if report.verdict else '❌'} Engel local model '{variant}': {theta}, {omegas[0]}")
        if not report.verdict:
            failures.append(variant)

    print("=" * 80)
    print(f"🏁 Process Completed in {round(time.time() - start, 2)} seconds.")
    print("=" * 80)
    if failures:
        raise RuntimeError(f"criteria failed for {failures}")
    report_progress("success", f"✅ {len(GRID)} normal forms and both Engel models pass.")


if __name__ == "__main__":
    try:
        run_normal_forms()
    except Exception as e:
        import traceback
        traceback.print_exc()
        report_progress("error", f"❌ Error: {str(e)[:50]}")
        exit(1)
