import logging
import time
from fractions import Fraction

import numpy as np
import pandas as pd

from EngelFlagPy import cartan_prolongation, engel_translation_family, kernel_distributions
from EngelFlagPy import config
from EngelFlagPy.distributions import sample_points
from EngelFlagPy.heartbeat import report_progress as _heartbeat
from EngelFlagPy import exact_linalg as xl

STEP_ID = "step3"
logging.basicConfig(level=config.SETTINGS.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
SAMPLES = 10


def report_progress(status, msg):
    """Updates the job heartbeat for Step 3"""
    _heartbeat(STEP_ID, status, msg)


def audit_family(label, fam):
    rng = np.random.default_rng(config.SETTINGS.seed)
    rows = []
    for p in sample_points(fam.base, count=SAMPLES):
        t = Fraction(int(rng.integers(0, 7)), 6)
        kb = kernel_distributions(fam, t, p)
        dim = fam.base.dim
        for i, K in enumerate(kb.K):
            rows.append({
                "family": label,
                "t": str(t),
                "i": i + 1,
                "rank_L": len(kb.L),
                "rank_K": len(K),
                "rank_J": len(kb.J[i]),
                "rank_W": len(kb.W),
                "K_in_L": all(xl.contains(kb.L, v, dim) for v in K),
                "W_consistent": kb.w_consistent,
            })
    return pd.DataFrame(rows)


def run_rank_lemmas():
    print("🚀 INITIALIZING STEP 3: KERNEL RANK LEMMAS")
    start = time.time()
    frames = []
    report_progress("running", "🔍 Engel translation family...")
    frames.append(audit_family("engel_translation", engel_translation_family()))
    report_progress("running", "🔍 Prolongation n=2 as a constant family...")
    frames.append(audit_family("prolongation_2", cartan_prolongation(2).family()))
    df = pd.concat(frames, ignore_index=True)

    df["corank_K_in_L"] = df["rank_L"] - df["rank_K"]
    df["J_is_W_plus_1"] = df["rank_J"] == df["rank_W"] + 1
    print(df.groupby("family")[["corank_K_in_L", "rank_J", "rank_W"]].agg(["min", "max"]).to_string())

    ok = df["K_in_L"].all() and (df["corank_K_in_L"] == 1).all() and df["J_is_W_plus_1"].all() \
        and df["W_consistent"].all()
    print("=" * 80)
    print(f"🏁 {len(df)} kernel samples checked in {round(time.time() - start, 2)} seconds.")
    print("=" * 80)
    if not ok:
        raise RuntimeError("rank lemma violated on the sample")
    report_progress("success", f"✅ Rank lemmas hold on {len(df)} samples.")


if __name__ == "__main__":
    try:
        run_rank_lemmas()
    except Exception as e:
        import traceback
        traceback.print_exc()
        report_progress("error", f"❌ Error: {str(e)[:50]}")
        exit(1)
