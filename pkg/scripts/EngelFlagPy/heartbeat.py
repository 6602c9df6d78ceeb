import json
import os
from datetime import datetime

from . import config


def report_progress(step_id, status, msg):
    """Write the job heartbeat when ENGEL_HEARTBEAT_FILE is set; never raises."""
    path = config.SETTINGS.heartbeat_file
    if not path:
        return
    try:
        payload = {
            "step_id": step_id,
            "status": status,
            "last_msg": msg,
            "updated_at": datetime.now().isoformat(),
        }
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)
        os.replace(tmp, path)
    except Exception as e:
        print(f"⚠️ Heartbeat update failed: {e}")
