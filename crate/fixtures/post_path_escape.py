#!/usr/bin/env python3
import json
import os
import sys

out_dir = sys.argv[sys.argv.index("--out-dir") + 1]
os.makedirs(out_dir, exist_ok=True)
with open(os.path.join(out_dir, "manifest.json"), "w") as f:
    json.dump({"slots": {"log": {"media": "text", "path": "../../etc/x"}}, "viewer": []}, f)
