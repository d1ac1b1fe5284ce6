#!/usr/bin/env python3
"""Fake post-analysis producing only the `log` text slot."""
import json
import os
import sys

run_dir = sys.argv[sys.argv.index("--run-dir") + 1]
out_dir = sys.argv[sys.argv.index("--out-dir") + 1]
with open(os.path.join(run_dir, "post_calls"), "a") as f:
    f.write("1\n")
with open(os.path.join(run_dir, "post_argv.json"), "w") as f:
    json.dump(sys.argv[5:], f)
os.makedirs(out_dir, exist_ok=True)
with open(os.path.join(out_dir, "log.txt"), "w") as f:
    f.write(" ".join(sys.argv[1:]) + "\n")
with open(os.path.join(out_dir, "manifest.json"), "w") as f:
    json.dump({"slots": {"log": {"media": "text", "path": "log.txt"}}, "viewer": []}, f)
