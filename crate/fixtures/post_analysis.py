#!/usr/bin/env python3
"""Fake post-analysis: writes a text log, a tiny PNG, a CSV table and a
structure file, then a manifest naming them. Extra options are echoed into
the log so tests can see which update values arrived."""
import argparse
import base64
import json
import os

PNG = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR4nGNgYGD4DwABBAEAwS2OUAAAAABJRU5ErkJggg=="
)

parser = argparse.ArgumentParser()
parser.add_argument("--run-dir", required=True)
parser.add_argument("--out-dir", required=True)
args, extra = parser.parse_known_args()

with open(os.path.join(args.run_dir, "post_calls"), "a") as f:
    f.write("1\n")
with open(os.path.join(args.run_dir, "post_argv.json"), "w") as f:
    json.dump(extra, f)

os.makedirs(args.out_dir, exist_ok=True)
out = lambda name: os.path.join(args.out_dir, name)
with open(out("log.txt"), "w") as f:
    f.write("post-analysis options: " + " ".join(extra) + "\n")
with open(out("patch_areas.png"), "wb") as f:
    f.write(PNG)
with open(out("interface_stats.csv"), "w") as f:
    f.write("partner,atoms,area\nA,21,310.5\nB,21,298.0\n")
with open(out("scene.pdb"), "w") as f:
    f.write("ATOM      1  CA  ALA A   1      11.104  13.207   2.100  1.00  0.00           C\nEND\n")

manifest = {
    "slots": {
        "log": {"media": "text", "path": "log.txt"},
        "patch_areas": {"media": "image", "path": "patch_areas.png"},
        "interface_stats": {"media": "table", "path": "interface_stats.csv"},
    },
    "viewer": [{"engine_hint": "molecular", "path": "scene.pdb"}],
}
with open(out("manifest.json"), "w") as f:
    json.dump(manifest, f, indent=1)
