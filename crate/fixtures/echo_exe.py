#!/usr/bin/env python3
"""Fake executable: records its argv and counts its invocations."""
import json
import sys

with open("argv.json", "w") as f:
    json.dump(sys.argv[1:], f)
with open("exe_calls", "a") as f:
    f.write("1\n")
with open("raw_output.txt", "w") as f:
    f.write("interface atoms: 42\n")
print("done")
