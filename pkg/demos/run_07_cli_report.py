"""
Command-line report
===================

The same analyses are available from the ``hypomimia`` command. This script
drives it in-process on a small synthetic cohort and lists the outputs.
"""

import json
import tempfile
from pathlib import Path

from hypomimia.cli import main

work = Path(tempfile.mkdtemp())
main(["synth", "--seed", "3", "--n-pd", "20", "--n-nonpd", "40", "--out", str(work / "cohort")])
code = main(["report", "--manifest", str(work / "cohort" / "manifest.json"), "--seed", "3",
             "--out", str(work / "report")])
print("exit code", code)
for p in sorted((work / "report").iterdir()):
    print(f"  {p.name:24s} {p.stat().st_size:7d} bytes")

metrics = json.loads((work / "report" / "metrics.json").read_text())
print("LOOCV metrics:", {k: v for k, v in metrics["metrics"].items() if k in ("accuracy", "auc")})
print("reference block (not a target):", metrics["reference"])
