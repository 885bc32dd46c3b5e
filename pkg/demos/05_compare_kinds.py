"""
Four objectives side by side
============================

The comparison protocol trains every GAN kind on the same split for each
seed, scores the test split and collects AUC, point metrics and
reconstruction error.  Results land in ``demo_output/compare`` as JSON and
CSV files ready for plotting elsewhere.

Pass a CSV path to run on your own data, for example an ODDS set converted
as described in the README::

    python demos/05_compare_kinds.py data/cardio.csv 1360 1000
"""

import json
import sys
from pathlib import Path

from mimgan.cli import main

dataset = sys.argv[1] if len(sys.argv) > 1 else "two-cluster"
n_train = sys.argv[2] if len(sys.argv) > 2 else "700"
iterations = sys.argv[3] if len(sys.argv) > 3 else "1000"
out = Path("demo_output/compare")

code = main(["compare", "--dataset", dataset, "--n-train", n_train, "--iterations", iterations,
             "--seeds", "0,1,2", "--out", str(out)])
if code:
    sys.exit(code)

report = json.loads((out / "report.json").read_text())
for kind, summary in report["kinds"].items():
    auc = summary["auc"]
    re = summary.get("reconstruction_error", {})
    print(f"{kind:>8}: AUC median {auc['median']:.4f} (per seed {[round(a, 3) for a in auc['per_seed']]})"
          f"  RE {re.get('mean', float('nan')):.4f} +- {re.get('std', float('nan')):.4f}")
print("files:", sorted(p.name for p in out.iterdir()))
