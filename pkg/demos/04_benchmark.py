"""The benchmark table: all algorithms, all datasets on disk, seven error costs.

Desk scale (3 splits, 200 trials, population 20) finishes in minutes;
pass ``full`` for the 10-split, 1000-trial protocol. The same run is
available as ``icet run``.
"""

import sys

from icet import experiments as ex
from icet.data import BUNDLED_DATASETS, default_data_dir, bundled_descriptor

scale = sys.argv[1] if len(sys.argv) > 1 else "desk"
present = tuple(n for n in BUNDLED_DATASETS if (default_data_dir() / bundled_descriptor(n).file).exists())
print(f"datasets: {', '.join(present)}")

cfg = ex.ExperimentConfig(datasets=present, scale=scale, workers=4)
rows = ex.run_experiment(cfg, progress=lambda out: print(".", end="", flush=True))
print()
print(ex.summary_markdown(rows))
for path in ex.emit_outputs(rows, f"runs/benchmark-{scale}"):
    print("wrote", path)
