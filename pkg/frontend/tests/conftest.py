import json
import subprocess
import sys

import pytest

# the renderer only sees CSVs; the benchmark CLI is invoked as a real
# subprocess to produce them, exactly as a user would
RUN_CONFIG = {
    "population": {"kind": "univariate", "seed": 20240701},
    "methods": ["direct_pooled", "direct_separate", "diff_gauss", "sim_kde",
                "st_kde", "st_logistic", "st_gauss_eq", "st_gauss_sep",
                "st_pav", "anchored_sim_typ", "suspect_anchored",
                "svm_logistic"],
    "n_reps": 3,
    "base_seed": 7110,
}


@pytest.fixture(scope="session")
def run_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    cfg = root / "run.json"
    cfg.write_text(json.dumps(RUN_CONFIG))
    out = root / "run"
    proc = subprocess.run(
        [sys.executable, "-m", "lrbench.cli", "run", "--config", str(cfg),
         "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out
