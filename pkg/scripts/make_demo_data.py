#!/usr/bin/env python3
"""Regenerate the bundled demo descriptor dataset under sample_data/."""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from helpers import make_descriptor_rows, write_descriptor_csv, write_descriptor_schema  # noqa: E402

DEMO_COUNTS = {0: 12, 1: 18, 2: 100, 3: 30}

DEMO_CONFIG = {
    "feature_mode": "with_interactions",
    "smote_mode": "global",
    "smote": {"k_neighbors": 5, "target_per_class": "auto", "seed": 0},
    "model": "gbt",
    "model_params": {"n_rounds": 60, "learning_rate": 0.1, "max_depth": 3},
    "split": {"test_fraction": 0.2, "seeds": [0, 1, 2, 3, 4]},
    "cv": {"k": 5, "seed": 0},
}


def main():
    out = ROOT / "sample_data"
    out.mkdir(exist_ok=True)
    rows = make_descriptor_rows(DEMO_COUNTS, seed=2024)
    write_descriptor_csv(rows, out / "descriptors.csv")
    write_descriptor_schema(out / "schema.json")
    (out / "experiment_config.json").write_text(
        json.dumps(DEMO_CONFIG, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(rows)} rows to {out / 'descriptors.csv'}")


if __name__ == "__main__":
    main()
