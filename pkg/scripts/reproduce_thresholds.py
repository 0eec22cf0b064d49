#!/usr/bin/env python3
"""Select polarization thresholds from the reference curves in fixtures/.

Prints the chosen cut per measure together with the fitted inflection
structure.  Expects to run from the repository root (or pass --fixtures).
"""

import argparse
import json

from polarwarn import thresholds as th

FIXTURE_FILES = {
    "fig2a": ("presentation distance, sample E1", th.MEASURE_PRESENTATION),
    "fig2b": ("presentation distance, sample E2", th.MEASURE_PRESENTATION),
    "fig3a": ("response distance, sample E2", th.MEASURE_RESPONSE),
    "fig3b": ("engaged fraction, sample E2", th.MEASURE_ENGAGEMENT),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures", default="fixtures")
    parser.add_argument("--degree", type=int, default=None, help="override the per-measure degree")
    args = parser.parse_args()

    for name, (label, measure) in FIXTURE_FILES.items():
        curve = th.load_fixture_curve(f"{args.fixtures}/{name}.csv")
        config = th.DEFAULT_MEASURE_CONFIGS[measure]
        degree = args.degree or config.degree
        selection = th.select_threshold(
            curve, policy=config.policy, degree=degree, series=config.series
        )
        print(f"== {name}: {label}")
        print(json.dumps(selection.to_json_dict(measure), indent=2))


if __name__ == "__main__":
    main()
