"""Synthetic fixture runs and a demo store builder.

Three predictor archetypes span the accuracy-fairness landscape:

* ``constant``: probability 0.5 everywhere.  Accuracy collapses to the
  base rate and the sorted curve sits flat at residual -0.5 then +0.5,
  but the groups stay perfectly aligned.
* ``accurate``: probability within 0.45 of the label, with error
  magnitudes clustered toward that extreme (density proportional to the
  square of the magnitude) so the sorted curve bends sharply near both
  ends.  Every prediction lands on the correct side of the threshold.
* ``shifted``: the accurate predictor with +0.15 added to the predicted
  probability of group 1's hardest examples (largest error magnitude).
  Headline accuracy stays high while the injected disparity moves group
  1's median and knees away from group 0's.

The same error-magnitude seed drives ``accurate`` and ``shifted`` so the
pair differ only by the injected shift.  The demo store bundles these
archetypes plus three small reference runs carrying externally computed
indicator rows for report rendering.
"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Sequence

import numpy as np

from .residuals import PredictionRecord
from .store import Store, parse_prediction_bytes

DEFAULT_ATTRIBUTE = "gender"
DEFAULT_ENVIRONMENTS = ("day", "night")

#: Reference rows rendered by `rise report --stored`: run id, algorithm,
#: then acc, dp, md, f_mean, f_shift, f_acc as published for that algorithm.
REFERENCE_ROWS = (
    ("iga", "IGA", 0.983, 0.858, 0.056, 0.942, 0.395, 1.449),
    ("irm", "IRM", 0.489, 0.972, 0.000, 0.960, 0.017, 0.001),
    ("mbdg", "MBDG", 0.960, 0.828, 0.023, 0.933, 0.042, 0.040),
)


def _environments(rng: np.random.Generator, n: int) -> list[str]:
    tags = rng.integers(0, len(DEFAULT_ENVIRONMENTS), size=n)
    return [DEFAULT_ENVIRONMENTS[t] for t in tags]


def constant_records(n: int = 6000, seed: int = 303) -> list[PredictionRecord]:
    """Constant 0.5 predictor over exactly balanced labels and groups.

    n must be divisible by 4 so each (label, group) cell has equal count;
    exact balance keeps all medians at zero and both plateaus the same
    length in every subgroup curve.
    """
    if n % 4:
        raise ValueError("n must be divisible by 4")
    rng = np.random.default_rng(seed)
    cells = np.repeat(np.arange(4), n // 4)
    rng.shuffle(cells)
    label = cells // 2
    group = cells % 2
    envs = _environments(rng, n)
    return [
        PredictionRecord(0.5, int(y), int(g), e)
        for y, g, e in zip(label, group, envs)
    ]


def accurate_records(
    n: int = 6000,
    seed: int = 101,
    shifted: bool = False,
    base_rate: float = 0.65,
    margin: float = 0.45,
    shift: float = 0.15,
    hard_fraction: float = 0.4,
) -> list[PredictionRecord]:
    """High-accuracy predictor; optionally disparity-shifted for group 1.

    Error magnitude e = margin * u^(1/3) clusters near the margin, giving
    the sorted residual curve its flat-steep-flat signature.  With
    ``shifted`` the top ``hard_fraction`` of group 1 by e get ``shift``
    added to their predicted probability, which flips the hardest
    negative-class examples across the 0.5 threshold.
    """
    rng = np.random.default_rng(seed)
    e = margin * rng.uniform(size=n) ** (1.0 / 3.0)
    label = (rng.uniform(size=n) < base_rate).astype(np.int64)
    group = rng.integers(0, 2, size=n)
    prob = np.where(label == 1, 1.0 - e, e)
    if shifted:
        # Top hard_fraction of the magnitude law: e >= margin * (1-f)^(1/3).
        cut = margin * (1.0 - hard_fraction) ** (1.0 / 3.0)
        hard = (group == 1) & (e >= cut)
        prob = np.where(hard, np.minimum(prob + shift, 1.0), prob)
    envs = _environments(rng, n)
    return [
        PredictionRecord(float(p), int(y), int(g), env)
        for p, y, g, env in zip(prob, label, group, envs)
    ]


def scenario_records(n: int = 6000) -> dict[str, list[PredictionRecord]]:
    """The three archetypes with fixed seeds, keyed by archetype name."""
    return {
        "constant": constant_records(n),
        "accurate": accurate_records(n),
        "shifted": accurate_records(n, shifted=True),
    }


def records_to_csv(
    records: Sequence[PredictionRecord], attribute: str = DEFAULT_ATTRIBUTE
) -> bytes:
    lines = [f"prob,label,{attribute},env"]
    lines.extend(
        f"{r.prob_positive:.6f},{r.label},{r.group},{r.environment}" for r in records
    )
    return ("\n".join(lines) + "\n").encode("utf-8")


def register_records(
    store: Store,
    run_id: str,
    dataset: str,
    algorithm: str,
    records: Sequence[PredictionRecord],
    attribute: str = DEFAULT_ATTRIBUTE,
) -> str:
    data = records_to_csv(records, attribute)
    return store.register_run(run_id, dataset, algorithm, parse_prediction_bytes(data), data)


def build_demo_store(root: str | Path) -> Store:
    """Create a store with the archetype runs plus the three reference runs.

    demo-balanced and demo-shifted share their error-magnitude draw, so
    comparing them isolates the injected disparity.  Their size exceeds the
    service's down-sampling threshold on purpose.  The reference runs hold
    small prediction files; their headline indicator rows are attached as
    stored values because the models behind them are not reproducible here.
    """
    store = Store(root)
    register_records(
        store, "demo-balanced", "synthetic-driving", "accurate",
        accurate_records(12000, seed=101),
    )
    register_records(
        store, "demo-shifted", "synthetic-driving", "accurate-shifted",
        accurate_records(12000, seed=101, shifted=True),
    )
    register_records(
        store, "demo-constant", "synthetic-driving", "constant",
        constant_records(6000, seed=303),
    )
    for i, (run_id, algorithm, acc, dp, md, f_mean, f_shift, f_acc) in enumerate(REFERENCE_ROWS):
        register_records(
            store, run_id, "bdd100k", algorithm, accurate_records(400, seed=700 + i)
        )
        store.attach_indicators(
            run_id,
            [
                {
                    "attribute": DEFAULT_ATTRIBUTE,
                    "environment": "all",
                    "acc": acc,
                    "dp": dp,
                    "md": md,
                    "f_mean": f_mean,
                    "f_shift": f_shift,
                    "f_acc": f_acc,
                }
            ],
        )
    return store


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Build the demo store of fixture runs.")
    parser.add_argument("store_dir", help="directory to create the store in")
    args = parser.parse_args(argv)
    store = build_demo_store(args.store_dir)
    for manifest in store.list_runs():
        print(f"{manifest.run_id}: {manifest.algorithm} on {manifest.dataset}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
