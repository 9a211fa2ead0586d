"""Variant-comparison experiment on synthetic instances.

Generates seeded grid instances and runs the variant grid over them the
same way the ``demers matrix`` subcommand does, then prints the combined
CSV. The headline orderings (lost adjacencies by objective, direction
preservation by constraint setting) are visible in the aggregates.
"""

import tempfile
from pathlib import Path

from demers.cli import RunConfig, matrix_csv, run_matrix
from demers.synth import write_instance

VARIANTS = ["TOP-W-IT", "TOP-S-IT", "ORG-W-IT", "ORG-S-IT", "FRC-O-U", "FRC-T-U"]

with tempfile.TemporaryDirectory() as td:
    configs = []
    for seed in range(4):
        map_path, csv_path = write_instance(td, 4, seed=seed, k=2, sigma=1.0)
        for variant in VARIANTS:
            configs.append(
                RunConfig(
                    map_path=map_path,
                    weights_path=csv_path,
                    variant=variant,
                    out_dir=str(Path(td) / f"s{seed}" / variant),
                    dataset_name=f"grid4_s{seed}",
                    frc_max_iterations=30_000,
                )
            )
    results = run_matrix(configs)
    print(matrix_csv(results))

    by_variant = {}
    for res in results:
        if res.report:
            by_variant.setdefault(res.config.variant, []).append(res.report.madj)
    print("mean lost-adjacency fraction by variant:")
    for variant in VARIANTS:
        vals = by_variant.get(variant, [])
        if vals:
            print(f"  {variant:10s} {sum(vals) / len(vals):.3f}")
