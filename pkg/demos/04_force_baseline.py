"""The force-directed baseline: origin-attracting vs topology-attracting.

Runs both force variants on a path-shaped map where the contact system can
actually reach equilibrium, then compares lost adjacencies and stability
against each other.
"""

from pathlib import Path

from demers import (
    ForceConfig,
    InitMode,
    QualityForce,
    compute_epsilon,
    evaluate,
    render_svg,
    run_frc,
    scale_weights,
)
from demers.synth import grid_map, lognormal_weights

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

map_ = grid_map(7, 1)
weights = lognormal_weights(map_, k=2, seed=3, sigma=1.2)
table = scale_weights(weights, map_)
epsilon = compute_epsilon(table, map_)

for quality in (QualityForce.ORIGIN, QualityForce.TOPOLOGY):
    layouts = []
    previous = None
    for i in range(table.k):
        cfg = ForceConfig(
            quality_variant=quality,
            epsilon=epsilon,
            init=InitMode.PREVIOUS_LAYOUT if previous else InitMode.MAP_ORIGINS,
        )
        result = run_frc(map_, table.function_sides(i), cfg, previous=previous)
        print(
            f"{quality.value:8s} f{i}: converged={result.converged} "
            f"after {result.iterations} iterations, "
            f"residual overlap {result.residual_overlap_area:.2e}"
        )
        layouts.append(result.layout)
        previous = result.layout
    report = evaluate(layouts, map_)
    print(f"{quality.value:8s} madj={report.madj:.3f} sdis={report.sdis:.4f}")
    (OUT / f"frc_{quality.value}.svg").write_text(render_svg(layouts[0]))
