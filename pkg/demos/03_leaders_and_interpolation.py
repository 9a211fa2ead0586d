"""Lost adjacencies, leaders, and overlap-free transitions.

Four mutually adjacent regions cannot all touch as squares, so the
lost-adjacency integer program must break one edge; the break is drawn
as a red orthogonal leader. Interpolating between the layouts of two
weight functions stays valid in every frame.
"""

from pathlib import Path

from demers import (
    ModelSpec,
    ObjectiveKind,
    Setting,
    WeightKind,
    all_leaders,
    build_cnt_ilp,
    compute_epsilon,
    decode,
    derive_constraints,
    load_map,
    load_weights,
    render_frames,
    render_svg,
    scale_weights,
    solve_ilp,
)

DATA = Path(__file__).parent.parent / "src" / "demers" / "data"
OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

map_ = load_map(DATA / "luxembourg.geojson")
print(f"complete adjacency on 4 regions: {len(map_.edges)} edges")

weights = load_weights(DATA / "luxembourg_weights.csv", map_, WeightKind.TIME_SERIES)
table = scale_weights(weights, map_)
epsilon = compute_epsilon(table, map_)
constraints = derive_constraints(map_, epsilon, Setting.WEAK)

spec = ModelSpec(objective_kind=ObjectiveKind.CNT)
model = build_cnt_ilp(map_, table.function_sides(0), constraints, spec)
solution = solve_ilp(model.problem)
lost = round(sum(v for n, v in solution.values.items() if n.startswith("b0_")))
print(f"optimal lost adjacencies: {lost} ({solution.nodes} search nodes)")

layout = decode(solution, model)[0]
leaders, report = all_leaders(layout, constraints, map_)
for ld in leaders:
    print(f"leader {ld.endpoints[0]}-{ld.endpoints[1]}: length {ld.length:.2f}, "
          f"{ld.bends} bends")
(OUT / "k4_with_leader.svg").write_text(render_svg(layout, leaders))
print(f"wrote {OUT / 'k4_with_leader.svg'}")

# a second layout with swollen center region, same constraints
grown = dict(table.function_sides(0))
grown["D"] = grown["D"] * 2.2
model2 = build_cnt_ilp(map_, grown, constraints, spec)
layout2 = decode(solve_ilp(model2.problem), model2)[0]
frames = render_frames(layout, layout2, 8)
for i, doc in enumerate(frames):
    (OUT / f"k4_frame_{i:04d}.svg").write_text(doc)
print(f"wrote {len(frames)} valid interpolation frames")
