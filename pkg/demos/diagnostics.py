"""Grid diagnostics for one instance: cell densities, black/white coloring, properties and moons.

Run: python demos/diagnostics.py
"""

from scatternet import (CellGrid, ModelParams, assign_preferences, build_visibility, color_cells,
                        density_report, moon_report, property_report, realize, sample_points)

params = ModelParams(n=20_000, d=2, gamma=6.0, c=10)
points = sample_points(params.n, params.d, seed=3)
G = build_visibility(points, params.r)
S = realize(G, assign_preferences(G, seed=4, depth=params.c), params.c)

density = density_report(points, G.grid)
print(f"fine cells: {G.grid.n_cells}, counts in [{density.min_count}, {density.max_count}], "
      f"bounds [{density.lower:.1f}, {density.upper:.1f}], all ok: {density.all_ok}")

coloring = color_cells(S, points, CellGrid.for_radius(points, params.r, coarse=True))
print(f"coarse cells: black {int(coloring.black.sum())} of {coloring.color.size}, "
      f"largest white *-component {coloring.max_white_component}")

props = property_report(S, coloring, density, params)
print(f"properties i-iv: {props.prop_i} {props.prop_ii} {props.prop_iii} {props.prop_iv}")
print(f"q={props.q:.2f} s={props.s:.2f} lambda={props.lambda_occ:.1f}")
print("moon counts (min, max):", tuple(moon_report(points, params.r, 2000, seed=5, grid=G.grid)))
