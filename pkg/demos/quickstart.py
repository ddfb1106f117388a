"""Sample one irrigation graph, check connectivity and find its minimal connecting c.

Run: python demos/quickstart.py
"""

from scatternet import (ModelParams, assign_preferences, build_visibility, components, hop_diameter,
                        minimal_connecting_c, realize, sample_points, theoretical_thresholds)

params = ModelParams(n=20_000, d=2, gamma=4.0)
points = sample_points(params.n, params.d, seed=1)
G = build_visibility(points, params.r)
print(f"n={params.n} r={params.r:.4f} mean visible degree={G.degrees.mean():.1f}")

# one ranking per vertex serves every c, so the graphs below are nested
prefs = assign_preferences(G, seed=2, depth=8)
for c in range(1, 6):
    S = realize(G, prefs, c)
    s = components(S)
    print(f"c={c}: {len(S.edges)} edges, {s.count} components, smallest {s.smallest}")

print("minimal connecting c:", minimal_connecting_c(G, pref_seed=2))
S = realize(G, prefs, 4)
print("hop diameter at c=4:", hop_diameter(S).value)
f = theoretical_thresholds(params.n, params.d, gamma=params.gamma)
print(f"asymptotic window: c_lower={f.c_lower:.2f}, c_upper={f.c_upper:.2f}")
