"""Writes the application datasets under data/.

wine.csv              178 wines: cultivar (1..3), magnesium, phenols (total phenols)
student.csv           200 students: prog, math (one row per student)
student_grouped.csv   the students aggregated by distinct maths score
"""
import pathlib

import pandas as pd
import rdatasets
from sklearn.datasets import load_wine

root = pathlib.Path(__file__).resolve().parents[2] / "data"
root.mkdir(exist_ok=True)

w = load_wine(as_frame=True).frame
wine = pd.DataFrame({
    "cultivar": w.target + 1,
    "magnesium": w.magnesium.astype(int),
    "phenols": w.total_phenols,
})
wine.to_csv(root / "wine.csv", index=False, float_format="%.2f")

h = rdatasets.data("openintro", "hsb2")
student = h[["prog", "math"]].copy()
student.to_csv(root / "student.csv", index=False)

g = student.groupby("math").prog.value_counts().unstack(fill_value=0)
g = g[["academic", "general", "vocational"]]
out = pd.DataFrame({"math": g.index})
out["m"] = g.sum(axis=1).values
for c in g.columns:
    out["count_" + c] = g[c].values
out.to_csv(root / "student_grouped.csv", index=False)
