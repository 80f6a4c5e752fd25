"""
Predictor against the series oracle
===================================

Random primitive places with rational offset parameters, run through the
predictor and through the offset series.  The per-clause table shows how
often each clause fired and how its verdicts compared.  Disagreements come
with a command that reproduces them.
"""

from offsetshape.verifier import random_suite

rep = random_suite(seed=1, n=200)

print(f"{'clause':<22}{'hits':>6}{'pass':>6}{'fail':>6}{'undet':>7}")
for case, row in rep["cases"].items():
    print(f"{case:<22}{row['hits']:>6}{row['pass']:>6}{row['fail']:>6}{row['undetermined']:>7}")

print("\nsmoothing exceptions:", len(rep["smoothing_exceptions"]))
print("flex reported preserved:", rep["flex_preserved"])
for f in rep["failures"]:
    print(f"\n{f['case']} sheet {f['branch']}: series signature {f['series_signature']}")
    print("  ", f["reproduce"])
