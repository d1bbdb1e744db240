"""Regenerates the synthetic Adult-style detailed fact table under fixtures/catalog.

The facts are constructed so that grouping them reproduces the aggregated
cubes printed for the running example exactly:
  * avg(HoursPerWeek) by (education.L2, work_class.L0)              -> cube CN
  * avg(HoursPerWeek) by (education.L2, work_class.L1)              -> cube CO
  * avg(HoursPerWeek) by (education.L2, work_class.L0) for Female   -> cube CF
Each (education, work_class) cell gets integer weights chosen so the weighted
means of the work_class.L0 children equal the work_class.L1 value to the cent.
"""
import itertools
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "catalog")

EDU = ["Assoc", "Post-grad", "Some-college", "University"]
EDU_L0 = {
    "Assoc": ["Assoc-acdm", "Assoc-voc"],
    "Post-grad": ["Masters", "Doctorate"],
    "Some-college": ["Some-college"],
    "University": ["Bachelors"],
}
WC0 = ["Federal-gov", "Local-gov", "State-gov", "Private", "Self-emp-inc", "Self-emp-not-inc"]
WC1 = {"Federal-gov": "Gov", "Local-gov": "Gov", "State-gov": "Gov", "Private": "Private",
       "Self-emp-inc": "Self-emp", "Self-emp-not-inc": "Self-emp"}
CN = {
    "Federal-gov": [41.15, 43.86, 40.31, 43.38],
    "Local-gov": [41.33, 43.96, 40.14, 42.34],
    "State-gov": [39.09, 42.96, 34.73, 40.82],
    "Private": [41.06, 45.19, 38.73, 43.06],
    "Self-emp-inc": [48.68, 53.05, 49.31, 49.91],
    "Self-emp-not-inc": [45.88, 43.39, 44.03, 44.44],
}
CO = {
    "Gov": [40.73, 43.58, 38.38, 42.14],
    "Private": [41.06, 45.19, 38.73, 43.06],
    "Self-emp": [46.68, 47.24, 45.7, 46.61],
}
CF = {
    "Assoc": [40.66, 37.61, 39.36, 38.05, 42.07, 38.47],
    "Post-grad": [47.76, 43.83, 40.14, 41.55, 48.73, 38.28],
    "Some-college": [38.25, 35.45, 34.01, 34.86, 43.96, 36.57],
    "University": [42.41, 41.66, 38.95, 39.45, 44.83, 39.04],
}


def cents(x):
    return int(round(x * 100))


def weights(children, target):
    """Smallest positive integer weights w with sum(w_i * (v_i - target)) == 0."""
    d = [cents(v) - cents(target) for v in children]
    if len(d) == 1:
        return [2]
    if len(d) == 2:
        g = math.gcd(abs(d[0]), abs(d[1])) or 1
        best = (abs(d[1]) // g, abs(d[0]) // g) if d[0] else (1, 0)
        return [x * 2 for x in best] if min(best) < 2 else list(best)
    best = None
    for w in itertools.product(range(1, 60), repeat=len(d)):
        if sum(a * b for a, b in zip(w, d)) == 0:
            if best is None or sum(w) < sum(best):
                best = w
    assert best is not None, (children, target)
    return [max(2, x) if min(best) >= 2 else x * 2 for x in best]


def main():
    rows = []
    for j, edu in enumerate(EDU):
        for parent, target in ((p, CO[p][j]) for p in CO):
            kids = [w for w in WC0 if WC1[w] == parent]
            ws = weights([CN[k][j] for k in kids], target)
            for kid, total in zip(kids, ws):
                v_n = CN[kid][j]
                v_f = CF[edu][WC0.index(kid)]
                females = total // 2
                males = total - females
                v_m = (total * v_n - females * v_f) / males
                for i in range(total):
                    gender = "Female" if i < females else "Male"
                    value = v_f if gender == "Female" else v_m
                    edu0 = EDU_L0[edu][i % len(EDU_L0[edu])]
                    rows.append((edu0, kid, gender, value))
    # Out-of-scope facts exercised by the selection condition.
    rows.append(("HS-grad", "Private", "Male", 40.0))
    rows.append(("HS-grad", "Private", "Female", 38.0))
    rows.append(("Bachelors", "Without-pay", "Female", 20.0))
    rows.append(("11th", "Never-worked", "Male", 10.0))

    with open(os.path.join(OUT, "adult_facts.csv"), "w") as f:
        f.write("person,education,work_class,gender,HoursPerWeek\n")
        for n, (e, w, g, v) in enumerate(rows):
            f.write(f"p{n:05d},{e},{w},{g},{v!r}\n")
    with open(os.path.join(OUT, "dim_person.csv"), "w") as f:
        f.write("L0\n")
        for n in range(len(rows)):
            f.write(f"p{n:05d}\n")
    print(f"{len(rows)} facts")


if __name__ == "__main__":
    main()
