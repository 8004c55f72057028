"""Regenerate the Mumbai-like district fixture under fixtures/mumbai/.

The seed sample and the census-style marginals are drawn from the same
household model with different streams, so the sample is representative but
not an exact match of the targets.  Run from the repository root:

    python scripts/make_fixtures.py
"""

import csv
import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "fixtures" / "mumbai"
SEED = 20221  # fixture seed; unrelated to any run seed

# (lat, lon), a rough outline of the island city and suburbs
OUTER = [
    (18.895, 72.815), (18.930, 72.795), (18.975, 72.800), (19.025, 72.812),
    (19.095, 72.818), (19.160, 72.805), (19.215, 72.800), (19.280, 72.838),
    (19.272, 72.880), (19.240, 72.955), (19.160, 72.980), (19.080, 72.975),
    (19.030, 72.950), (18.995, 72.895), (18.950, 72.862), (18.912, 72.842),
]
# national-park style hole with no residents
HOLE = [(19.185, 72.878), (19.238, 72.888), (19.232, 72.932), (19.190, 72.925)]

WARDS = [
    ("A", 18.915, 72.825), ("B", 18.955, 72.835), ("C", 18.950, 72.825),
    ("D", 18.963, 72.813), ("E", 18.975, 72.835), ("F/N", 19.030, 72.855),
    ("F/S", 19.000, 72.845), ("G/N", 19.035, 72.840), ("G/S", 19.005, 72.825),
    ("H/E", 19.075, 72.850), ("H/W", 19.056, 72.835), ("K/E", 19.115, 72.865),
    ("K/W", 19.130, 72.830), ("L", 19.070, 72.879), ("M/E", 19.056, 72.922),
    ("M/W", 19.061, 72.899), ("N", 19.084, 72.906), ("P/N", 19.188, 72.842),
    ("P/S", 19.160, 72.850), ("R/C", 19.235, 72.850), ("R/N", 19.120, 72.852),
    ("R/S", 19.205, 72.850), ("S", 19.139, 72.930), ("T", 19.170, 72.950),
]

RELIGIONS = (["Hindu", "Muslim", "buddhist", "Christian", "Jain", "Sikh"],
             [0.66, 0.20, 0.05, 0.04, 0.03, 0.02])
CASTES = (["other", "OBC", "SC", "ST"], [0.55, 0.25, 0.13, 0.07])

# label, id, essential, public transport, male weight, female weight
JOBS = [
    ("Carpenters", 81, 0, 1, 5.0, 0.3),
    ("Construction", 95, 0, 1, 9.0, 2.0),
    ("Labour nec", 99, 0, 1, 8.0, 3.0),
    ("Sales workers", 43, 1, 1, 9.0, 4.0),
    ("Clerical", 30, 0, 1, 7.0, 5.0),
    ("Professionals", 20, 0, 1, 5.0, 3.0),
    ("Teachers", 15, 1, 1, 2.0, 4.0),
    ("Health workers", 7, 1, 1, 1.5, 3.0),
    ("Drivers", 98, 1, 0, 6.0, 0.2),
    ("Domestic workers", 54, 0, 1, 0.5, 6.0),
]

WORKPLACES = [
    ("construction", 3, ["Carpenters", "Construction", "Labour nec"]),
    ("office", 3, ["Clerical", "Professionals"]),
    ("retail", 3, ["Sales workers"]),
    ("services", 2, ["Drivers", "Domestic workers"]),
    ("education", 1, ["Teachers"]),
    ("health", 1, ["Health workers"]),
]

SIZE_P = {1: 0.06, 2: 0.12, 3: 0.18, 4: 0.26, 5: 0.18, 6: 0.10, 7: 0.06, 8: 0.04}


def height_weight(rng, age, sex):
    male = sex == "Male"
    if age < 18:
        h = 50 + 7.0 * age - 0.08 * age * age + rng.normal(0, 4)
        w = 3.3 + 2.6 * age + rng.normal(0, 1.5)
    else:
        h = rng.normal(165 if male else 152, 7 if male else 6)
        w = rng.normal(62 if male else 55, 11 if male else 10)
    return round(float(np.clip(h, 45, 200)), 2), round(float(np.clip(w, 2.5, 140)), 3)


def seed_job(rng, age, sex):
    if age < 3 or age > 60:
        return "Homebound"
    if age < 18:
        return "Student"
    if sex == "Female":
        u = rng.random()
        if u < 0.45:
            return "Homemaker"
        if u < 0.50:
            return "Unemployed"
        w = np.array([j[5] for j in JOBS])
    else:
        if rng.random() < 0.07:
            return "Unemployed"
        w = np.array([j[4] for j in JOBS])
    return JOBS[rng.choice(len(JOBS), p=w / w.sum())][0]


def household(rng):
    size = int(rng.choice(list(SIZE_P), p=list(SIZE_P.values())))
    head_sex = "Male" if rng.random() < 0.85 else "Female"
    head_age = int(rng.integers(24, 66))
    members = [(head_age, head_sex)]
    if size >= 2 and rng.random() < 0.9:
        members.append((int(np.clip(head_age + rng.integers(-8, 3), 18, 90)),
                        "Female" if head_sex == "Male" else "Male"))
    if size >= 4 and rng.random() < 0.35:
        members.append((int(np.clip(head_age + rng.integers(22, 32), 45, 95)),
                        "Female" if rng.random() < 0.6 else "Male"))
    while len(members) < size:
        age = int(np.clip(head_age - rng.integers(18, 40), 0, 30))
        members.append((age, "Male" if rng.random() < 0.52 else "Female"))
    religion = str(rng.choice(RELIGIONS[0], p=RELIGIONS[1]))
    caste = str(rng.choice(CASTES[0], p=CASTES[1]))
    out = []
    for age, sex in members:
        h, w = height_weight(rng, age, sex)
        out.append(dict(age=age, sex=sex, height=h, weight=w, religion=religion, caste=caste,
                        job_label=seed_job(rng, age, sex)))
    return out


def age_band(age):
    return "0-17" if age < 18 else ("18-59" if age < 60 else "60+")


def size_band(n):
    return str(n) if n < 6 else "6+"


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    ss = np.random.SeedSequence(SEED)
    r_sample, r_census, r_grid, r_share = [np.random.default_rng(s) for s in ss.spawn(4)]

    rows = []
    for k in range(100):
        for m in household(r_sample):
            rows.append([f"{1000 + k}", m["age"], m["sex"], m["height"], m["weight"],
                         m["religion"], m["caste"], m["job_label"]])
    write_csv(OUT / "seed_sample.csv",
              ["hh_id", "age", "sex", "height", "weight", "religion", "caste", "job_label"], rows)

    # census-style totals from a larger draw of the same model
    sizes, ages, sexes = {}, {}, {}
    persons = 0
    while persons < 5000:
        hh = household(r_census)
        persons += len(hh)
        sizes[size_band(len(hh))] = sizes.get(size_band(len(hh)), 0) + 1
        for m in hh:
            ages[age_band(m["age"])] = ages.get(age_band(m["age"]), 0) + 1
            sexes[m["sex"]] = sexes.get(m["sex"], 0) + 1
    write_csv(OUT / "household_marginals.csv", ["attribute", "category", "target"],
              [("size", c, sizes.get(c, 0)) for c in ["1", "2", "3", "4", "5", "6+"]])
    write_csv(OUT / "person_marginals.csv", ["attribute", "category", "target"],
              [("age", c, ages.get(c, 0)) for c in ["0-17", "18-59", "60+"]]
              + [("sex", c, sexes.get(c, 0)) for c in ["Male", "Female"]])

    boundary = {
        "type": "Feature",
        "properties": {"name": "Mumbai (fixture)"},
        "geometry": {
            "type": "Polygon",
            "coordinates": [[[lon, lat] for lat, lon in OUTER + OUTER[:1]],
                            [[lon, lat] for lat, lon in HOLE + HOLE[:1]]],
        },
    }
    (OUT / "boundary.geojson").write_text(json.dumps(boundary, indent=1) + "\n", encoding="utf-8")

    size = 0.01
    cells = []
    centres = [(19.00, 72.84, 1.0), (19.07, 72.88, 1.3), (19.17, 72.85, 0.9), (19.05, 72.93, 0.7)]
    for lat in np.arange(18.885, 19.29, size):
        for lon in np.arange(72.785, 72.99, size):
            d = sum(a * np.exp(-((lat - c0) ** 2 + (lon - c1) ** 2) / (2 * 0.03 ** 2))
                    for c0, c1, a in centres)
            dens = 0.0 if r_grid.random() < 0.05 else round(float(2000 * d + r_grid.uniform(20, 200)), 1)
            cells.append((round(float(lat), 3), round(float(lon), 3), size, dens))
    write_csv(OUT / "density_grid.csv", ["lat", "lon", "cell_size", "density"], cells)

    jobs = [("Student", 199, "*", "*", 0, 0, 1), ("Homebound", 0, "*", "*", 0, 0, 1)]
    for label, jid, ess, pt, wm, wf in JOBS:
        jobs.append((label, jid, "Male", "18+", wm, ess, pt))
        jobs.append((label, jid, "Female", "18+", wf, ess, pt))
    write_csv(OUT / "jobs.csv",
              ["job_label", "job_id", "sex", "age_band", "weight", "essential", "public_transport"], jobs)

    prev = []
    base = {"Fever": 0.03, "Diarrhea": 0.02, "Cataract": 0.01, "Heart_disease": 0.01,
            "Diabetes": 0.03, "Leprosy": 0.001, "Cancer": 0.002, "Asthma": 0.02,
            "Paralysis": 0.002, "Epilepsy": 0.004}
    older = {"Cataract": 0.12, "Heart_disease": 0.06, "Diabetes": 0.12, "Paralysis": 0.01}
    for cond, p in base.items():
        prev.append((cond, "*", "60+", older.get(cond, p)))
        prev.append((cond, "*", "*", p))
    write_csv(OUT / "prevalence.csv", ["condition", "sex", "age_band", "probability"], prev)

    shares = r_share.uniform(0.5, 1.5, size=len(WARDS))
    config = {
        "region": "Mumbai",
        "region_code": 5,
        "seed": 20220717,
        "inputs": {
            "household_marginals": "household_marginals.csv",
            "person_marginals": "person_marginals.csv",
            "seed_sample": "seed_sample.csv",
            "boundary": "boundary.geojson",
            "density_grid": "density_grid.csv",
            "job_table": "jobs.csv",
            "prevalence": "prevalence.csv",
        },
        "ipf": {"enabled": True, "tol": 1e-6, "max_iters": 1000},
        "ipu": {"tol": 0.01, "max_iters": 2000},
        "geo": {"noise_half_width": None, "max_attempts_per_point": 1000, "distance": "euclidean"},
        "admin_units": [{"name": n, "lat": la, "lon": lo, "share": round(float(s), 3)}
                        for (n, la, lo), s in zip(WARDS, shares)],
        "facilities": {
            "schools_per_unit": 3,
            "public_places_per_unit": 2,
            "workplaces": [{"category": c, "per_unit": k, "job_labels": labels}
                           for c, k, labels in WORKPLACES],
        },
        "homebound": {"rates": {"Male": 0.05, "Female": 0.35},
                      "labels": ["Unemployed", "Homemaker"], "retirement_age": 60, "infant_age": 3},
        "adult_age": 18,
        "metrics": {"subsample": 2000},
    }
    (OUT / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
