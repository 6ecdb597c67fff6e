"""Seeded random model documents for oracle and property checks."""

import random

from fodeploy import validate_model

ASILS = ["QM", "A", "B", "C", "D"]


def random_model_doc(rng: random.Random, max_nodes: int = 4, max_clusters: int = 6) -> dict:
    n_nodes = rng.randint(1, max_nodes)
    nodes = [{"id": f"e{i + 1}", "kind": "central", "time_budget_us": rng.choice([2000, 3000, 4000, 5000]),
              "power_supply": rng.choice(["red", "blue"])} for i in range(n_nodes)]
    if rng.random() < 0.3:
        nodes.append({"id": "sa1", "kind": "peripheral", "power_supply": rng.choice(["red", "blue"])})

    classes = rng.sample([(a, f) for a in range(5) for f in range(4)], rng.randint(1, max_clusters))
    aswcs = []
    for asil, fail_op in classes:
        for _ in range(rng.randint(1, 2)):
            aswcs.append({"id": f"s{len(aswcs) + 1}", "asil": ASILS[asil], "fail_op": fail_op,
                          "wcet_us": rng.randrange(100, 2600, 100),
                          "min_ftt_us": rng.choice([10_000, 40_000, 60_000, 100_000])})
    rng.shuffle(aswcs)
    ids = [a["id"] for a in aswcs]
    features = []
    for i in range(rng.randint(1, 4)):
        features.append({"id": f"f{i + 1}", "aswcs": rng.sample(ids, rng.randint(1, min(3, len(ids))))})
    return {"frt_us": 50_000, "features": features, "aswcs": aswcs, "nodes": nodes}


def random_models(seed: int, count: int, **kw):
    rng = random.Random(seed)
    return [validate_model(random_model_doc(rng, **kw)) for _ in range(count)]
