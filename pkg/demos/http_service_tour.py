"""Tour of the HTTP service without a running server.

Drives the FastAPI app in-process through its test client: upload a
dataset, run the k-sample test, launch a clustering job, poll it, and
run the k-sample check on the fitted clusters. The same calls work
against `uvicorn kbqd.service:app` from any HTTP client.
"""

import io
import time

import numpy as np
from fastapi.testclient import TestClient

from kbqd import RandomSource
from kbqd.pkbd import rpkb_rejacg
from kbqd.service import create_app

client = TestClient(create_app())
rng = RandomSource(2468)

# build a labeled spherical dataset and upload it as CSV
parts, labels = [], []
for g, mu in enumerate(([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0])):
    parts.append(rpkb_rejacg(80, np.array(mu), 0.9, rng.child(g)).samples)
    labels.append(np.full(80, g + 1.0))
table = np.column_stack([np.concatenate(parts), np.concatenate(labels)])
csv_text = "\n".join(",".join(repr(float(v)) for v in row) for row in table)

info = client.post("/v1/data", files={
    "file": ("sphere.csv", io.BytesIO(csv_text.encode()), "text/csv")}).json()
print(f"uploaded dataset {info['dataset_id']}: {info['n']} x {info['d']}")

resp = client.post("/v1/tests/ksample", json={
    "dataset_id": info["dataset_id"], "labels_col": 4, "h": 0.5,
    "seed": 7}).json()
print(f"k-sample test: statistics={resp['statistics']} "
      f"reject={resp['h0_rejected']}")

job = client.post("/v1/clustering/run", json={
    "dataset_id": info["dataset_id"], "k_values": [2, 3, 4],
    "true_labels_col": 4, "num_init": 4, "seed": 7}).json()
print(f"clustering job {job['job_id']} submitted")
while True:
    status = client.get(f"/v1/jobs/{job['job_id']}").json()
    if status["status"] in ("done", "failed"):
        break
    time.sleep(0.1)
result = status["result"]
print("per-k ARI:", {k: round(v["ari"], 3) for k, v in result["fits"].items()})

check = client.post("/v1/clustering/ksample-check", json={
    "fit_id": result["fit_id"], "k": 3, "h": 0.5, "seed": 8}).json()
print(f"k-sample check on fitted clusters (k=3): reject={check['h0_rejected']}")
