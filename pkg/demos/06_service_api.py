"""Tour of the HTTP API using an in-process test client: upload text, poll
the job, read the classified document, summary, trends, and interventions.

Run: python3 demos/06_service_api.py
"""

import json
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from concernlens.service import ServiceConfig, create_app
from concernlens.students import save_model
from concernlens.synthetic import keyword_model
from concernlens.taxonomy import default_taxonomy

tax = default_taxonomy()
workdir = Path(tempfile.mkdtemp(prefix="concernlens-demo-"))

# a deterministic keyword-triggered classifier stands in for a trained model
model = keyword_model(
    {
        "1.2": ["retracted"],
        "2": ["need"],
        "3": ["risky"],
        "3.2": ["thimerosal", "aluminum"],
        "5.2": ["conspiracy"],
    },
    tax,
)
model_path = workdir / "model.clm"
model_path.write_bytes(save_model(model))

config = ServiceConfig(data_dir=str(workdir / "data"), model_path=str(model_path))
app = create_app(config)
client = TestClient(app)

# ---------------------------------------------------------------------------
# Upload text -> job id -> poll until done
# ---------------------------------------------------------------------------
article = (
    "They say thimerosal and aluminum are risky additives.\n\n"
    "The retracted paper started a conspiracy panic."
)
resp = client.post("/api/upload/text", json={"text": article, "date": "2021-06-01"})
job_id = resp.json()["job_id"]
print("submitted:", job_id)
while True:
    job = client.get(f"/api/jobs/{job_id}").json()
    if job["state"] in ("done", "failed"):
        break
    time.sleep(0.05)
print("job state:", job["state"], "progress:", job["progress"])

# ---------------------------------------------------------------------------
# Classified document: passage spans + labels for Explore highlighting
# ---------------------------------------------------------------------------
doc_id = job["result"]["doc_ids"][0]
doc = client.get(f"/api/documents/{doc_id}").json()
print(f"\ndocument {doc_id}:")
for p in doc["passages"]:
    ids = [doc["node_ids"][i] for i, b in enumerate(p["labels"]) if b]
    print(f"  span [{p['start']}:{p['end']}] -> {ids}")

# ---------------------------------------------------------------------------
# Summary payload: per-concern examples and word clouds
# ---------------------------------------------------------------------------
summary = client.get(f"/api/summary/{job_id}").json()
for concern in summary["concerns"]:
    terms = [t for t, _ in concern["cloud"][:4]]
    print(f"summary {concern['id']} ({concern['name']}): {concern['count']} passages, cloud {terms}")

# ---------------------------------------------------------------------------
# Intervention query
# ---------------------------------------------------------------------------
q = client.post("/api/interventions/query", json={"text": "worried thimerosal is risky"})
body = q.json()
print(f"\nintervention query detected {body['detected']}")
for m in body["matches"][:3]:
    print(f"  {m['score']:.3f} {m['title']}")

# ---------------------------------------------------------------------------
# Trends CSV over everything stored so far
# ---------------------------------------------------------------------------
csv_text = client.get("/api/trends", params={"window": 1}).text
print(f"\ntrends CSV:\n{csv_text.splitlines()[0][:60]}...")
print(f"({len(csv_text.splitlines()) - 1} data rows)")

app.state.ctx.jobs.shutdown()
print("\ndone")
