"""Turning raw inputs into documents with offset-exact passages.

Run: python3 demos/02_ingest_and_segment.py
"""

from concernlens.ingest import extract_main_text, ingest_file, ingest_text, segment

# ---------------------------------------------------------------------------
# Text input: paragraphs become passages; offsets always slice raw_text back
# ---------------------------------------------------------------------------
body = (
    "Vaccination rates have stalled in several regions this year.\n\n"
    "Local clinics report a rise in exemption requests. "
    "Some cite online rumors about ingredients.\n\n"
    "Health departments are planning outreach campaigns."
)
doc = ingest_text(body)
print(f"document {doc.doc_id}: {len(doc.passages)} passages")
for p in doc.passages:
    assert body[p.start : p.end] == p.text
    print(f"  [{p.start:3d}:{p.end:3d}] {p.text[:50]}...")

# ---------------------------------------------------------------------------
# Long paragraphs split at sentence boundaries, greedily packed
# ---------------------------------------------------------------------------
long_para = " ".join(f"Sentence number {i} fills space." for i in range(40))
spans = segment(long_para, max_passage_len=200)
print(f"\n{len(long_para)}-char paragraph -> {len(spans)} passages, all <= 200 chars")
assert all(e - s <= 200 for s, e in spans)

# ---------------------------------------------------------------------------
# File ingestion streams records and reports skipped lines
# ---------------------------------------------------------------------------
jsonl = b'{"id": "a", "text": "First record.", "date": "2024-05-01"}\nbroken line\n{"id": "b", "text": "Second record."}'
docs, summary = ingest_file(jsonl, "jsonl")
print(f"\nJSONL: ingested {summary.ingested}, skipped {summary.skipped}")

# ---------------------------------------------------------------------------
# HTML main-content extraction strips boilerplate
# ---------------------------------------------------------------------------
html = """
<html><body>
<nav>Home | About | Contact</nav>
<article><h1>Quiet Headline</h1><p>Only this text matters.</p></article>
<footer>(c) nobody</footer>
</body></html>
"""
print("\nextracted:", repr(extract_main_text(html)))
