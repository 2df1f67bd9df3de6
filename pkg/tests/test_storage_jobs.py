import io
import threading

import numpy as np
import pytest

from concernlens.errors import (
    ConcernLensError,
    IntegrityError,
    NotFoundError,
    StoreError,
    TeacherUnreachableError,
)
from concernlens.features import FeaturizerConfig
from concernlens.ingest import ingest_text
from concernlens.jobs import Job, JobManager
from concernlens.pipeline import (
    ClassifiedDocument,
    PassageResult,
    classify_document,
    classify_documents,
    document_from_dict,
    document_to_dict,
    load_classified,
    load_document,
    read_corpus,
    store_classified,
    store_document,
    write_corpus,
)
from concernlens.storage import DataStore, StoreCache
from concernlens.synthetic import LookupTeacher, SyntheticConfig, generate, keyword_model
from concernlens.taxonomy import LabelVector, default_taxonomy
from concernlens.teacher import TeacherConfig, annotate_corpus

TAX = default_taxonomy()


class TestBlobs:
    def test_round_trip(self, tmp_path):
        store = DataStore(tmp_path)
        digest = store.put_blob("hello world")
        assert store.get_blob_text(digest) == "hello world"

    def test_double_save_single_copy(self, tmp_path):
        store = DataStore(tmp_path)
        d1 = store.put_blob(b"same bytes")
        d2 = store.put_blob(b"same bytes")
        assert d1 == d2
        assert store.blob_count() == 1

    def test_checksum_tamper_detected(self, tmp_path):
        store = DataStore(tmp_path)
        digest = store.put_blob("important data")
        path = store._blob_path(digest)
        path.write_bytes(b"tampered")
        with pytest.raises(IntegrityError):
            store.get_blob(digest)

    def test_missing_blob(self, tmp_path):
        store = DataStore(tmp_path)
        with pytest.raises(NotFoundError):
            store.get_blob("0" * 64)


class TestRecords:
    def test_save_load_list(self, tmp_path):
        store = DataStore(tmp_path)
        store.save_record("reports", "r1", {"x": 1})
        assert store.load_record("reports", "r1") == {"x": 1}
        assert store.list_records("reports") == ["r1"]
        with pytest.raises(NotFoundError):
            store.load_record("reports", "nope")

    def test_survives_reopen(self, tmp_path):
        DataStore(tmp_path).save_record("documents", "d1", {"doc_id": "d1"})
        store2 = DataStore(tmp_path)
        assert store2.load_record("documents", "d1")["doc_id"] == "d1"


class TestDocumentPersistence:
    def test_document_round_trip(self, tmp_path):
        store = DataStore(tmp_path)
        doc = ingest_text("First para.\n\nSecond para.", doc_id="docA")
        store_document(store, doc)
        loaded = load_document(store, "docA")
        assert loaded.raw_text == doc.raw_text
        assert loaded.passages == doc.passages

    def test_corpus_file_round_trip(self):
        docs = [
            ingest_text("Alpha beta gamma.", doc_id="a"),
            ingest_text("One.\n\nTwo.", doc_id="b"),
        ]
        buf = io.StringIO()
        assert write_corpus(docs, buf) == 2
        buf.seek(0)
        loaded = list(read_corpus(buf))
        assert [d.doc_id for d in loaded] == ["a", "b"]
        assert loaded[1].passages[1].text == "Two."

    def test_dict_round_trip_preserves_fields(self):
        from datetime import date

        doc = ingest_text("Some text body.", doc_id="x", published_at=date(2021, 2, 3))
        assert document_from_dict(document_to_dict(doc)) == doc


class TestClassifiedDocuments:
    def make_model(self):
        return keyword_model({"2": ["need"], "3.2": ["thimerosal"]}, TAX)

    def test_classify_and_or_invariant(self, tmp_path):
        model = self.make_model()
        doc = ingest_text(
            "I don't need the vaccine!\n\nAlso thimerosal is poison they say.",
            doc_id="d1",
        )
        cdoc = classify_document(model, doc, TAX)
        assert cdoc.article_labels == LabelVector.from_ids(["2", "3.2"], TAX)
        cdoc.check_or_invariant()
        store = DataStore(tmp_path)
        store_classified(store, cdoc)
        assert load_classified(store, "d1") == cdoc

    def test_or_violation_detected(self):
        bad = ClassifiedDocument(
            doc_id="bad",
            passages=(
                PassageResult("p", 0, 4, scores=(0.9,) + (0.1,) * 23, labels=(1,) + (0,) * 23),
            ),
            article_labels=LabelVector.zeros(24),
        )
        with pytest.raises(StoreError):
            bad.check_or_invariant()

    def test_batch_matches_single(self):
        model = self.make_model()
        docs = [
            ingest_text(f"Doc {i}: people need answers about thimerosal.", doc_id=f"d{i}")
            for i in range(5)
        ]
        batch = classify_documents(model, docs, TAX)
        singles = [classify_document(model, d, TAX) for d in docs]
        assert batch == singles


class TestJobs:
    def test_lifecycle(self, tmp_path):
        mgr = JobManager(DataStore(tmp_path), workers=2)
        job = mgr.submit("classify", lambda progress: {"n": 3})
        done = mgr.wait(job.job_id)
        assert done.state == "done"
        assert done.result == {"n": 3}
        assert done.progress == 1.0
        mgr.shutdown()

    def test_failure_captured(self, tmp_path):
        mgr = JobManager(DataStore(tmp_path), workers=1)

        def boom(progress):
            raise ValueError("exploded")

        job = mgr.submit("ingest", boom)
        done = mgr.wait(job.job_id)
        assert done.state == "failed"
        assert "exploded" in done.error
        mgr.shutdown()

    def test_progress_monotone(self, tmp_path):
        mgr = JobManager(DataStore(tmp_path), workers=1)
        seen = []

        def work(progress):
            progress(0.5)
            progress(0.2)  # ignored: monotone
            seen.append(mgr.get(job.job_id).progress)
            return {}

        job = mgr.submit("trend", work)
        mgr.wait(job.job_id)
        assert seen == [0.5]
        mgr.shutdown()

    def test_unknown_job(self, tmp_path):
        mgr = JobManager(DataStore(tmp_path), workers=1)
        with pytest.raises(NotFoundError):
            mgr.get("job-999999")
        mgr.shutdown()

    def test_restart_marks_running_jobs_failed(self, tmp_path):
        store = DataStore(tmp_path)
        # simulate a crash: a job persisted as running with no live worker
        store.save_record(
            "jobs",
            "job-000007",
            Job(job_id="job-000007", kind="annotate", state="running", progress=0.4).to_dict(),
        )
        mgr = JobManager(store, workers=1)
        job = mgr.get("job-000007")
        assert job.state == "failed"
        assert "restart" in job.error
        # ids continue past recovered ones
        newer = mgr.submit("classify", lambda p: {})
        assert newer.job_id == "job-000008"
        mgr.shutdown()

    def test_unknown_kind_rejected(self, tmp_path):
        mgr = JobManager(DataStore(tmp_path), workers=1)
        with pytest.raises(ValueError):
            mgr.submit("bake", lambda p: {})
        mgr.shutdown()


class CrashingTeacher:
    """Wraps a teacher; raises a hard crash on the nth call."""

    def __init__(self, inner, crash_on_call):
        self.inner = inner
        self.crash_on_call = crash_on_call
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt):
        with self._lock:
            self.calls += 1
            if self.calls == self.crash_on_call:
                raise KeyboardInterrupt("simulated crash")
        return self.inner.complete(prompt)


class TestCrashRecovery:
    def test_no_duplicate_teacher_calls_after_crash(self, tmp_path):
        corpus = generate(SyntheticConfig(n_articles=4, passages_per_article=5, seed=2), TAX)
        passages = corpus.passages[:12]
        store = DataStore(tmp_path)
        cache = StoreCache(store)
        cfg = TeacherConfig(max_parallel=1, retry_limit=0, backoff_base=0.0)

        crasher = CrashingTeacher(LookupTeacher.from_corpus(corpus), crash_on_call=6)
        with pytest.raises(KeyboardInterrupt):
            annotate_corpus(passages, "multilabel", cfg, crasher, TAX, cache=cache)
        assert crasher.calls == 6  # five answered + the crash itself
        assert crasher.inner.calls == 5  # only answered calls reached the teacher

        # "restart": fresh cache adapter over the same store, same teacher
        cache2 = StoreCache(DataStore(tmp_path))
        records = annotate_corpus(passages, "multilabel", cfg, crasher.inner, TAX, cache=cache2)
        assert all(r.valid for r in records)
        # the five answered before the crash came from the cache this time
        assert cache2.hits == 5
        # across both runs each unique prompt hit the teacher exactly once
        assert crasher.inner.calls == len(passages)
