"""Exception types shared across the library.

Every error raised by concernlens derives from :class:`ConcernLensError`,
so callers (and the HTTP layer) can map failures to structured responses
without catching bare ``Exception``.
"""


class ConcernLensError(Exception):
    """Base class for all library errors."""

    code = "internal_error"


# --- taxonomy ---------------------------------------------------------------

class TaxonomyError(ConcernLensError):
    code = "taxonomy_invalid"


class MalformedNodeIdError(TaxonomyError):
    code = "taxonomy_malformed_id"


class MissingParentError(TaxonomyError):
    code = "taxonomy_missing_parent"


class DuplicateNodeIdError(TaxonomyError):
    code = "taxonomy_duplicate_id"


class EmptyDefinitionError(TaxonomyError):
    code = "taxonomy_empty_definition"


class UnknownNodeError(TaxonomyError):
    code = "taxonomy_unknown_node"


class AlignmentError(ConcernLensError):
    """A label vector does not line up with the active taxonomy."""

    code = "label_alignment"


# --- ingestion --------------------------------------------------------------

class IngestError(ConcernLensError):
    code = "ingest_error"


class EmptyInputError(IngestError):
    code = "empty_input"


class FetchError(IngestError):
    """Network failure or non-success HTTP status while fetching a URL."""

    code = "fetch_error"


class NonHtmlContentError(IngestError):
    code = "non_html_content"


class EmptyExtractionError(IngestError):
    """HTML fetched fine but no article text survived extraction."""

    code = "empty_extraction"


class SchemaError(IngestError):
    """An uploaded file does not match its declared record schema."""

    code = "schema_error"


# --- teacher ----------------------------------------------------------------

class TeacherError(ConcernLensError):
    code = "teacher_error"


class UnparseableResponseError(TeacherError):
    """The teacher's reply did not contain a recognizable answer."""

    code = "unparseable_response"


class TeacherUnreachableError(TeacherError):
    code = "teacher_unreachable"


# --- student models ---------------------------------------------------------

class ModelError(ConcernLensError):
    code = "model_error"


class ModelFormatError(ModelError):
    code = "model_format"


class VersionMismatchError(ModelError):
    """Model was built against a different taxonomy version."""

    code = "taxonomy_version_mismatch"


class TrainingDivergedError(ModelError):
    """Loss became NaN/Inf during training (learning rate too high)."""

    code = "training_diverged"


# --- analytics --------------------------------------------------------------

class AnalyticsError(ConcernLensError):
    code = "analytics_error"


class UnsortedArticlesError(AnalyticsError):
    code = "unsorted_articles"


class InsufficientDataError(AnalyticsError):
    code = "insufficient_data"


# --- interventions ----------------------------------------------------------

class InterventionError(ConcernLensError):
    code = "intervention_error"


class NoConcernsError(InterventionError):
    """Query labels contain no positive concern."""

    code = "no_concerns_detected"


class EmptyStoreError(InterventionError):
    code = "empty_intervention_store"


# --- storage / service ------------------------------------------------------

class StoreError(ConcernLensError):
    code = "store_error"


class IntegrityError(StoreError):
    """Stored bytes fail their checksum."""

    code = "integrity_error"


class NotFoundError(ConcernLensError):
    code = "not_found"


class JobNotFoundError(NotFoundError):
    code = "job_not_found"
