"""Exception hierarchy shared by all claimgraph modules."""


class ClaimgraphError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ClaimgraphError):
    """Vector dimensions do not match the expected dimension."""


class DegenerateVectorError(ClaimgraphError):
    """Operation undefined for a zero vector (cosine distance)."""


class EmptyCorpusError(ClaimgraphError):
    """A corpus-consuming operation received no documents."""


class EmptyDatasetError(ClaimgraphError):
    """An evaluation received no labeled pairs."""


class MissingVectorError(ClaimgraphError):
    """Vector store has no entry for the requested text."""


class MissingLabelError(ClaimgraphError):
    """A clustered claim has no story label."""


class RemoteTimeoutError(ClaimgraphError):
    """Remote embedding service did not answer within the timeout."""


class RemoteProtocolError(ClaimgraphError):
    """Remote embedding service returned a non-2xx or malformed response."""


class DuplicateClaimError(ClaimgraphError):
    """A claim with this id is already stored."""


class DuplicateArticleError(ClaimgraphError):
    """An article with this id was already ingested."""


class UndefinedModularityError(ClaimgraphError):
    """Modularity is undefined on a graph without edges."""


class DegenerateLabelsError(ClaimgraphError):
    """A binary task received only one class."""


class AlignmentError(ClaimgraphError):
    """Two parallel sequences have different lengths."""


class CorpusFormatError(ClaimgraphError):
    """An input file does not follow its documented format."""
