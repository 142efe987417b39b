from .metrics import cell_iou, iou, mean_and_variance
from .qualitative import GradeError, QualitativeRecord, QualitativeStore
from .report import emit_matrix_report, emit_report, load_results, matrix_summary
from .suite import (ConstrainedPrompt, CorpusError, EvalResult, TrialResult, corpus_mock_backend,
                    load_corpus, run_constrained_suite)

_MATRIX = ("MatrixAborted", "PairedRow", "derive_seeds", "run_pair", "run_reprompt_matrix")


def __getattr__(name):
    # matrix depends on dronesim, which depends on metrics; import it on first use
    if name in _MATRIX:
        from . import matrix
        return getattr(matrix, name)
    raise AttributeError(name)


__all__ = [
    "ConstrainedPrompt", "CorpusError", "EvalResult", "GradeError", "QualitativeRecord",
    "QualitativeStore", "TrialResult", "cell_iou", "corpus_mock_backend", "emit_matrix_report",
    "emit_report", "iou", "load_corpus", "load_results", "matrix_summary", "mean_and_variance",
    "run_constrained_suite", *_MATRIX,
]
