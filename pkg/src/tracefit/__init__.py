"""Empirical time-complexity classification from step-count traces."""

from tracefit.classify import ClassificationReport, Flag, classify, margin_report
from tracefit.corpus import Algorithm, run_corpus
from tracefit.errors import DomainViolation, InsufficientData, ParseError
from tracefit.fitting import FitFailure, FitOptions, FitResult, fit, mse
from tracefit.grading import AssignmentSpec, Outcome, Verdict, detect_hardcoding, grade
from tracefit.models import (EXP, LIN, LOG, MODELS, NLOGN, QUAD, Basket, CurveModel, ModelId,
                             basket_of, evaluate, get_model, initial_guess, jacobian)
from tracefit.traces import (RunProtocol, TraceSeries, ingest, ingest_csv, ingest_json,
                             run_external)

__version__ = "0.1.0"
