"""Algorithmic-probability tools: a reference prior, Levin-style search and model updating."""
from .errors import AprobError, DomainError, InsufficientDepthError, ModelFileError, StreamContractError
from .machines import get_machine, run_expr, run_monotone
from .modelfile import load_model, save_model
from .prob_model import Alphabet, ConditionalModel, ProbabilityModel, SymbolModel, total_description_length
from .search import (Bet, CandidateStream, Inversion, Optimization, expected_spend, levin_search, optimize,
                     order_bets, stream_from_model)
from .universal_prior import minimal_programs, pm_estimate, predict_next
from .update import compress_corpus, incorporate_solution, session

__all__ = [
    "AprobError", "DomainError", "InsufficientDepthError", "ModelFileError", "StreamContractError",
    "get_machine", "run_expr", "run_monotone",
    "load_model", "save_model",
    "Alphabet", "ConditionalModel", "ProbabilityModel", "SymbolModel", "total_description_length",
    "Bet", "CandidateStream", "Inversion", "Optimization", "expected_spend", "levin_search", "optimize",
    "order_bets", "stream_from_model",
    "minimal_programs", "pm_estimate", "predict_next",
    "compress_corpus", "incorporate_solution", "session",
]
