"""Distinguishability of quantum strategies (combs) via semidefinite programs.

The layers, bottom up: labeled tensor operators (``tensor``), comb Choi
operators and their checks (``comb``), SDP construction and lowering
(``maps``, ``sdp``, ``programs``), an interior-point solver (``solver``), and
the command-line front end (``cli``).
"""
from .errors import (BuildError, DomainError, LabelingError, NumericContractError, ParseError,
                     QStratError, RenderError, SolverStatusError)
from .tensor import LabeledOperator, SystemLabel
from .comb import (GadcParams, RoundStructure, StrategyChoi, gadc_choi, identity_choi,
                   link_product, n_fold_sequential_choi, random_channel_choi, tensor_power_choi,
                   verify_comb)
from .solver import SolverOptions, SolveReport, solve
from .programs import QuantityResult, evaluate, exact_cost_comb

__version__ = "0.1.0"
