"""Cost-sensitive decision tree induction.

Trees are grown with C4.5-style induction under a pluggable selection
measure (gain ratio, EG2's ICF, CS-ID3, IDX), costed with test prices,
shared group costs, delayed tests and a classification cost matrix, and
tuned by a genetic search over induction biases (ICET).
"""

from .cost import EvaluationReport, average_cost, case_cost, max_cost, price_of_test, standard_cost
from .data import (
    AttributeMeta,
    Case,
    Dataset,
    SplitPair,
    class_frequencies,
    drop_missing_cases,
    impute_nearest_neighbor,
    load_bundled,
    load_dataset,
    random_split,
    sub_split,
)
from .genetic import GAConfig, IcetResult, icet
from .schema import ClassificationCostMatrix, CostConfig, TestCost, TestCostSchema, load_cost_config
from .tree import CSID3, ICF, IDX, DecisionTree, GainRatio, InductionParams, build_tree, prune

__version__ = "0.1.0"
