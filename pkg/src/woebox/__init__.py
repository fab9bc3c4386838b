"""Weight-of-evidence explanations for tabular classifiers.

Contrastive, decomposable, sequential explanations in log-odds units:
each prediction is explained by how much every feature (or feature
group) shifts the odds of the kept classes against the ruled-out ones,
with priors and evidence reported separately. Opaque predictors are
handled through a likelihood surrogate fitted once on their outputs.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .data import Dataset, SyntheticSpec, generate_synthetic, load_csv, save_csv
from .engine import (
    FeaturePartition,
    WoEQuery,
    conditional_atom_woe,
    decompose_woe,
    explanation_vector,
    gnb_atom_woe_sign,
    logistic_atom_woe,
    logistic_total_woe,
    prior_log_odds,
    total_woe,
    woe_from_log_likelihoods,
)
from .errors import DegenerateModelError, LikelihoodUnavailableError, WoeboxError
from .evaluation import (
    EstimationConfig,
    EstimationReport,
    LipschitzResult,
    RobustnessConfig,
    RobustnessReport,
    lipschitz_estimate,
    make_explanation_fn,
    mse,
    run_estimation_benchmark,
    run_robustness_benchmark,
    signed_ndcg,
)
from .explain import (
    EXPLANATION_SCHEMA,
    Explanation,
    ExplainerConfig,
    ExplanationStep,
    explain,
    regularizer,
    salient_atoms,
    select_hypothesis,
)
from .model_io import load_model, save_model
from .models import (
    BlackBox,
    ClampDiagnostics,
    GaussianFullModel,
    GaussianNBModel,
    LogisticModel,
    class_set_log_likelihood,
    conditional_gaussian,
    fit_gnb,
    fit_lda,
    fit_logistic,
    fit_qda,
    posterior_log_odds,
    predict,
    predict_batch,
    predict_proba,
)
from .surrogate import SurrogateModel, explain_black_box, fit_surrogate

__version__ = "0.1.0"
