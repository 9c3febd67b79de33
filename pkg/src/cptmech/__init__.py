"""Verification toolkit for mechanism design with CPT agents over finite games."""

from .cpt_core import (CptType, DecisionWeights, Lottery, WeightingFunction,
                       cpt_value, cpt_value_cumulative, decision_weights,
                       expected_utility)
from .environment import (Environment, Prior, acf_to_scf, allocation_utility,
                          prior_conditional, pushforward, scf_feasible, utility_w,
                          zeta_marginal)
from .mechanism import (EquilibriumReport, Mechanism, Strategy, Verdict, Witness,
                        as_direct, check_belief_dominant, induced_acf, induced_belief,
                        is_bayes_nash, is_dominant, truthful_strategy)
from .mediated import (MediatedMechanism, MediatedStrategy, PubliclyMediatedMechanism,
                       check_belief_dominant_mediated, induced_acf_mediated,
                       induced_belief_mediated, is_bayes_nash_mediated,
                       is_dominant_mediated, lift_public, lift_strategy,
                       lift_unmediated, lift_unmediated_public, mediator_conditional,
                       truthful_mediated_strategy)
from .probs import DomainError
from .revelation import (TransformResult, TransformSizeError,
                         public_convexity_decomposition_check, reduce_environment_eut,
                         to_direct_mediated, to_direct_public, verify_transform)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
