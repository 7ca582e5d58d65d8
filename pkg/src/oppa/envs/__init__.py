"""Training and evaluation environments plus metric kernels."""

from .negotiation import (EnvStateError, IllegalAct, NegotiationEnv,
                          NegotiationGame, ThresholdOpponent, nego_new,
                          nego_score, nego_step, pareto_optimal, scenario_space)
from .cooperative import (AgendaSimulator, CooperativeEnv, coop_new,
                          coop_user_step, sample_goal, scripted_system_act)
from .metrics import (SessionRecord, inform_f1, inform_recall, match_rate,
                      record_cooperative, record_negotiation, success)

__all__ = [
    "EnvStateError", "IllegalAct", "NegotiationEnv", "NegotiationGame",
    "ThresholdOpponent", "nego_new", "nego_score", "nego_step",
    "pareto_optimal", "scenario_space",
    "AgendaSimulator", "CooperativeEnv", "coop_new", "coop_user_step",
    "sample_goal", "scripted_system_act",
    "SessionRecord", "inform_f1", "inform_recall", "match_rate",
    "record_cooperative", "record_negotiation", "success",
]
