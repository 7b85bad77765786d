"""Classical replaceability of quantum operations.

Tools to decide whether a quantum operation followed or preceded by
computational-basis measurements can be replaced by classical stochastic
processing, to extract that processing when it exists, and to quantify the
gap when it does not: a robustness measure with dual witness certificates, a
closed-form relative-entropy measure, and discrimination games on which
irreplaceable channels provably outscore every replaceable one.
"""

from .channels import (
    Channel,
    ProjectorSet,
    apply,
    basis_pvm,
    block_dephasing,
    channel_from_kraus,
    channel_partial_trace,
    choi_max_diff,
    compose,
    dephasing,
    identity_channel,
    interpolation_unitary,
    mix,
    named_gate,
    pauli_channel_T,
    random_channel,
    te_channel,
    tensor,
    unitary_channel,
)
from .cro import (
    CroVerdict,
    EbVerdict,
    eb_ppt_test,
    is_cqcro,
    is_cro_pvm,
    is_deterministic_cru,
    is_dio,
    is_qccro,
    is_qccro_two_pvm,
    is_qccro_under_unitaries,
    is_qqcro,
    random_qccro,
    vqa_replaceable_set_R,
)
from .game import (
    GameSpec,
    certified_game,
    extremal_payoff_over_qccro,
    game_from_witness,
    payoff,
    witness_operator,
)
from .measures import (
    RobustnessResult,
    measure_property_suite,
    relative_entropy_irreplaceability,
    robustness,
    robustness_equivalents,
)

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "CroVerdict",
    "EbVerdict",
    "GameSpec",
    "ProjectorSet",
    "RobustnessResult",
    "apply",
    "basis_pvm",
    "block_dephasing",
    "certified_game",
    "channel_from_kraus",
    "channel_partial_trace",
    "choi_max_diff",
    "compose",
    "dephasing",
    "eb_ppt_test",
    "extremal_payoff_over_qccro",
    "game_from_witness",
    "identity_channel",
    "interpolation_unitary",
    "is_cqcro",
    "is_cro_pvm",
    "is_deterministic_cru",
    "is_dio",
    "is_qccro",
    "is_qccro_two_pvm",
    "is_qccro_under_unitaries",
    "is_qqcro",
    "measure_property_suite",
    "mix",
    "named_gate",
    "pauli_channel_T",
    "payoff",
    "random_channel",
    "random_qccro",
    "relative_entropy_irreplaceability",
    "robustness",
    "robustness_equivalents",
    "te_channel",
    "tensor",
    "unitary_channel",
    "vqa_replaceable_set_R",
    "witness_operator",
    "__version__",
]
