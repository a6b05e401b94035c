//! Entanglement distillation for Bell-diagonal two-qubit states in the
//! classical label picture: multi-pair blocks as probability
//! distributions over binary labels, distillation protocols as finite
//! trees of parity checks, local Bell measurements and label maps, plus
//! exhaustive protocol search, sampling oracles and the conversion of
//! entanglement-assisted rates into non-assisted schedules.

pub mod bootstrap;
pub mod dist;
pub mod error;
pub mod f2;
pub mod label;
pub mod labelmap;
pub mod montecarlo;
pub mod protocol;
pub mod rates;
pub mod search;

pub use dist::{entropy, normalized_entropy, werner, werner_dist, BlockDist, WernerParams};
pub use error::{Error, Result};
pub use label::{bcnot, BellLabel, LabelString};
pub use labelmap::{
    apply_label_map, count_symplectic_brute_force, enumerate_label_maps, group_order,
    per_pair_subgroup_coset_count, LabelMap, ParityMask,
};
pub use protocol::{
    bell_measure, evaluate, hashing_yield, parity_split, BranchRecord, MeasureOutcome,
    MeasuredBit, ParitySplit, ProtocolNode, RateReport,
};
pub use rates::{
    best_recurrence_then_hash, rate_2copy, rate_asymptotic_recurrence, rate_recurrence_then_hash,
    rate_recurrence_then_hash_twirled, recurrence_step, recurrence_step_twirled,
    reference_tree_2copy, reference_tree_asymptotic_recurrence,
};
pub use search::{
    canonicalize, fmt_sig, optimize, werner_curve, CanonicalKey, SearchConfig, WernerCurve,
    WernerCurveRow,
};

pub use bootstrap::{make_plan, success_bound, BootstrapPlan};
pub use montecarlo::{
    empirical_branch_probabilities, residual_entropy_curve, simulate_parity_check,
    ResidualEntropyPoint, SampledEnsemble,
};
