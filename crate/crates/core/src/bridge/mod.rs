//! Bridge seminorms between C(S²) and B^n and between B^m and B^n, the
//! rank-one norm kernel they share, empirical bridge constants, bridge
//! verification, and amalgamation of bridges.

mod amalgam;
mod gamma;
mod kernel;
mod norms;
mod verify;

pub use amalgam::{amalgamate, combined_seminorm, Amalgam, AmalgamSpec};
pub use gamma::{
    function_family, gamma_estimates, gamma_with_context, operator_family, GammaContext,
    GammaEstimates, GammaOptions,
};
pub use kernel::{
    rank_one_defect, rank_one_defect_witness, reduce, DefectWitness, ReducedDefect, ReducedSvd,
};
pub use norms::{
    bridge_norm_ab, bridge_norm_bb, AbBridge, AbNodeGradient, BbBridge, BbNodeGradient,
    SharedBbBridge,
};
pub use verify::{
    verify_bridge, verify_standard, BridgeReport, PartnerGap, StandardVerification, VerifyOptions,
};
