//! Desk-scale constructive verification: sample constant-composition
//! codes, compute exact packing statistics, run the expurgation
//! procedures, and measure error probabilities against the bound
//! machinery.

mod error_sim;
mod mac_lab;
mod p2p;

pub use error_sim::{
    empirical_exponent, exact_error_probability, exact_error_probability_mac,
    monte_carlo_error, monte_carlo_error_mac, EmpiricalReport, McEstimate, TypicalityBand,
};
pub use mac_lab::{
    mac_expurgate, mac_n_census, mac_packing_lambda, mac_packing_n, sample_mac_code, MacCode,
    MacExpurgationReport, MacPacking,
};
pub use p2p::{
    expurgate_p2p, pair_type_census, pair_type_mi, packing_lambda, packing_pi,
    sample_p2p_code, sandwich_check_p2p, ExpurgationReport, P2PCode, SandwichGroup,
    SandwichReport,
};

/// Slack band for the packing-lemma verifications, in bits per symbol.
#[derive(Debug, Clone, Copy)]
pub struct VerificationBand {
    pub delta: f64,
    pub n: usize,
}

impl VerificationBand {
    pub fn new(delta: f64, n: usize) -> Self {
        assert!(delta > 0.0, "band slack must be positive");
        Self { delta, n }
    }
}

/// Deterministic seed splitting (splitmix64 finalizer): per-sample RNG
/// streams independent of scheduling order.
pub fn split_seed(seed: u64, idx: u64) -> u64 {
    let mut z = seed ^ idx.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
