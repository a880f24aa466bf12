//! Shared inputs for the benchmark suite.

use voatrace_core::fock::BracketMonomial;

/// Every rank-`d` bracket monomial of weight at most `max_weight`.
pub fn monomials_up_to(d: u32, max_weight: u64) -> Vec<BracketMonomial> {
    let mut out = Vec::new();
    for w in 0..=max_weight {
        out.extend(BracketMonomial::enumerate(d, w));
    }
    out
}
