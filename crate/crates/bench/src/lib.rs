//! Shared inputs for the kernel benchmarks.

use lowdisc::heatflow::FlowState;
use lowdisc::{BigReal, FundamentalDiscriminant, Precision};

/// Discriminants spanning the sizes used in practice.
pub const DISCS: [i64; 3] = [-163, -17923, -115147];

pub fn precision() -> Precision {
    Precision::new(30).expect("valid precision")
}

pub fn disc(n: i64) -> FundamentalDiscriminant {
    FundamentalDiscriminant::new(n).expect("fundamental")
}

/// `m` well-separated positive points `0.2, 1.2, 2.2, …` at `t = 0`.
pub fn spread_state(m: usize) -> FlowState {
    let p = precision();
    let x = (0..m)
        .map(|k| BigReal::ratio(10 * k as i64 + 2, 10, p))
        .collect();
    FlowState::new(BigReal::zero(p), x).expect("ordered positive points")
}
