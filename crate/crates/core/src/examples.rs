//! Reference potentials with known zero-temperature behaviour.

use crate::spectral::LocallyConstantPotential;
use crate::symbolic::{full_shift, Sft};

fn binary() -> Sft {
    full_shift(1, 0.5).expect("valid parameters")
}

/// Depth-1 potential on the full 2-shift with `A(01) = b`, `A(10) = d` and
/// zero on `00` and `11`.
pub fn two_symbol(b: f64, d: f64) -> LocallyConstantPotential {
    LocallyConstantPotential::from_fn(binary(), 1, |w| match w {
        [0, 1] => b,
        [1, 0] => d,
        _ => 0.0,
    })
    .expect("table is total")
}

/// `A(01) = A(10) = −1`: `P(βA) = log(1 + e^{−β})`.
pub fn lc1() -> LocallyConstantPotential {
    two_symbol(-1.0, -1.0)
}

/// `A(01) = −1`, `A(10) = −2`: `P(βA) = log(1 + e^{−3β/2})`.
pub fn lc2() -> LocallyConstantPotential {
    two_symbol(-1.0, -2.0)
}

pub fn zero_potential(sft: Sft) -> LocallyConstantPotential {
    LocallyConstantPotential::from_fn(sft, 1, |_| 0.0).expect("table is total")
}

/// Full 3-shift, zero on the loop at 0 and on the 2-cycle `1 → 2 → 1`.
///
/// The cost matrix is `[[−2.5, −1.5], [−1, −2.5]]`, so `γ = −5/4`.
pub fn three_symbol_two_cycles() -> LocallyConstantPotential {
    let sft = full_shift(2, 0.5).expect("valid parameters");
    LocallyConstantPotential::from_fn(sft, 1, |w| match w {
        [0, 0] | [1, 2] | [2, 1] => 0.0,
        [0, 1] => -1.0,
        [1, 0] => -2.0,
        [0, 2] => -1.5,
        [2, 0] => -1.5,
        [1, 1] | [2, 2] => -3.0,
        _ => unreachable!("depth-1 table on three symbols"),
    })
    .expect("table is total")
}
