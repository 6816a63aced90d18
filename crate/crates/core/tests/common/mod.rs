//! Random parameter generators shared by the integration tests.

#![allow(dead_code)]

use gwi_core::{classify, CaseTag, Order, ParamSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Draws a parameter set of the requested case at order `lambda`.
///
/// Ranges are kept small so that path enumeration stays cheap for `n ≤ 4`.
pub fn sample_case(rng: &mut ChaCha8Rng, case: CaseTag, lambda: Order) -> ParamSet {
    for _ in 0..1_000_000 {
        let b_a = rng.random_range(0.2..1.6);
        let b_h = rng.random_range(0.2..1.6);
        let a_h = rng.random_range(0.2..3.0);
        let candidate = match case {
            CaseTag::NI => ParamSet::new(b_a, b_h, 0.0, 0.0),
            CaseTag::SP1 => ParamSet::new(b_a, b_h, a_h * b_a / b_h, a_h),
            CaseTag::SP2 => ParamSet::new(b_a, b_h, a_h, a_h),
            CaseTag::SP4 => ParamSet::new(b_a, b_a, rng.random_range(0.2..3.0), a_h),
            CaseTag::SP3d => {
                let k = rng.random_range(1..4) as f64;
                ParamSet::new(b_a, b_h, a_h + k * (b_h - b_a), a_h)
            }
            _ => ParamSet::new(b_a, b_h, rng.random_range(0.2..3.0), a_h),
        };
        if let Ok(p) = candidate {
            if classify(&p, lambda) == case {
                return p;
            }
        }
    }
    panic!("could not sample case {case}");
}

/// Any valid parameter set from the generator ranges.
pub fn sample_any(rng: &mut ChaCha8Rng, lambda: Order) -> ParamSet {
    let case = CaseTag::ALL[rng.random_range(0..CaseTag::ALL.len())];
    sample_case(rng, case, lambda)
}

/// `a ≤ b` up to rounding relative to the magnitudes involved.
pub fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-10 * (1.0 + a.abs().max(b.abs()))
}
