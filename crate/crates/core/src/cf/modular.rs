use serde::{Deserialize, Serialize};

use super::{ContinuedFraction, Magnitude};
use crate::error::{Error, Result};

/// Generators of the modular group acting on the represented number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModularGenerator {
    /// `w -> w + 1`
    T,
    /// `w -> 1 / w`, for `w` in (0, 1)
    S,
}

/// Apply `T` or `S` by editing the quotient list.
///
/// `T` increments `a_0`. `S` needs `a_0 = 0` and drops it, turning
/// `[0; a_1, a_2, ...]` into `[a_1; a_2, ...]`, so the result is one level
/// shallower.
pub fn modular_act(gen: ModularGenerator, cf: &ContinuedFraction) -> Result<ContinuedFraction> {
    let q = cf.quotients();
    match gen {
        ModularGenerator::T => {
            let mut out = q.to_vec();
            out[0] = match &q[0] {
                Magnitude::Exact(a) => Magnitude::Exact(a.clone() + 1u32),
                Magnitude::Log(_) => return Err(Error::Domain("integer part too large to shift".into())),
            };
            ContinuedFraction::new(out, cf.precision())
        }
        ModularGenerator::S => {
            if !q[0].is_zero() {
                return Err(Error::Domain("S acts only on numbers in (0, 1), i.e. a_0 = 0".into()));
            }
            ContinuedFraction::new(q[1..].to_vec(), cf.precision())
        }
    }
}
