use super::{argmax, AllocationTable};
use crate::error::{MechError, Result};
use crate::valuation::{compute_c, ScParameter, ValuationInstance};

/// Allocates to the highest value at every profile (ties to the lowest index).
///
/// Only monotone under single crossing, so the instance must measure `c = 1`.
pub fn generalized_vcg(v: &ValuationInstance) -> Result<AllocationTable> {
    let c = compute_c(v)?;
    if c != ScParameter::Finite(1.0) {
        return Err(MechError::NotApplicable(format!(
            "generalized VCG needs single-crossing valuations (c = 1), measured c = {c}"
        )));
    }
    let space = v.space().clone();
    let mut buf = vec![0.0; v.n()];
    let winners = space
        .profiles()
        .map(|s| {
            v.values_into(&s, &mut buf);
            Some(argmax(&buf))
        })
        .collect();
    AllocationTable::new(space, winners)
}
