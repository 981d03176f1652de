//! Parallel maximal transform.

use mdht_core::directions::DirectionSet;
use mdht_core::spectral::{canonical_directions, max_abs_into, Dft, SampledField, Spectrum};
use mdht_core::{Error, Result};
use rayon::prelude::*;

/// Bytes of transient buffers one direction pair needs per grid point: a
/// complex work array and two real outputs.
const PAIR_BYTES: usize = 32;

/// Upper limit on transient memory for concurrently processed pairs.
const MEMORY_BUDGET: usize = 1 << 30;

/// `sup_{v∈Ω} |H_v f|` with direction pairs spread over the rayon pool.
///
/// Pairs are formed in the same canonical order as the sequential core
/// routine and the max is exact, so the result is bit-identical to
/// `mdht_core::spectral::apply_maximal` with the same backend.
pub fn apply_maximal_par<D: Dft + Sync>(f: &SampledField, omega: &DirectionSet, dft: &D) -> Result<SampledField> {
    if omega.is_empty() {
        return Err(Error::Empty("direction set is empty"));
    }
    if omega.dim() + 1 != f.dim() {
        return Err(Error::DimMismatch { expected: f.dim() - 1, found: omega.dim() });
    }
    let spec = Spectrum::of(f, dft);
    let dirs = canonical_directions(omega);
    let pairs: Vec<&[&[mdht_core::Rational]]> = dirs.chunks(2).collect();
    let per_pair = PAIR_BYTES * f.len();
    let batch = rayon::current_num_threads().min((MEMORY_BUDGET / per_pair.max(1)).max(1)).max(1);
    let mut acc = vec![0.0f64; f.len()];
    for group in pairs.chunks(batch) {
        let outs: Vec<Result<(Vec<f64>, Option<Vec<f64>>)>> = group
            .par_iter()
            .map(|pair| {
                let s1 = spec.signs(pair[0])?;
                let s2 = pair.get(1).map(|v| spec.signs(v)).transpose()?;
                Ok(spec.hv_pair(&s1, s2.as_deref(), dft))
            })
            .collect();
        for out in outs {
            let (g1, g2) = out?;
            max_abs_into(&mut acc, &g1);
            if let Some(g2) = g2 {
                max_abs_into(&mut acc, &g2);
            }
        }
    }
    f.with_values(acc)
}

/// `‖H_Ω f‖₂ / ‖f‖₂` using [`apply_maximal_par`].
pub fn rayleigh_par<D: Dft + Sync>(f: &SampledField, omega: &DirectionSet, dft: &D) -> Result<f64> {
    let nf = f.norm();
    if nf == 0.0 {
        return Err(Error::InvalidParam("probe has zero norm".into()));
    }
    Ok(apply_maximal_par(f, omega, dft)?.norm() / nf)
}
