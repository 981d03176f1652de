//! File formats, an FFT backend, parallel drivers, sweeps and fits on top of
//! `mdht-core`.

pub mod check;
pub mod families;
pub mod fft;
pub mod fit;
pub mod formats;
pub mod maximal;
pub mod suite;
pub mod sweep;

pub use fft::RustFft;

/// Builds the global rayon pool, capped by `MDHT_THREADS` when set.
pub fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MDHT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("MDHT_THREADS={v:?} is not a count"))?;
        if n == 0 {
            anyhow::bail!("MDHT_THREADS must be at least 1");
        }
        // A pool built earlier in the process wins; that is fine for tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
