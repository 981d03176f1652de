//! Probe suites and grid selection for Rayleigh-quotient estimates.

use anyhow::{bail, Context};
use mdht_core::directions::DirectionSet;
use mdht_core::probe::{
    band_limited_noise, build_sharpness_field, default_probe_grid, probe_grid_with_box, refine_probe, report_from,
    sv_restricted_energy, ProbeGrid, ProbeReport, ProbeResult, RegionEnergy, SharpnessSpec,
};
use mdht_core::spectral::SampledField;
use mdht_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::fft::RustFft;
use crate::maximal::rayleigh_par;

/// Box padding used when no box is given: twice the smallest power-of-two box.
pub const DEFAULT_PADDING: f64 = 2.0;

/// Default fraction of each axis' frequencies kept in random probes.
pub const DEFAULT_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub sharpness: bool,
    pub random: usize,
    /// Power-iteration steps applied to the first probe.
    pub refined: Option<usize>,
    pub cutoff: f64,
}

impl Suite {
    /// `sharpness`, `random[:k]`, `refined[:iters]` and `cutoff:c`, joined by `+`.
    pub fn parse(s: &str) -> anyhow::Result<Suite> {
        let mut out = Suite { sharpness: false, random: 0, refined: None, cutoff: DEFAULT_CUTOFF };
        for part in s.split('+') {
            let (head, arg) = match part.split_once(':') {
                Some((h, a)) => (h, Some(a)),
                None => (part, None),
            };
            let num = |d: usize| -> anyhow::Result<usize> {
                arg.map_or(Ok(d), |a| a.parse().map_err(|_| anyhow::anyhow!("bad count {a:?} in suite {s:?}")))
            };
            match head {
                "sharpness" if arg.is_none() => out.sharpness = true,
                "random" => out.random = num(32)?,
                "refined" => out.refined = Some(num(6)?),
                "cutoff" => {
                    out.cutoff = arg
                        .and_then(|a| a.parse().ok())
                        .with_context(|| format!("cutoff needs a value in {s:?}"))?
                }
                _ => bail!("unknown suite part {part:?}; use sharpness, random[:k], refined[:iters], cutoff:c"),
            }
        }
        if !out.sharpness && out.random == 0 {
            bail!("suite {s:?} has no probes");
        }
        Ok(out)
    }
}

/// How the sampled box is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum BoxChoice {
    /// Padded box around the required region of the probe spec.
    Auto,
    /// Explicit lengths, one per axis.
    Lengths(Vec<f64>),
}

impl BoxChoice {
    pub fn parse(s: Option<&str>) -> anyhow::Result<BoxChoice> {
        match s {
            None | Some("auto") => Ok(BoxChoice::Auto),
            Some(s) => Ok(BoxChoice::Lengths(parse_list(s)?)),
        }
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> anyhow::Result<Vec<T>> {
    s.split([',', 'x'])
        .map(|t| t.trim().parse().map_err(|_| anyhow::anyhow!("bad list entry {t:?} in {s:?}")))
        .collect()
}

/// Broadcasts a single entry over `dim` axes.
pub fn per_axis<T: Clone>(v: &[T], dim: usize, what: &str) -> anyhow::Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); dim]),
        n if n == dim => Ok(v.to_vec()),
        n => bail!("{what} has {n} entries but the grid has {dim} axes"),
    }
}

/// Grid for probing Ω. With a spec the box is placed around its required
/// region; without one an explicit box is centred at the origin, and the
/// automatic box is the unit cube.
pub fn choose_grid(spec: Option<&SharpnessSpec>, dim: usize, shape: &[usize], b: &BoxChoice) -> anyhow::Result<ProbeGrid> {
    let shape = per_axis(shape, dim, "grid")?;
    if shape.iter().any(|&n| !n.is_power_of_two()) {
        bail!("grid sizes must be powers of two, got {shape:?}");
    }
    Ok(match (spec, b) {
        (Some(s), BoxChoice::Auto) => default_probe_grid(s, &shape, DEFAULT_PADDING)?,
        (Some(s), BoxChoice::Lengths(l)) => probe_grid_with_box(s, &shape, &per_axis(l, dim, "box")?)?,
        (None, BoxChoice::Auto) => ProbeGrid { shape, box_len: vec![1.0; dim], origin: vec![-0.5; dim] },
        (None, BoxChoice::Lengths(l)) => {
            let l = per_axis(l, dim, "box")?;
            let origin = l.iter().map(|x| -0.5 * x).collect();
            ProbeGrid { shape, box_len: l, origin }
        }
    })
}

/// Seeds of the random probes, derived from one seed.
pub fn probe_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen()).collect()
}

/// Runs a suite on one grid. Probes are evaluated in parallel and reported in
/// suite order: sharpness, random probes by index, then the refined probe.
pub fn run_suite(
    omega: &DirectionSet,
    spec: Option<&SharpnessSpec>,
    suite: &Suite,
    grid: &ProbeGrid,
    seed: u64,
    regions: bool,
    dft: &RustFft,
) -> anyhow::Result<ProbeReport> {
    if grid.shape.len() != omega.dim() + 1 {
        bail!("grid has {} axes but Ω needs {}", grid.shape.len(), omega.dim() + 1);
    }
    let mut probes: Vec<(String, SampledField, Option<u64>)> = Vec::new();
    if suite.sharpness {
        let s = spec.context("the sharpness probe needs Ω = U_N1 x ... x U_Nn with N1 >= ... >= Nn")?;
        probes.push(("sharpness".into(), build_sharpness_field(s, grid)?, None));
    }
    let seeds = probe_seeds(seed, suite.random);
    let noise: Vec<mdht_core::Result<SampledField>> =
        seeds.par_iter().map(|&s| band_limited_noise(grid, suite.cutoff, s, dft)).collect();
    for (k, (f, &s)) in noise.into_iter().zip(&seeds).enumerate() {
        probes.push((format!("random{k}"), f?, Some(s)));
    }
    let rq: Vec<mdht_core::Result<f64>> = probes.par_iter().map(|(_, f, _)| rayleigh_par(f, omega, dft)).collect();
    let mut results = Vec::with_capacity(probes.len() + 1);
    for ((name, f, s), r) in probes.iter().zip(rq) {
        if f.norm() == 0.0 {
            bail!("probe {name} vanishes on this grid; use a finer grid");
        }
        results.push(ProbeResult { name: name.clone(), rayleigh: r?, seed: *s });
    }
    if let Some(iters) = suite.refined {
        let (name, start, s) = &probes[0];
        let (_, trace) = refine_probe(start, omega, iters, dft)?;
        let best = trace.iter().cloned().fold(0.0, f64::max);
        results.push(ProbeResult { name: format!("refined({name},{iters})"), rayleigh: best, seed: *s });
    }
    let first = &probes[0].1;
    let mut report = report_from(omega, first, results);
    if regions {
        let s = spec.context("region energies need a sharpness spec")?;
        let f = probes.iter().find(|p| p.0 == "sharpness").map(|p| &p.1).context("region energies need the sharpness probe")?;
        let mut out = Vec::with_capacity(omega.len());
        for v in omega.points() {
            match sv_restricted_energy(s, v, f, dft) {
                Ok(e) => out.push(RegionEnergy { v: v.clone(), energy: e }),
                Err(Error::BoxTooSmall { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        report.regions = Some(out);
    }
    Ok(report)
}
