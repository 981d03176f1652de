//! Parameter sweeps producing one CSV row per family member.
//!
//! Columns: `family, params, N, rayleigh_lower, certified_upper, grid_meta,
//! seed, status`. `N` is `#Ω`. `status` is `ok` or the error that stopped the
//! row, in which case the numeric columns are empty. The first line is a
//! `#` comment with the tool version and the plan digest.

use std::collections::BTreeMap;

use anyhow::{bail, Context};
use mdht_core::certifier::{certify, Strategy};
use mdht_core::probe::{default_probe_grid, ProbeGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::families::{build, format_params, primary_key, Params};
use crate::fft::RustFft;
use crate::formats::{sha256_hex, VERSION};
use crate::suite::{choose_grid, per_axis, run_suite, BoxChoice, Suite, DEFAULT_PADDING};

pub const COLUMNS: [&str; 8] =
    ["family", "params", "N", "rayleigh_lower", "certified_upper", "grid_meta", "seed", "status"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub family: String,
    /// Parameter that takes the listed values; the family's main one if absent.
    #[serde(default)]
    pub key: Option<String>,
    pub values: Vec<String>,
    /// Parameters held fixed across the sweep.
    #[serde(default)]
    pub fixed: BTreeMap<String, String>,
    pub suite: String,
    /// Certification strategy; the family's natural one if absent.
    #[serde(default)]
    pub strategy: Option<String>,
    pub grid: Vec<usize>,
    /// `auto` (per row), `shared` (the largest row's box for every row) or
    /// explicit lengths.
    #[serde(default = "default_box", rename = "box")]
    pub box_choice: String,
    pub seed: u64,
}

fn default_box() -> String {
    "auto".into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub params: String,
    pub n: usize,
    pub rayleigh_lower: Option<f64>,
    pub certified_upper: Option<f64>,
    pub grid_meta: String,
    pub seed: u64,
    pub status: String,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub csv: Vec<u8>,
}

impl SweepPlan {
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("plans serialise"))
    }

    fn row_params(&self, value: &str) -> anyhow::Result<Params> {
        let key = match &self.key {
            Some(k) => k.clone(),
            None => primary_key(&self.family)?.to_string(),
        };
        let mut p = self.fixed.clone();
        if p.insert(key.clone(), value.to_string()).is_some() {
            bail!("parameter {key} is both swept and fixed");
        }
        Ok(p)
    }
}

pub fn grid_meta(g: &ProbeGrid) -> String {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    let shape = g.shape.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x");
    format!("shape={shape};box={};origin={}", join(&g.box_len), join(&g.origin))
}

/// Runs the plan. Rows run in parallel and come out in plan order; a failing
/// row is recorded and the sweep continues.
pub fn run_sweep(plan: &SweepPlan, dft: &RustFft) -> anyhow::Result<SweepOutput> {
    if plan.values.is_empty() {
        bail!("sweep plan has no parameter values");
    }
    primary_key(&plan.family)?;
    let suite = Suite::parse(&plan.suite)?;
    let strategy = plan.strategy.as_deref().map(Strategy::parse).transpose()?;
    let params = plan.values.iter().map(|v| plan.row_params(v)).collect::<anyhow::Result<Vec<_>>>()?;
    let shared = match plan.box_choice.as_str() {
        "shared" => Some(shared_grid(plan, &params)?),
        _ => None,
    };
    let boxes = if shared.is_some() { BoxChoice::Auto } else { BoxChoice::parse(Some(&plan.box_choice))? };
    let rows: Vec<SweepRow> = params
        .par_iter()
        .map(|p| {
            let mut row = SweepRow {
                family: plan.family.clone(),
                params: format_params(p),
                n: 0,
                rayleigh_lower: None,
                certified_upper: None,
                grid_meta: String::new(),
                seed: plan.seed,
                status: "ok".into(),
            };
            if let Err(e) = fill_row(&mut row, plan, p, &suite, strategy.as_ref(), shared.as_ref(), &boxes, dft) {
                row.rayleigh_lower = None;
                row.certified_upper = None;
                row.status = format!("error: {e:#}");
            }
            row
        })
        .collect();
    let csv = write_csv(plan, &rows)?;
    Ok(SweepOutput { rows, csv })
}

#[allow(clippy::too_many_arguments)]
fn fill_row(
    row: &mut SweepRow,
    plan: &SweepPlan,
    p: &Params,
    suite: &Suite,
    strategy: Option<&Strategy>,
    shared: Option<&ProbeGrid>,
    boxes: &BoxChoice,
    dft: &RustFft,
) -> anyhow::Result<()> {
    let inst = build(&plan.family, p)?;
    row.n = inst.omega.len();
    let grid = match shared {
        Some(g) => g.clone(),
        None => choose_grid(inst.spec.as_ref(), inst.omega.dim() + 1, &plan.grid, boxes)?,
    };
    row.grid_meta = grid_meta(&grid);
    let report = run_suite(&inst.omega, inst.spec.as_ref(), suite, &grid, plan.seed, false, dft)?;
    row.rayleigh_lower = Some(report.max_rayleigh);
    let cert = certify(&inst.omega, strategy.unwrap_or(&inst.strategy))?;
    row.certified_upper = Some(cert.value);
    Ok(())
}

/// Default grid of the member with the largest first size, used for all rows.
fn shared_grid(plan: &SweepPlan, params: &[Params]) -> anyhow::Result<ProbeGrid> {
    let mut best = None;
    for p in params {
        let inst = build(&plan.family, p)?;
        let spec = inst.spec.context("a shared box needs families with a sharpness spec")?;
        if best.as_ref().map_or(true, |b: &mdht_core::probe::SharpnessSpec| spec.n1() > b.n1()) {
            best = Some(spec);
        }
    }
    let spec = best.context("no rows")?;
    let shape = per_axis(&plan.grid, spec.n() + 1, "grid")?;
    Ok(default_probe_grid(&spec, &shape, DEFAULT_PADDING)?)
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

fn write_csv(plan: &SweepPlan, rows: &[SweepRow]) -> anyhow::Result<Vec<u8>> {
    let mut out = format!("# mdht {VERSION} plan-sha256={}\n", plan.digest()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(COLUMNS)?;
        for r in rows {
            w.write_record([
                r.family.clone(),
                r.params.clone(),
                r.n.to_string(),
                num(r.rayleigh_lower),
                num(r.certified_upper),
                r.grid_meta.clone(),
                r.seed.to_string(),
                r.status.clone(),
            ])?;
        }
        w.flush()?;
    }
    Ok(out)
}

/// Parses a sweep CSV, skipping `#` comment lines.
pub fn read_sweep_csv(bytes: &[u8]) -> anyhow::Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != COLUMNS {
        bail!("unexpected sweep columns {:?}", header.iter().collect::<Vec<_>>());
    }
    let opt = |s: &str| -> anyhow::Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            Ok(Some(s.parse().with_context(|| format!("bad number {s:?}"))?))
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(SweepRow {
            family: rec[0].to_string(),
            params: rec[1].to_string(),
            n: rec[2].parse().with_context(|| format!("bad N {:?}", &rec[2]))?,
            rayleigh_lower: opt(&rec[3])?,
            certified_upper: opt(&rec[4])?,
            grid_meta: rec[5].to_string(),
            seed: rec[6].parse().with_context(|| format!("bad seed {:?}", &rec[6]))?,
            status: rec[7].to_string(),
        });
    }
    Ok(rows)
}
