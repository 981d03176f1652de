//! JSON files for direction sets, covers, certificates and reports, and the
//! binary field container.
//!
//! Every file written here carries a `meta` block with the tool version and
//! SHA-256 digests of the inputs it was made from. Readers ignore it.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context};
use mdht_core::certifier::{BoundCertificate, ESup, Provenance, Rule};
use mdht_core::directions::DirectionSet;
use mdht_core::geometry::{Cell, CellCover, CellShape, CellKind};
use mdht_core::probe::{ProbeGrid, ProbeReport, ProbeResult, RegionEnergy, SvEnergy};
use mdht_core::rational::{format_rational, parse_rational};
use mdht_core::spectral::SampledField;
use mdht_core::Rational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    #[serde(default)]
    pub inputs: Vec<InputDigest>,
}

impl Meta {
    pub fn new(inputs: Vec<InputDigest>) -> Self {
        Meta { tool: "mdht".into(), version: VERSION.into(), inputs }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest(name: impl Into<String>, bytes: &[u8]) -> InputDigest {
    InputDigest { name: name.into(), sha256: sha256_hex(bytes) }
}

/// Reads a file and returns its bytes with their digest.
pub fn read_input(path: &Path) -> anyhow::Result<(Vec<u8>, InputDigest)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let d = digest(path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into()), &bytes);
    Ok((bytes, d))
}

fn rationals_to_strings(p: &[Rational]) -> Vec<String> {
    p.iter().map(format_rational).collect()
}

fn strings_to_rationals(p: &[String]) -> anyhow::Result<Vec<Rational>> {
    p.iter().map(|s| parse_rational(s).map_err(anyhow::Error::from)).collect()
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

// Direction sets.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionSetFile {
    pub dim: usize,
    pub label: String,
    pub points: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl DirectionSetFile {
    pub fn from_set(omega: &DirectionSet, meta: Option<Meta>) -> Self {
        DirectionSetFile {
            dim: omega.dim(),
            label: omega.label().into(),
            points: omega.points().iter().map(|p| rationals_to_strings(p)).collect(),
            meta,
        }
    }

    pub fn to_set(&self) -> anyhow::Result<DirectionSet> {
        let pts = self.points.iter().map(|p| strings_to_rationals(p)).collect::<anyhow::Result<Vec<_>>>()?;
        Ok(DirectionSet::new(self.dim, pts, self.label.clone())?)
    }
}

pub fn direction_set_to_json(omega: &DirectionSet, meta: Meta) -> anyhow::Result<Vec<u8>> {
    to_json(&DirectionSetFile::from_set(omega, Some(meta)))
}

pub fn direction_set_from_json(bytes: &[u8]) -> anyhow::Result<DirectionSet> {
    let f: DirectionSetFile = serde_json::from_slice(bytes).context("parsing direction set")?;
    f.to_set()
}

// Covers.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellFile {
    pub kind: String,
    /// Point: one vertex. Interval and box: lower then upper corner.
    /// Polygon and arc: vertices in order.
    pub vertices: Vec<Vec<String>>,
    pub members: Vec<usize>,
    pub representative: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverFile {
    pub omega: DirectionSetFile,
    pub cells: Vec<CellFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

fn shape_vertices(shape: &CellShape) -> Vec<Vec<String>> {
    match shape {
        CellShape::Point(p) => vec![rationals_to_strings(p)],
        CellShape::Interval { lo, hi } => vec![vec![format_rational(lo)], vec![format_rational(hi)]],
        CellShape::Box { lo, hi } => vec![rationals_to_strings(lo), rationals_to_strings(hi)],
        CellShape::Polygon(v) | CellShape::Arc(v) => v.iter().map(|p| rationals_to_strings(p)).collect(),
    }
}

fn shape_from(kind: &str, vertices: &[Vec<String>]) -> anyhow::Result<CellShape> {
    let kind = CellKind::from_name(kind).with_context(|| format!("unknown cell kind {kind:?}"))?;
    let mut v = vertices.iter().map(|p| strings_to_rationals(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let two = |v: &mut Vec<Vec<Rational>>| -> anyhow::Result<(Vec<Rational>, Vec<Rational>)> {
        if v.len() != 2 {
            bail!("{} cell needs exactly two corners", kind.name());
        }
        let hi = v.pop().unwrap_or_default();
        let lo = v.pop().unwrap_or_default();
        Ok((lo, hi))
    };
    Ok(match kind {
        CellKind::Point => {
            if v.len() != 1 {
                bail!("point cell needs exactly one vertex");
            }
            CellShape::Point(v.pop().unwrap_or_default())
        }
        CellKind::Interval => {
            let (lo, hi) = two(&mut v)?;
            if lo.len() != 1 || hi.len() != 1 {
                bail!("interval endpoints must be scalars");
            }
            CellShape::Interval { lo: lo[0].clone(), hi: hi[0].clone() }
        }
        CellKind::Box => {
            let (lo, hi) = two(&mut v)?;
            CellShape::Box { lo, hi }
        }
        CellKind::ConvexPolygon => CellShape::Polygon(v),
        CellKind::CurveArc => CellShape::Arc(v),
    })
}

pub fn cover_to_json(cover: &CellCover, meta: Meta) -> anyhow::Result<Vec<u8>> {
    let file = CoverFile {
        omega: DirectionSetFile::from_set(&cover.omega, None),
        cells: cover
            .cells
            .iter()
            .zip(&cover.representatives)
            .map(|(c, &r)| CellFile {
                kind: c.shape.kind().name().into(),
                vertices: shape_vertices(&c.shape),
                members: c.members.clone(),
                representative: r,
            })
            .collect(),
        meta: Some(meta),
    };
    to_json(&file)
}

pub fn cover_from_json(bytes: &[u8]) -> anyhow::Result<CellCover> {
    let f: CoverFile = serde_json::from_slice(bytes).context("parsing cover")?;
    let omega = f.omega.to_set()?;
    let mut cells = Vec::with_capacity(f.cells.len());
    let mut reps = Vec::with_capacity(f.cells.len());
    for c in &f.cells {
        cells.push(Cell { shape: shape_from(&c.kind, &c.vertices)?, members: c.members.clone() });
        reps.push(c.representative);
    }
    Ok(CellCover::new(omega, cells, reps)?)
}

// Certificates.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ESupFile {
    pub value: u64,
    pub provenance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateNode {
    pub rule: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_sup: Option<ESupFile>,
    pub omega_label: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default)]
    pub children: Vec<CertificateNode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(flatten)]
    pub root: CertificateNode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

fn node_from(c: &BoundCertificate) -> CertificateNode {
    CertificateNode {
        rule: c.rule.name().into(),
        value: c.value,
        e_sup: c.e_sup.as_ref().map(|e| ESupFile { value: e.value, provenance: e.provenance.label() }),
        omega_label: c.omega_label.clone(),
        size: c.size,
        note: c.note.clone(),
        children: c.children.iter().map(node_from).collect(),
    }
}

fn node_to(n: &CertificateNode) -> anyhow::Result<BoundCertificate> {
    let rule = Rule::from_name(&n.rule).with_context(|| format!("unknown rule {:?}", n.rule))?;
    let e_sup = match &n.e_sup {
        Some(e) => Some(ESup {
            value: e.value,
            provenance: Provenance::parse(&e.provenance)
                .with_context(|| format!("unknown provenance {:?}", e.provenance))?,
        }),
        None => None,
    };
    Ok(BoundCertificate {
        omega_label: n.omega_label.clone(),
        size: n.size,
        rule,
        value: n.value,
        e_sup,
        note: n.note.clone(),
        children: n.children.iter().map(node_to).collect::<anyhow::Result<_>>()?,
    })
}

pub fn certificate_to_json(cert: &BoundCertificate, meta: Meta) -> anyhow::Result<Vec<u8>> {
    to_json(&CertificateFile { root: node_from(cert), meta: Some(meta) })
}

pub fn certificate_from_json(bytes: &[u8]) -> anyhow::Result<BoundCertificate> {
    let f: CertificateFile = serde_json::from_slice(bytes).context("parsing certificate")?;
    node_to(&f.root)
}

// Probe reports.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFile {
    pub shape: Vec<usize>,
    #[serde(rename = "box")]
    pub box_len: Vec<f64>,
    pub origin: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeFile {
    pub name: String,
    pub rayleigh: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionFile {
    pub v: Vec<String>,
    pub energy: f64,
    pub c_hat: f64,
    pub c_prime_min: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub omega_label: String,
    pub grid: GridFile,
    pub probes: Vec<ProbeFile>,
    pub max_rayleigh: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<RegionFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

pub fn report_to_json(r: &ProbeReport, meta: Meta) -> anyhow::Result<Vec<u8>> {
    let file = ReportFile {
        omega_label: r.omega_label.clone(),
        grid: GridFile { shape: r.grid.shape.clone(), box_len: r.grid.box_len.clone(), origin: r.grid.origin.clone() },
        probes: r
            .probes
            .iter()
            .map(|p| ProbeFile { name: p.name.clone(), rayleigh: p.rayleigh, seed: p.seed })
            .collect(),
        max_rayleigh: r.max_rayleigh,
        regions: r.regions.as_ref().map(|rs| {
            rs.iter()
                .map(|e| RegionFile {
                    v: rationals_to_strings(&e.v),
                    energy: e.energy.energy,
                    c_hat: e.energy.c_hat,
                    c_prime_min: e.energy.c_prime_min,
                    points: e.energy.points,
                })
                .collect()
        }),
        meta: Some(meta),
    };
    to_json(&file)
}

pub fn report_from_json(bytes: &[u8]) -> anyhow::Result<ProbeReport> {
    let f: ReportFile = serde_json::from_slice(bytes).context("parsing probe report")?;
    let regions = match f.regions {
        Some(rs) => Some(
            rs.iter()
                .map(|e| {
                    Ok(RegionEnergy {
                        v: strings_to_rationals(&e.v)?,
                        energy: SvEnergy {
                            energy: e.energy,
                            c_hat: e.c_hat,
                            c_prime_min: e.c_prime_min,
                            points: e.points,
                        },
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?,
        ),
        None => None,
    };
    Ok(ProbeReport {
        omega_label: f.omega_label,
        grid: ProbeGrid { shape: f.grid.shape, box_len: f.grid.box_len, origin: f.grid.origin },
        probes: f
            .probes
            .into_iter()
            .map(|p| ProbeResult { name: p.name, rayleigh: p.rayleigh, seed: p.seed })
            .collect(),
        max_rayleigh: f.max_rayleigh,
        regions,
    })
}

// Field container: magic, header length (u64 LE), JSON header, f64 LE payload.

const FIELD_MAGIC: &[u8; 8] = b"MDHTFLD1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim: usize,
    pub shape: Vec<usize>,
    #[serde(rename = "box")]
    pub box_len: Vec<f64>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

pub fn write_field(out: &mut impl Write, f: &SampledField, meta: Meta) -> anyhow::Result<()> {
    let header = FieldHeader {
        dim: f.dim(),
        shape: f.shape().to_vec(),
        box_len: f.box_len().to_vec(),
        origin: Some(f.origin().to_vec()),
        meta: Some(meta),
    };
    let h = serde_json::to_vec(&header)?;
    out.write_all(FIELD_MAGIC)?;
    out.write_all(&(h.len() as u64).to_le_bytes())?;
    out.write_all(&h)?;
    let mut payload = Vec::with_capacity(8 * f.len());
    for v in f.values() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&payload)?;
    Ok(())
}

pub fn field_to_bytes(f: &SampledField, meta: Meta) -> anyhow::Result<Vec<u8>> {
    let mut out = Vec::with_capacity(64 + 8 * f.len());
    write_field(&mut out, f, meta)?;
    Ok(out)
}

pub fn read_field(input: &mut impl Read) -> anyhow::Result<SampledField> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).context("reading field magic")?;
    if &magic != FIELD_MAGIC {
        bail!("not a field file");
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    if len > 1 << 24 {
        bail!("field header of {len} bytes is implausibly large");
    }
    let mut h = vec![0u8; len];
    input.read_exact(&mut h)?;
    let header: FieldHeader = serde_json::from_slice(&h).context("parsing field header")?;
    if header.shape.len() != header.dim || header.box_len.len() != header.dim {
        bail!("field header dimensions disagree");
    }
    let total = header
        .shape
        .iter()
        .try_fold(1usize, |a, &n| a.checked_mul(n))
        .context("field shape overflows")?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    if payload.len() != 8 * total {
        bail!("field payload has {} bytes, expected {}", payload.len(), 8 * total);
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks of eight")))
        .collect();
    let origin = header.origin.unwrap_or_else(|| vec![0.0; header.dim]);
    Ok(SampledField::new(header.shape, header.box_len, origin, values)?)
}

pub fn field_from_bytes(bytes: &[u8]) -> anyhow::Result<SampledField> {
    read_field(&mut &bytes[..])
}
