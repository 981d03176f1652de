//! Upper-bound certificates for `‖H_Ω‖₂→₂` and closed-form recursion replays.
//!
//! A certificate is a tree. Every node carries a rule and a value; the value
//! of an inner node is recomputed from its children with upward rounding, so
//! a checker can replay the whole tree bit for bit.

mod replay;
pub mod round;
mod strategy;

pub use replay::{
    replay_3dgen_step, replay_algebraic_recursion, replay_curve_recursion, replay_product_recursion,
    replay_thm3d_constants, AlgebraicReplay, Gen3dStep, ProductReplay, Thm3dConstants,
};
pub use strategy::{certify, certify_affine, certify_slice, certify_split, Strategy};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::probe::ProbeReport;
use round::{add_up, mul_up, sqrt_up, sum_up};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// One direction: norm 1.
    Single,
    /// Triangle inequality over all directions: `#Ω`.
    Trivial,
    /// `‖H_𝒪‖ + √E (max_j ‖H_{Ω_j}‖ + 1)`.
    Ortho,
    /// Sum over a splitting of Ω.
    Split,
    /// Dilation and translation of the directions.
    Affine,
    /// Extension of every direction by a fixed vector.
    Slice,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Single => "SINGLE",
            Rule::Trivial => "TRIVIAL",
            Rule::Ortho => "ORTHO",
            Rule::Split => "SPLIT",
            Rule::Affine => "AFFINE",
            Rule::Slice => "SLICE",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        [Rule::Single, Rule::Trivial, Rule::Ortho, Rule::Split, Rule::Affine, Rule::Slice]
            .into_iter()
            .find(|r| r.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Computed by exact enumeration.
    Exact,
    /// Bounded by a structural argument, named by the string.
    Structured(String),
    /// A sampled lower estimate; never admissible in a certificate.
    Sampled,
}

impl Provenance {
    pub fn label(&self) -> String {
        match self {
            Provenance::Exact => "exact".into(),
            Provenance::Structured(s) => format!("structured:{s}"),
            Provenance::Sampled => "sampled".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s {
            "exact" => Some(Provenance::Exact),
            "sampled" => Some(Provenance::Sampled),
            _ => s.strip_prefix("structured:").map(|r| Provenance::Structured(r.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ESup {
    pub value: u64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub omega_label: String,
    /// `#Ω` at this node.
    pub size: usize,
    pub rule: Rule,
    pub value: f64,
    /// ORTHO only.
    pub e_sup: Option<ESup>,
    /// Free-form description of the cover or transformation used.
    pub note: String,
    /// ORTHO: `𝒪` first, then one child per cell. SPLIT: the parts.
    /// AFFINE and SLICE: the transformed set.
    pub children: Vec<BoundCertificate>,
}

impl BoundCertificate {
    pub fn single(label: impl Into<String>) -> Self {
        BoundCertificate {
            omega_label: label.into(),
            size: 1,
            rule: Rule::Single,
            value: 1.0,
            e_sup: None,
            note: String::new(),
            children: Vec::new(),
        }
    }

    pub fn trivial(label: impl Into<String>, size: usize) -> Self {
        if size == 1 {
            return Self::single(label);
        }
        BoundCertificate {
            omega_label: label.into(),
            size,
            rule: Rule::Trivial,
            value: size as f64,
            e_sup: None,
            note: String::new(),
            children: Vec::new(),
        }
    }

    /// Combines `𝒪` and the cell certificates.
    pub fn ortho(
        label: impl Into<String>,
        size: usize,
        e_sup: ESup,
        reps: BoundCertificate,
        cells: Vec<BoundCertificate>,
        note: impl Into<String>,
    ) -> Self {
        let mut children = Vec::with_capacity(cells.len() + 1);
        children.push(reps);
        children.extend(cells);
        let value = ortho_value(e_sup.value, &children);
        BoundCertificate { omega_label: label.into(), size, rule: Rule::Ortho, value, e_sup: Some(e_sup), note: note.into(), children }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

fn ortho_value(e: u64, children: &[BoundCertificate]) -> f64 {
    let max_cell = children[1..].iter().map(|c| c.value).fold(0.0, f64::max);
    add_up(children[0].value, mul_up(sqrt_up(e as f64), add_up(max_cell, 1.0)))
}

/// What a node check found wrong, with the path of child indices to it.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeIssue {
    pub path: Vec<usize>,
    pub message: String,
}

fn issue(path: &[usize], message: impl Into<String>) -> NodeIssue {
    NodeIssue { path: path.to_vec(), message: message.into() }
}

fn check_node(c: &BoundCertificate, path: &mut Vec<usize>, out: &mut Vec<NodeIssue>) {
    if !(c.value.is_finite() && c.value >= 0.0) {
        out.push(issue(path, "value is not a finite nonnegative number"));
    }
    if c.size == 0 {
        out.push(issue(path, "node covers an empty set"));
    }
    if c.rule != Rule::Ortho && c.e_sup.is_some() {
        out.push(issue(path, "stabbing data on a node that does not use it"));
    }
    match c.rule {
        Rule::Single => {
            if c.size != 1 || c.value != 1.0 || !c.children.is_empty() {
                out.push(issue(path, "SINGLE needs one direction, value 1 and no children"));
            }
        }
        Rule::Trivial => {
            if c.value != c.size as f64 || !c.children.is_empty() {
                out.push(issue(path, format!("TRIVIAL value {} differs from #Ω = {}", c.value, c.size)));
            }
        }
        Rule::Ortho => {
            if c.children.len() < 2 {
                out.push(issue(path, "ORTHO needs the representatives and at least one cell"));
            } else {
                match &c.e_sup {
                    None => out.push(issue(path, "ORTHO without a stabbing bound")),
                    Some(e) => {
                        if e.provenance == Provenance::Sampled {
                            out.push(issue(path, "sampled stabbing value used as an upper bound"));
                        }
                        if e.value == 0 {
                            out.push(issue(path, "stabbing bound of zero"));
                        }
                        let want = ortho_value(e.value, &c.children);
                        if want.to_bits() != c.value.to_bits() {
                            out.push(issue(path, format!("ORTHO value {} but children give {}", c.value, want)));
                        }
                    }
                }
                let cells = c.children.len() - 1;
                if c.children[0].size > cells {
                    out.push(issue(path, "more representatives than cells"));
                }
                let covered: usize = c.children[1..].iter().map(|k| k.size).sum();
                if covered < c.size {
                    out.push(issue(path, "cells hold fewer directions than the node"));
                }
            }
        }
        Rule::Split => {
            let want = sum_up(c.children.iter().map(|k| k.value));
            if c.children.is_empty() || want.to_bits() != c.value.to_bits() {
                out.push(issue(path, format!("SPLIT value {} but parts sum to {}", c.value, want)));
            }
            if c.children.iter().map(|k| k.size).sum::<usize>() < c.size {
                out.push(issue(path, "parts hold fewer directions than the node"));
            }
        }
        Rule::Affine | Rule::Slice => {
            if c.children.len() != 1 {
                out.push(issue(path, format!("{} needs exactly one child", c.rule.name())));
            } else {
                let k = &c.children[0];
                if k.value.to_bits() != c.value.to_bits() || k.size != c.size {
                    out.push(issue(path, format!("{} changed the value or the size", c.rule.name())));
                }
            }
        }
    }
    for (i, k) in c.children.iter().enumerate() {
        path.push(i);
        check_node(k, path, out);
        path.pop();
    }
}

/// Recomputes every node from its children. Empty means the tree is valid.
pub fn verify_certificate(cert: &BoundCertificate) -> Vec<NodeIssue> {
    let mut out = Vec::new();
    check_node(cert, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOutcome {
    /// Tree valid and root value at least the measured quotient.
    pub sound: bool,
    pub certified: f64,
    pub measured: f64,
    pub issues: Vec<NodeIssue>,
}

/// Relative rounding slack granted to a measured quotient. FFT round-off can
/// push a computed quotient a few hundred ulps above the exact one.
pub const MEASUREMENT_REL_TOL: f64 = 1e-12;

/// Compares a certificate with a probe report for the same direction set.
/// The report is consistent when `certified ≥ measured / (1 + tol)`.
pub fn soundness_audit(cert: &BoundCertificate, report: &ProbeReport) -> Result<AuditOutcome> {
    if cert.omega_label != report.omega_label {
        return Err(Error::invalid(format!(
            "certificate is for {:?} but the report is for {:?}",
            cert.omega_label, report.omega_label
        )));
    }
    let mut issues = verify_certificate(cert);
    if cert.value < report.max_rayleigh / (1.0 + MEASUREMENT_REL_TOL) {
        issues.push(NodeIssue {
            path: Vec::new(),
            message: format!("certified {} is below measured {}", cert.value, report.max_rayleigh),
        });
    }
    Ok(AuditOutcome {
        sound: issues.is_empty(),
        certified: cert.value,
        measured: report.max_rayleigh,
        issues,
    })
}

impl core::fmt::Display for NodeIssue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "/{}: {}", p.join("/"), self.message)
    }
}
