//! Cover-tree strategies that build certificates.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::round::sum_up;
use super::{BoundCertificate, ESup, Provenance, Rule};
use crate::directions::{as_affine_uniform, boustrophedon_curve_samples, uniform, DirectionSet, SampledCurve};
use crate::error::{Error, Result};
use crate::geometry::{
    curve_cover, grid_cover_for_product, interval_cover_from_groups, partition_points_2d, stab_sup, CellCover,
    StabMode,
};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// `#Ω` by the triangle inequality.
    Trivial,
    /// Pairs of neighbours on the line, `E = 1`.
    Dyadic1d,
    /// Pairs of neighbours along a curve. Without an explicit curve the
    /// line (dimension 1) or the boustrophedon through `U_M × U_M` is used,
    /// with the crossing degree as the stabbing bound. With an explicit curve
    /// every level computes its stabbing number exactly.
    CurvePairs { curve: Option<SampledCurve> },
    /// 2 × 2 blocks of a planar product set, `E = k₁ + k₂` for `k₁ × k₂`
    /// blocks.
    ProductGrid,
    /// Iterated ham-sandwich partitions with exact stabbing numbers.
    HamSandwich2d { rounds: usize },
    /// Dyadic shells on the line, each shell an affine copy of a uniform set
    /// where possible.
    LacunaryMixed,
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Strategy::Trivial => "trivial".into(),
            Strategy::Dyadic1d => "dyadic-1d".into(),
            Strategy::CurvePairs { .. } => "curve-pairs".into(),
            Strategy::ProductGrid => "product-grid".into(),
            Strategy::HamSandwich2d { rounds } => format!("hamsandwich-2d:{rounds}"),
            Strategy::LacunaryMixed => "lacunary-mixed".into(),
        }
    }

    /// Parses `trivial`, `dyadic-1d`, `curve-pairs`, `product-grid`,
    /// `hamsandwich-2d[:rounds]` and `lacunary-mixed`.
    pub fn parse(s: &str) -> Result<Strategy> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let st = match head {
            "trivial" => Strategy::Trivial,
            "dyadic-1d" => Strategy::Dyadic1d,
            "curve-pairs" => Strategy::CurvePairs { curve: None },
            "product-grid" => Strategy::ProductGrid,
            "lacunary-mixed" => Strategy::LacunaryMixed,
            "hamsandwich-2d" => {
                let rounds = match arg {
                    Some(a) => a.parse().map_err(|_| Error::Parse(format!("bad round count {a:?}")))?,
                    None => 2,
                };
                if rounds == 0 {
                    return Err(Error::invalid("hamsandwich-2d needs at least one round"));
                }
                return Ok(Strategy::HamSandwich2d { rounds });
            }
            _ => return Err(Error::Parse(format!("unknown strategy {s:?}"))),
        };
        if arg.is_some() {
            return Err(Error::Parse(format!("strategy {head} takes no argument")));
        }
        Ok(st)
    }
}

fn inapplicable(strategy: &'static str, reason: impl Into<String>) -> Error {
    Error::Inapplicable { strategy, reason: reason.into() }
}

/// Certificate for Ω with the given strategy. Constant trailing coordinates
/// are first removed with a SLICE node, unless an explicit curve is given.
pub fn certify(omega: &DirectionSet, strategy: &Strategy) -> Result<BoundCertificate> {
    if omega.is_empty() {
        return Err(Error::Empty("direction set is empty"));
    }
    if omega.len() == 1 {
        return Ok(BoundCertificate::single(omega.label()));
    }
    let explicit_curve = matches!(strategy, Strategy::CurvePairs { curve: Some(_) });
    if !explicit_curve && *strategy != Strategy::Trivial {
        if let Some((core, w)) = split_constant_tail(omega)? {
            let child = certify(&core, strategy)?;
            return Ok(wrap(Rule::Slice, omega, child, format!("fixed tail ({})", fmt_vec(&w))));
        }
    }
    let label = omega.label();
    match strategy {
        Strategy::Trivial => Ok(BoundCertificate::trivial(label, omega.len())),
        Strategy::Dyadic1d => {
            if omega.dim() != 1 {
                return Err(inapplicable("dyadic-1d", format!("needs dimension 1, got {}", omega.dim())));
            }
            dyadic(omega, label, false)
        }
        Strategy::CurvePairs { curve } => curve_strategy(omega, curve.as_ref()),
        Strategy::ProductGrid => {
            if omega.product_factors().is_none() {
                return Err(inapplicable("product-grid", "direction set is not a Cartesian product"));
            }
            if omega.dim() > 2 {
                return Err(inapplicable("product-grid", "no structured stabbing bound above dimension 2"));
            }
            product_grid(omega, label)
        }
        Strategy::HamSandwich2d { rounds } => {
            if omega.dim() != 2 {
                return Err(inapplicable("hamsandwich-2d", format!("needs dimension 2, got {}", omega.dim())));
            }
            hamsandwich(omega, label, *rounds)
        }
        Strategy::LacunaryMixed => {
            if omega.dim() != 1 {
                return Err(inapplicable("lacunary-mixed", format!("needs dimension 1, got {}", omega.dim())));
            }
            lacunary(omega, label)
        }
    }
}

fn fmt_vec(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

fn wrap(rule: Rule, omega: &DirectionSet, child: BoundCertificate, note: String) -> BoundCertificate {
    BoundCertificate {
        omega_label: omega.label().into(),
        size: omega.len(),
        rule,
        value: child.value,
        e_sup: None,
        note,
        children: alloc::vec![child],
    }
}

/// When every point shares its last `l ≥ 1` coordinates (and `l < dim`),
/// returns the projection to the first `dim − l` coordinates and the tail.
fn split_constant_tail(omega: &DirectionSet) -> Result<Option<(DirectionSet, Vec<Rational>)>> {
    let n = omega.dim();
    let first = omega.point(0);
    let mut keep = n;
    while keep > 1 && omega.points().iter().all(|p| p[keep - 1] == first[keep - 1]) {
        keep -= 1;
    }
    if keep == n {
        return Ok(None);
    }
    let pts = omega.points().iter().map(|p| p[..keep].to_vec()).collect();
    let core = DirectionSet::new(keep, pts, format!("{}|core", omega.label()))?;
    Ok(Some((core, first[keep..].to_vec())))
}

/// AFFINE node: certifies Ω and presents it as a certificate for
/// `{c ⊙ v + w}`.
pub fn certify_affine(omega: &DirectionSet, c: &[Rational], w: &[Rational], strategy: &Strategy) -> Result<BoundCertificate> {
    let image = crate::directions::affine_image(omega, c, w)?;
    let child = certify(omega, strategy)?;
    Ok(wrap(Rule::Affine, &image, child, format!("scale ({}) shift ({})", fmt_vec(c), fmt_vec(w))))
}

/// SLICE node: certifies Ω and presents it as a certificate for `Ω × {w}`.
pub fn certify_slice(omega: &DirectionSet, w: &[Rational], strategy: &Strategy) -> Result<BoundCertificate> {
    let sliced = crate::directions::embed_slice(omega, w);
    let child = certify(omega, strategy)?;
    Ok(wrap(Rule::Slice, &sliced, child, format!("fixed tail ({})", fmt_vec(w))))
}

/// SPLIT node over certificates of sets whose union is Ω.
pub fn certify_split(label: impl Into<String>, size: usize, parts: Vec<BoundCertificate>) -> Result<BoundCertificate> {
    if parts.is_empty() {
        return Err(Error::Empty("split needs at least one part"));
    }
    if parts.iter().map(|p| p.size).sum::<usize>() < size {
        return Err(Error::invalid("parts do not hold every direction"));
    }
    Ok(BoundCertificate {
        omega_label: label.into(),
        size,
        rule: Rule::Split,
        value: sum_up(parts.iter().map(|p| p.value)),
        e_sup: None,
        note: String::new(),
        children: parts,
    })
}

fn cell_leaves(cover: &CellCover) -> Result<Vec<BoundCertificate>> {
    (0..cover.cells.len())
        .map(|j| Ok(BoundCertificate::trivial(format!("cell{j}"), cover.cells[j].members.len())))
        .collect()
}

fn prune(node: BoundCertificate, label: &str, size: usize) -> BoundCertificate {
    if node.value < size as f64 {
        node
    } else {
        BoundCertificate::trivial(label, size)
    }
}

fn sorted_order(omega: &DirectionSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.sort_by(|&i, &j| omega.point(i)[0].cmp(&omega.point(j)[0]));
    order
}

fn dyadic(omega: &DirectionSet, label: &str, pruned: bool) -> Result<BoundCertificate> {
    let n = omega.len();
    if n == 1 {
        return Ok(BoundCertificate::single(label));
    }
    let order = sorted_order(omega);
    let groups: Vec<Vec<usize>> = order.chunks(2).map(|c| c.to_vec()).collect();
    let cover = interval_cover_from_groups(omega, &groups)?;
    let reps = cover.representative_set()?;
    let reps_cert = dyadic(&reps, "reps", pruned)?;
    let e = ESup { value: 1, provenance: Provenance::Structured("disjoint-intervals".into()) };
    let node = BoundCertificate::ortho(label, n, e, reps_cert, cell_leaves(&cover)?, format!("{} neighbour pairs", cover.cells.len()));
    Ok(if pruned { prune(node, label, n) } else { node })
}

enum CurveBound {
    Degree(u64),
    Exact,
}

fn curve_strategy(omega: &DirectionSet, curve: Option<&SampledCurve>) -> Result<BoundCertificate> {
    let label = omega.label();
    if let Some(curve) = curve {
        curve.validate(omega)?;
        return curve_pairs(omega, curve, &CurveBound::Exact, label);
    }
    match omega.dim() {
        1 => {
            let order = sorted_order(omega);
            let sorted = omega.subset(&order, label)?;
            let line = SampledCurve::through(&sorted);
            curve_pairs(&sorted, &line, &CurveBound::Degree(1), label)
        }
        2 => {
            let m = integer_sqrt(omega.len() as u64);
            let b = boustrophedon_curve_samples(m)?;
            if m * m != omega.len() as u64 || !b.samples.same_points(omega) {
                return Err(inapplicable("curve-pairs", "no curve given and the set is not U_M × U_M"));
            }
            let samples = b.samples.with_label(label);
            curve_pairs(&samples, &b.curve, &CurveBound::Degree(b.crossing_degree as u64), label)
        }
        d => Err(inapplicable("curve-pairs", format!("no default curve in dimension {d}"))),
    }
}

fn integer_sqrt(n: u64) -> u64 {
    let mut r = libm::sqrt(n as f64) as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn curve_pairs(samples: &DirectionSet, curve: &SampledCurve, bound: &CurveBound, label: &str) -> Result<BoundCertificate> {
    let n = samples.len();
    if n == 1 {
        return Ok(BoundCertificate::single(label));
    }
    let cover = curve_cover(samples, curve, 2)?;
    let e = match bound {
        CurveBound::Degree(d) => ESup { value: *d, provenance: Provenance::Structured("curve-degree".into()) },
        CurveBound::Exact => {
            let s = stab_sup(&cover, StabMode::ExactGeneric)?;
            ESup { value: (s.e_sup as u64).max(1), provenance: Provenance::Exact }
        }
    };
    let idx = cover.representatives.clone();
    let reps = samples.subset(&idx, "reps")?;
    let sub = SampledCurve {
        polyline: curve.polyline.clone(),
        sample_vertex: idx.iter().map(|&i| curve.sample_vertex[i]).collect(),
    };
    let reps_cert = curve_pairs(&reps, &sub, bound, "reps")?;
    Ok(BoundCertificate::ortho(label, n, e, reps_cert, cell_leaves(&cover)?, format!("{} arcs", cover.cells.len())))
}

fn product_grid(omega: &DirectionSet, label: &str) -> Result<BoundCertificate> {
    let n = omega.len();
    if n == 1 {
        return Ok(BoundCertificate::single(label));
    }
    let dim = omega.dim();
    let cover = grid_cover_for_product(omega, &alloc::vec![2; dim])?;
    let factors = omega.product_factors().expect("checked by the caller");
    let blocks: Vec<u64> = factors.iter().map(|f| f.len().div_ceil(2) as u64).collect();
    let e = if dim == 1 {
        ESup { value: 1, provenance: Provenance::Structured("disjoint-intervals".into()) }
    } else {
        ESup { value: blocks.iter().sum(), provenance: Provenance::Structured("grid-lines".into()) }
    };
    let reps = cover.representative_set()?;
    let reps_cert = product_grid(&reps, "reps")?;
    let note = format!("{} blocks", blocks.iter().map(|b| format!("{b}")).collect::<Vec<_>>().join("x"));
    Ok(BoundCertificate::ortho(label, n, e, reps_cert, cell_leaves(&cover)?, note))
}

fn hamsandwich(omega: &DirectionSet, label: &str, rounds: usize) -> Result<BoundCertificate> {
    let n = omega.len();
    if n <= 2 {
        return Ok(BoundCertificate::trivial(label, n));
    }
    let part = partition_points_2d(omega, rounds)?;
    let cover = &part.cover;
    let reps = cover.representative_set()?;
    if reps.len() >= n || cover.max_members() >= n {
        return Ok(BoundCertificate::trivial(label, n));
    }
    let s = stab_sup(cover, StabMode::ExactGeneric)?;
    let e = ESup { value: (s.e_sup as u64).max(1), provenance: Provenance::Exact };
    let reps_cert = hamsandwich(&reps, "reps", rounds)?;
    let mut cells = Vec::with_capacity(cover.cells.len());
    for j in 0..cover.cells.len() {
        let set = cover.cell_set(j)?;
        cells.push(hamsandwich(&set, &format!("cell{j}"), rounds)?);
    }
    let node = BoundCertificate::ortho(
        label,
        n,
        e,
        reps_cert,
        cells,
        format!("{} cells from {} lines", cover.cells.len(), part.degree),
    );
    Ok(prune(node, label, n))
}

/// Index `k` of the shell `(2^k, 2^{k+1}]` holding a positive rational.
fn shell(q: &Rational) -> i64 {
    let two = Rational::from_integer(2.into());
    let one = Rational::from_integer(1.into());
    let mut k = 0i64;
    let mut lo = one.clone();
    // lo = 2^k; move until lo < q ≤ 2 lo.
    while *q <= lo {
        lo /= &two;
        k -= 1;
    }
    while *q > &lo * &two {
        lo *= &two;
        k += 1;
    }
    k
}

fn lacunary(omega: &DirectionSet, label: &str) -> Result<BoundCertificate> {
    let n = omega.len();
    if omega.points().iter().any(|p| p[0] <= Rational::from_integer(0.into())) {
        return Err(inapplicable("lacunary-mixed", "directions must be positive"));
    }
    let order = sorted_order(omega);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = None;
    for &i in &order {
        let k = shell(&omega.point(i)[0]);
        if last == Some(k) {
            groups.last_mut().expect("a group is open").push(i);
        } else {
            groups.push(alloc::vec![i]);
            last = Some(k);
        }
    }
    if groups.len() == 1 {
        return block_certificate(omega, label);
    }
    let cover = interval_cover_from_groups(omega, &groups)?;
    let reps = cover.representative_set()?;
    let reps_cert = dyadic(&reps, "reps", true)?;
    let mut cells = Vec::with_capacity(groups.len());
    for j in 0..cover.cells.len() {
        let set = cover.cell_set(j)?;
        cells.push(block_certificate(&set, &format!("cell{j}"))?);
    }
    let e = ESup { value: 1, provenance: Provenance::Structured("disjoint-intervals".into()) };
    let node = BoundCertificate::ortho(label, n, e, reps_cert, cells, format!("{} dyadic shells", groups.len()));
    Ok(prune(node, label, n))
}

/// A shell: AFFINE over a uniform set when it is one, dyadic otherwise.
fn block_certificate(set: &DirectionSet, label: &str) -> Result<BoundCertificate> {
    let vals: Vec<Rational> = set.points().iter().map(|p| p[0].clone()).collect();
    if set.len() > 1 {
        if let Some((s, w)) = as_affine_uniform(&vals) {
            let u = uniform(set.len() as u64)?;
            let scale = s * Rational::from_integer((set.len() as u64).into());
            let child = dyadic(&u, u.label(), true)?;
            let mut node = wrap(Rule::Affine, set, child, format!("scale ({}) shift ({})", format_rational(&scale), format_rational(&w)));
            node.omega_label = label.into();
            return Ok(node);
        }
    }
    dyadic(set, label, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::{replay_curve_recursion, replay_product_recursion, verify_certificate};
    use crate::directions::{lacunary_uniform, product};

    #[test]
    fn dyadic_on_uniform() {
        for (n, want) in [(1u64, 1.0), (2, 4.0), (8, 10.0), (16, 13.0), (64, 19.0)] {
            let c = certify(&uniform(n).unwrap(), &Strategy::Dyadic1d).unwrap();
            assert_eq!(c.value, want, "N = {n}");
            assert!(verify_certificate(&c).is_empty());
        }
    }

    #[test]
    fn product_matches_replay() {
        for r in 1..=3u32 {
            let u = uniform(1 << r).unwrap();
            let c = certify(&product(&[u.clone(), u]).unwrap(), &Strategy::ProductGrid).unwrap();
            assert_eq!(c.value, replay_product_recursion(r).unwrap().value);
            assert!(verify_certificate(&c).is_empty());
        }
    }

    #[test]
    fn boustrophedon_matches_replay() {
        for m in [2u64, 4] {
            let b = boustrophedon_curve_samples(m).unwrap();
            let c = certify(&b.samples, &Strategy::CurvePairs { curve: None }).unwrap();
            assert_eq!(c.value, replay_curve_recursion(m * m, m).unwrap());
            let explicit = certify(&b.samples, &Strategy::CurvePairs { curve: Some(b.curve.clone()) }).unwrap();
            assert!(explicit.value <= c.value);
            assert!(verify_certificate(&explicit).is_empty());
        }
    }

    #[test]
    fn slice_and_affine_keep_values() {
        let u = uniform(8).unwrap();
        let base = certify(&u, &Strategy::Dyadic1d).unwrap().value;
        let w = [Rational::new(3.into(), 7.into())];
        let s = certify_slice(&u, &w, &Strategy::Dyadic1d).unwrap();
        assert_eq!(s.value, base);
        let auto = certify(&embed(&u, &w), &Strategy::Dyadic1d).unwrap();
        assert_eq!(auto.value, base);
        let a = certify_affine(&u, &[Rational::from_integer(5.into())], &w, &Strategy::Dyadic1d).unwrap();
        assert_eq!(a.value, base);
        assert!(verify_certificate(&a).is_empty());
    }

    fn embed(u: &DirectionSet, w: &[Rational]) -> DirectionSet {
        crate::directions::embed_slice(u, w)
    }

    #[test]
    fn lacunary_and_hamsandwich_are_valid() {
        let theta = lacunary_uniform(3, 4).unwrap();
        let c = certify(&theta, &Strategy::LacunaryMixed).unwrap();
        assert!(verify_certificate(&c).is_empty());
        assert!(c.value <= theta.len() as f64);
        let u = uniform(4).unwrap();
        let grid = product(&[u.clone(), u]).unwrap();
        let h = certify(&grid, &Strategy::HamSandwich2d { rounds: 2 }).unwrap();
        assert!(verify_certificate(&h).is_empty());
        assert!(h.value <= 16.0);
    }

    #[test]
    fn inapplicable_strategies() {
        let u = uniform(4).unwrap();
        let grid = product(&[u.clone(), u.clone()]).unwrap();
        assert!(matches!(certify(&grid, &Strategy::Dyadic1d), Err(Error::Inapplicable { .. })));
        let pts = [(1, 1), (2, 3), (3, 2)]
            .iter()
            .map(|&(a, b)| alloc::vec![Rational::from_integer(a.into()), Rational::from_integer(b.into())])
            .collect();
        let odd = DirectionSet::new(2, pts, "odd").unwrap();
        assert!(matches!(certify(&odd, &Strategy::ProductGrid), Err(Error::Inapplicable { .. })));
        assert_eq!(Strategy::parse("hamsandwich-2d:3").unwrap(), Strategy::HamSandwich2d { rounds: 3 });
        assert!(Strategy::parse("spiral").is_err());
    }
}
