//! Named direction-set families with `key=value` parameters.

use std::collections::BTreeMap;

use anyhow::{bail, Context};
use mdht_core::certifier::Strategy;
use mdht_core::directions::{
    boustrophedon_curve_samples, growth_schedule, lacunary_uniform, prescribed_growth_product, product, uniform,
    DirectionSet,
};
use mdht_core::probe::SharpnessSpec;

pub const FAMILIES: &[&str] = &["uniform", "grid", "product", "lacunary", "theta", "boustrophedon", "prescribed"];

/// A built family member with the probe spec and strategy that suit it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub omega: DirectionSet,
    /// Present when Ω is `∏U_{N_k}` with nonincreasing sizes.
    pub spec: Option<SharpnessSpec>,
    pub strategy: Strategy,
}

pub type Params = BTreeMap<String, String>;

/// Parses `key=value` words.
pub fn parse_params<S: AsRef<str>>(words: &[S]) -> anyhow::Result<Params> {
    let mut out = Params::new();
    for w in words {
        let w = w.as_ref();
        let (k, v) = w.split_once('=').with_context(|| format!("parameter {w:?} is not key=value"))?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            bail!("parameter {k} given twice");
        }
    }
    Ok(out)
}

pub fn format_params(p: &Params) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn get<T: std::str::FromStr>(p: &Params, key: &str) -> anyhow::Result<T> {
    let s = p.get(key).with_context(|| format!("missing parameter {key}"))?;
    s.parse().map_err(|_| anyhow::anyhow!("parameter {key}={s} is not valid"))
}

fn get_or<T: std::str::FromStr>(p: &Params, key: &str, default: T) -> anyhow::Result<T> {
    if p.contains_key(key) {
        get(p, key)
    } else {
        Ok(default)
    }
}

/// The parameter a sweep varies by default.
pub fn primary_key(family: &str) -> anyhow::Result<&'static str> {
    Ok(match family {
        "uniform" | "grid" | "boustrophedon" => "M",
        "product" => "sizes",
        "lacunary" => "R",
        "theta" => "index",
        "prescribed" => "N",
        _ => bail!("unknown family {family:?}; known: {}", FAMILIES.join(", ")),
    })
}

fn check_allowed(family: &str, p: &Params, allowed: &[&str]) -> anyhow::Result<()> {
    for k in p.keys() {
        if !allowed.contains(&k.as_str()) {
            bail!("family {family} takes {}; got {k}", allowed.join(", "));
        }
    }
    Ok(())
}

fn sizes_spec(sizes: &[u64]) -> Option<SharpnessSpec> {
    SharpnessSpec::new(sizes.to_vec()).ok()
}

pub fn build(family: &str, p: &Params) -> anyhow::Result<Instance> {
    Ok(match family {
        "uniform" => {
            check_allowed(family, p, &["M"])?;
            let m: u64 = get(p, "M")?;
            Instance { omega: uniform(m)?, spec: sizes_spec(&[m]), strategy: Strategy::Dyadic1d }
        }
        "grid" => {
            check_allowed(family, p, &["M"])?;
            let m: u64 = get(p, "M")?;
            let u = uniform(m)?;
            let omega = product(&[u.clone(), u])?.with_label(format!("U{m}xU{m}"));
            Instance { omega, spec: sizes_spec(&[m, m]), strategy: Strategy::ProductGrid }
        }
        "product" => {
            check_allowed(family, p, &["sizes"])?;
            let s: String = get(p, "sizes")?;
            let sizes = s
                .split('x')
                .map(|t| t.parse::<u64>().map_err(|_| anyhow::anyhow!("bad size {t:?} in {s:?}")))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let factors = sizes.iter().map(|&m| uniform(m)).collect::<mdht_core::Result<Vec<_>>>()?;
            let omega = product(&factors)?.with_label(sizes.iter().map(|m| format!("U{m}")).collect::<Vec<_>>().join("x"));
            let strategy = if sizes.len() <= 2 { Strategy::ProductGrid } else { Strategy::Trivial };
            Instance { omega, spec: sizes_spec(&sizes), strategy }
        }
        "lacunary" => {
            check_allowed(family, p, &["R", "M"])?;
            let omega = lacunary_uniform(get(p, "R")?, get(p, "M")?)?;
            Instance { omega, spec: None, strategy: Strategy::LacunaryMixed }
        }
        "theta" => {
            check_allowed(family, p, &["alpha", "index"])?;
            let alpha: f64 = get_or(p, "alpha", 0.5)?;
            let index: usize = get(p, "index")?;
            if index == 0 {
                bail!("theta index starts at 1");
            }
            let sched = growth_schedule(alpha, index)?;
            let &(m, r) = sched.entries.last().context("empty growth schedule")?;
            let omega = lacunary_uniform(r, m)?.with_label(format!("theta(alpha={alpha},index={index},R={r},M={m})"));
            Instance { omega, spec: None, strategy: Strategy::LacunaryMixed }
        }
        "boustrophedon" => {
            check_allowed(family, p, &["M"])?;
            let b = boustrophedon_curve_samples(get(p, "M")?)?;
            Instance { omega: b.samples, spec: None, strategy: Strategy::CurvePairs { curve: None } }
        }
        "prescribed" => {
            check_allowed(family, p, &["n", "alpha", "beta", "N"])?;
            let n: usize = get(p, "n")?;
            let omega = prescribed_growth_product(n, get(p, "alpha")?, get(p, "beta")?, get(p, "N")?)?;
            let spec = omega
                .product_factors()
                .and_then(|fs| sizes_spec(&fs.iter().map(|f| f.len() as u64).collect::<Vec<_>>()));
            let strategy = if n == 2 { Strategy::ProductGrid } else { Strategy::Trivial };
            Instance { omega, spec, strategy }
        }
        _ => bail!("unknown family {family:?}; known: {}", FAMILIES.join(", ")),
    })
}

/// The sharpness spec of Ω when it is `U_N1 x ... x U_Nn` with `N1 >= ... >= Nn`.
pub fn spec_of(omega: &DirectionSet) -> Option<SharpnessSpec> {
    let factors = omega.product_factors()?;
    let mut sizes = Vec::with_capacity(factors.len());
    for f in &factors {
        let m = f.len() as u64;
        if uniform(m).ok()?.points().iter().map(|p| &p[0]).ne(f.iter()) {
            return None;
        }
        sizes.push(m);
    }
    sizes_spec(&sizes)
}

/// Strategy used when none is given.
pub fn natural_strategy(omega: &DirectionSet) -> Strategy {
    match omega.dim() {
        1 => Strategy::Dyadic1d,
        2 if omega.product_factors().is_some() => Strategy::ProductGrid,
        2 => Strategy::HamSandwich2d { rounds: 2 },
        _ => Strategy::Trivial,
    }
}
