//! Least-squares growth fits of `rayleigh_lower` against `N`.

use anyhow::bail;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::sweep::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `y = a + b ln N`.
    #[serde(rename = "logN")]
    LogN,
    /// `y = a + b √(ln N)`.
    #[serde(rename = "sqrtlogN")]
    SqrtLogN,
    /// `y = a N^b`, fitted as `ln y = ln a + b ln N`.
    Power,
    /// `y = a`.
    Constant,
}

impl Model {
    pub fn parse(s: &str) -> anyhow::Result<Model> {
        Ok(match s {
            "logN" | "logn" => Model::LogN,
            "sqrtlogN" | "sqrtlogn" => Model::SqrtLogN,
            "power" => Model::Power,
            "constant" => Model::Constant,
            _ => bail!("unknown model {s:?}; use logN, sqrtlogN, power or constant"),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::LogN => "logN",
            Model::SqrtLogN => "sqrtlogN",
            Model::Power => "power",
            Model::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub model: Model,
    /// `b`: the coefficient of the model term, or the exponent for `power`.
    pub slope: f64,
    /// `a`: the constant term, or the prefactor for `power`.
    pub intercept: f64,
    /// Sum of squared residuals of `y`, in the original units for every model.
    pub residual: f64,
    /// Standard error of `slope` in the fitted coordinates.
    pub slope_stderr: f64,
    /// 95% confidence interval for `slope` (Student t with `n − 2` degrees).
    pub slope_ci95: (f64, f64),
    pub points: usize,
}

impl Fit {
    pub fn predict(&self, n: f64) -> f64 {
        match self.model {
            Model::LogN => self.intercept + self.slope * n.ln(),
            Model::SqrtLogN => self.intercept + self.slope * n.ln().sqrt(),
            Model::Power => self.intercept * n.powf(self.slope),
            Model::Constant => self.intercept,
        }
    }
}

/// Fits `(N, y)` pairs; needs at least four points with distinct `N`.
pub fn fit_growth(points: &[(f64, f64)], model: Model) -> anyhow::Result<Fit> {
    if points.len() < 4 {
        bail!("a fit needs at least 4 points, got {}", points.len());
    }
    if points.iter().any(|&(n, y)| !(n.is_finite() && y.is_finite() && n >= 1.0)) {
        bail!("fit data must be finite with N >= 1");
    }
    let m = points.len() as f64;
    if model == Model::Constant {
        let mean = points.iter().map(|p| p.1).sum::<f64>() / m;
        let residual = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
        return Ok(Fit {
            model,
            slope: 0.0,
            intercept: mean,
            residual,
            slope_stderr: 0.0,
            slope_ci95: (0.0, 0.0),
            points: points.len(),
        });
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, y)| match model {
            Model::LogN => Ok((n.ln(), y)),
            Model::SqrtLogN => Ok((n.ln().sqrt(), y)),
            Model::Power if y > 0.0 => Ok((n.ln(), y.ln())),
            Model::Power => bail!("power fit needs positive values"),
            Model::Constant => unreachable!("handled above"),
        })
        .collect::<anyhow::Result<_>>()?;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / m;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * m * (1.0 + mx * mx) {
        bail!("degenerate data: all N give the same model coordinate");
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let fitted_rss: f64 = xy.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    let dof = m - 2.0;
    let stderr = (fitted_rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
    let fit = Fit {
        model,
        slope: b,
        intercept: if model == Model::Power { a.exp() } else { a },
        residual: 0.0,
        slope_stderr: stderr,
        slope_ci95: (b - t * stderr, b + t * stderr),
        points: points.len(),
    };
    let residual = points.iter().map(|&(n, y)| (y - fit.predict(n)).powi(2)).sum();
    Ok(Fit { residual, ..fit })
}

/// `(N, rayleigh_lower)` of the rows that succeeded.
pub fn points_from_rows(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.ok())
        .filter_map(|r| r.rayleigh_lower.map(|y| (r.n as f64, y)))
        .collect()
}
