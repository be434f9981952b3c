//! Semiclassical checks on P¹: the Szegő kernel diagonal, equivariant
//! dimension sequences, Toeplitz trace sequences and power-law fits.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::op_norm;
use crate::p1::{build_sections, decompose, GroupAction, QuantizedGeometry, Refinement, SectionSpace};
use crate::quadrature::QuadratureSpec;
use crate::sphere::{laplace_beltrami, SpherePoint, Symbol};
use crate::toeplitz::{toeplitz, tuynman_deviation};
use crate::C64;

/// Trace values below `ZERO_TOL·(k+1)` count as zero in fits.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct KernelDiagonal {
    pub k: usize,
    pub points: Vec<SpherePoint>,
    pub values: Vec<f64>,
}

impl KernelDiagonal {
    pub fn spread(&self) -> f64 {
        let max = self.values.iter().copied().fold(f64::MIN, f64::max);
        let min = self.values.iter().copied().fold(f64::MAX, f64::min);
        max - min
    }
}

/// `Π_k(x, x) = Σ_j |ŝ_j(x)|²` at unit-norm lifts.
pub fn szego_diagonal(space: &SectionSpace, points: &[SpherePoint]) -> KernelDiagonal {
    let values = points.iter().map(|p| space.evaluate_unit(p).norm_squared()).collect();
    KernelDiagonal { k: space.k(), points: points.to_vec(), values }
}

/// `∫ Π_k(x, x) dV` by quadrature; equals `k + 1`.
pub fn szego_diagonal_integral(space: &SectionSpace) -> f64 {
    let rule = space.geometry().quadrature.rule();
    space.volume() * rule.integrate(|p| C64::new(space.evaluate_unit(p).norm_squared(), 0.0)).re
}

/// Least-squares line through `(log k, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    /// `log y − log(constant·k^exponent)` at each retained sample.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub samples: usize,
}

/// `y ≈ k^p·(C + D/k)`, fitted on relative residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingFit {
    pub exponent: f64,
    pub constant: f64,
    pub correction: f64,
    pub max_relative_residual: f64,
    pub samples: usize,
}

fn positive_samples(k_values: &[usize], y_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if k_values.len() != y_values.len() {
        return Err(Error::DimensionMismatch { expected: k_values.len(), found: y_values.len() });
    }
    let kept: Vec<(f64, f64)> = k_values
        .iter()
        .zip(y_values)
        .filter(|(k, y)| **k > 0 && **y > 0.0 && y.is_finite())
        .map(|(k, y)| (*k as f64, *y))
        .collect();
    if kept.len() < k_values.len() {
        warn!("dropped {} non-positive samples before fitting", k_values.len() - kept.len());
    }
    if kept.len() < 3 {
        return Err(Error::TooFewSamples { found: kept.len() });
    }
    Ok(kept)
}

/// Plain log–log least squares: `log y = log C + p·log k`.
pub fn fit_exponent(k_values: &[usize], y_values: &[f64]) -> Result<PowerFit> {
    let kept = positive_samples(k_values, y_values)?;
    let n = kept.len();
    let a = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { kept[i].0.ln() });
    let b = DVector::from_iterator(n, kept.iter().map(|(_, y)| y.ln()));
    let sol = a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| Error::Malformed(e.to_string()))?;
    let residuals: Vec<f64> = (&b - &a * &sol).iter().copied().collect();
    let max_residual = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(PowerFit { exponent: sol[1], constant: sol[0].exp(), residuals, max_residual, samples: n })
}

/// Best `(C, D)` for fixed `p`, and the summed squared relative residual.
fn leading_at(p: f64, kept: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = kept.len();
    let a = DMatrix::from_fn(n, 2, |i, j| {
        let (k, y) = kept[i];
        k.powf(p - j as f64) / y
    });
    let b = DVector::from_element(n, 1.0);
    match a.clone().svd(true, true).solve(&b, 1e-14) {
        Ok(sol) => {
            let r = (&a * &sol - b).norm_squared();
            (sol[0], sol[1], r)
        }
        Err(_) => (f64::NAN, f64::NAN, f64::INFINITY),
    }
}

/// Leading power with a first-order correction: `y ≈ k^p·(C + D/k)`.
///
/// Unlike [`fit_exponent`] this is not biased by the subleading term of
/// sequences such as `k + 1` or `1/(k + 2)`. The exponent is located by a
/// grid scan over `[−4, 4]` followed by golden-section refinement.
pub fn fit_leading_exponent(k_values: &[usize], y_values: &[f64]) -> Result<LeadingFit> {
    let kept = positive_samples(k_values, y_values)?;
    let cost = |p: f64| leading_at(p, &kept).2;
    let step = 0.01;
    let mut best = (-4.0, f64::INFINITY);
    for i in 0..=800 {
        let p = -4.0 + step * i as f64;
        let c = cost(p);
        if c < best.1 {
            best = (p, c);
        }
    }
    let refine = |center: f64| {
        let (mut lo, mut hi) = (center - step, center + step);
        let g = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (cost(x1), cost(x2));
        for _ in 0..80 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = cost(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = cost(x2);
            }
        }
        0.5 * (lo + hi)
    };
    let mut p = refine(best.0);
    let (mut c, mut d, _) = leading_at(p, &kept);
    // A pure power A·k^q fits exactly both at q and at q + 1 with C = 0.
    // When the leading term is negligible over the whole range, step down.
    let k_max = kept.iter().map(|&(k, _)| k).fold(0.0, f64::max);
    if (c * k_max).abs() < 1e-6 * d.abs() {
        p = refine((best.0 - 1.0).max(-4.0));
        (c, d, _) = leading_at(p, &kept);
    }
    let max_relative_residual =
        kept.iter().map(|&(k, y)| ((c + d / k) * k.powf(p) / y - 1.0).abs()).fold(0.0, f64::max);
    Ok(LeadingFit { exponent: p, constant: c, correction: d, max_relative_residual, samples: kept.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRun {
    pub kind: String,
    pub action: Option<String>,
    pub symbol: Option<String>,
    pub nu_g: Option<i64>,
    pub normalized: bool,
    pub k_values: Vec<usize>,
    pub dims: Vec<usize>,
    pub traces: Vec<f64>,
    pub predictions: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Allowed `|trace − prediction|` at each k.
    pub tolerances: Vec<f64>,
    pub fit: Option<PowerFit>,
    pub leading_fit: Option<LeadingFit>,
    /// Why no fit was made, when `fit` is absent.
    pub no_fit: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: String,
    pub action: Option<String>,
    pub symbol: Option<String>,
    pub nu_g: Option<i64>,
    pub normalized: bool,
    pub k_min: usize,
    pub k_max: usize,
    pub samples: usize,
    pub fitted_exponent: Option<f64>,
    pub fitted_constant: Option<f64>,
    pub fit_max_residual: Option<f64>,
    pub leading_exponent: Option<f64>,
    pub max_abs_residual: f64,
    pub max_tolerance: f64,
    pub identity_holds: bool,
    pub no_fit: Option<String>,
}

impl AsymptoticRun {
    fn finish(mut self) -> Self {
        let ys: Vec<f64> = self
            .traces
            .iter()
            .zip(&self.k_values)
            .map(|(t, k)| if t.abs() <= ZERO_TOL * (*k as f64 + 1.0) { 0.0 } else { *t })
            .collect();
        if ys.iter().all(|y| *y == 0.0) {
            self.no_fit = Some("all-zero sequence".into());
            return self;
        }
        match (fit_exponent(&self.k_values, &ys), fit_leading_exponent(&self.k_values, &ys)) {
            (Ok(f), Ok(l)) => {
                self.fit = Some(f);
                self.leading_fit = Some(l);
            }
            (Err(e), _) | (_, Err(e)) => self.no_fit = Some(e.to_string()),
        }
        self
    }

    /// Whether every `|trace − prediction|` is within its tolerance.
    pub fn identity_holds(&self) -> bool {
        self.residuals.iter().zip(&self.tolerances).all(|(r, t)| r.abs() <= *t)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            kind: self.kind.clone(),
            action: self.action.clone(),
            symbol: self.symbol.clone(),
            nu_g: self.nu_g,
            normalized: self.normalized,
            k_min: self.k_values.first().copied().unwrap_or(0),
            k_max: self.k_values.last().copied().unwrap_or(0),
            samples: self.k_values.len(),
            fitted_exponent: self.fit.as_ref().map(|f| f.exponent),
            fitted_constant: self.fit.as_ref().map(|f| f.constant),
            fit_max_residual: self.fit.as_ref().map(|f| f.max_residual),
            leading_exponent: self.leading_fit.as_ref().map(|f| f.exponent),
            max_abs_residual: self.residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
            max_tolerance: self.tolerances.iter().copied().fold(0.0, f64::max),
            identity_holds: self.identity_holds(),
            no_fit: self.no_fit.clone(),
        }
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary())?)
    }

    /// Columns `k, dim, trace, prediction, residual`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Malformed(e.to_string());
        w.write_record(["k", "dim", "trace", "prediction", "residual"]).map_err(io)?;
        for i in 0..self.k_values.len() {
            w.write_record([
                self.k_values[i].to_string(),
                self.dims[i].to_string(),
                self.traces[i].to_string(),
                self.predictions[i].to_string(),
                self.residuals[i].to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Malformed(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
    }
}

fn check_k_values(k_values: &[usize]) -> Result<()> {
    if k_values.is_empty() {
        return Err(Error::Malformed("empty k range".into()));
    }
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Malformed("k values must be strictly increasing".into()));
    }
    Ok(())
}

/// `k_min, k_min + step, …, ≤ k_max`.
pub fn k_range(k_min: usize, k_max: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || k_min > k_max {
        return Err(Error::Malformed(format!("bad k range {k_min}..={k_max} step {step}")));
    }
    Ok((k_min..=k_max).step_by(step).collect())
}

/// Dimension of the `ν_G` component of `H⁰(O(k))` by counting, without
/// building anything.
pub fn predicted_dimension(action: &GroupAction, nu_g: i64, k: usize) -> usize {
    let kt = k as i64;
    match action {
        GroupAction::Circle => {
            if nu_g == 0 {
                k + 1
            } else {
                0
            }
        }
        GroupAction::Torus => usize::from(nu_g.abs() <= kt && (kt - nu_g).rem_euclid(2) == 0),
        GroupAction::Su2 { .. } => {
            if nu_g == kt {
                k + 1
            } else {
                0
            }
        }
    }
}

/// `𝔗(Π̃ ∘ Π̃_{ν_G, k})` for each k: the trace of the component projector,
/// optionally divided by the dimension of the truncation `⊕_{k ≤ K}`.
///
/// Components are the isotypic ones of [`decompose`]: the circle has the
/// single label `ν_G = 0`, SU(2) labels `Sym^k` by `ν_G = k`. With `nu_g`
/// absent each k uses its whole block's label (circle and SU(2) only).
pub fn probability_sequence(
    action: &GroupAction,
    nu_g: Option<i64>,
    k_values: &[usize],
    truncation: usize,
    normalized: bool,
) -> Result<AsymptoticRun> {
    check_k_values(k_values)?;
    let k_max = *k_values.last().unwrap_or(&0);
    if truncation < k_max {
        return Err(Error::InvalidTruncation(format!("truncation {truncation} is below k = {k_max}")));
    }
    if nu_g.is_none() && *action == GroupAction::Torus {
        return Err(Error::ActionMismatch { action: "torus".into(), reason: "a fixed weight nu_g is required".into() });
    }
    let total = ((truncation + 1) * (truncation + 2) / 2) as f64;
    let scale = if normalized { 1.0 / total } else { 1.0 };
    let mut run = AsymptoticRun {
        kind: "probability".into(),
        action: Some(action.name().into()),
        symbol: None,
        nu_g,
        normalized,
        k_values: k_values.to_vec(),
        dims: Vec::new(),
        traces: Vec::new(),
        predictions: Vec::new(),
        residuals: Vec::new(),
        tolerances: Vec::new(),
        fit: None,
        leading_fit: None,
        no_fit: None,
    };
    for &k in k_values {
        let space = SectionSpace::standard(k)?;
        let nu_g = nu_g.unwrap_or(match action {
            GroupAction::Su2 { .. } => k as i64,
            _ => 0,
        });
        let comp = decompose(action, &space, Refinement::Isotypic)?.into_iter().find(|c| c.nu_g == nu_g);
        let (dim, tr) = match comp {
            Some(c) => (c.dim(), c.subspace.projector().trace().re),
            None => (0, 0.0),
        };
        let pred = predicted_dimension(action, nu_g, k) as f64 * scale;
        run.dims.push(dim);
        run.traces.push(tr * scale);
        run.predictions.push(pred);
        run.residuals.push(tr * scale - pred);
        run.tolerances.push(1e-10 * (k as f64 + 1.0) * scale);
    }
    Ok(run.finish())
}

/// `mean(f) = ∫ f dμ` with a rule of degree `degree`, split at the symbol's
/// breakpoints.
pub fn symbol_mean(f: &Symbol, degree: usize) -> f64 {
    QuadratureSpec::with_degree(degree).rule_on_panels(&f.breakpoints()).integrate(|p| f.eval(p)).re
}

/// `Tr T_k[f]` against the P¹ identity `(k + 1)·mean(f)`.
pub fn trace_sequence(f: &Symbol, k_values: &[usize], volume: f64) -> Result<AsymptoticRun> {
    check_k_values(k_values)?;
    let mut run = AsymptoticRun {
        kind: "trace".into(),
        action: None,
        symbol: Some(f.id()),
        nu_g: None,
        normalized: false,
        k_values: k_values.to_vec(),
        dims: Vec::new(),
        traces: Vec::new(),
        predictions: Vec::new(),
        residuals: Vec::new(),
        tolerances: Vec::new(),
        fit: None,
        leading_fit: None,
        no_fit: None,
    };
    for &k in k_values {
        let geometry = QuantizedGeometry::new(k).with_volume(volume)?;
        let space = build_sections(k, &geometry)?;
        let tr = toeplitz(f, &space).matrix().trace().re;
        let mean = symbol_mean(f, geometry.quadrature.exactness_degree);
        let pred = (k as f64 + 1.0) * mean;
        run.dims.push(k + 1);
        run.traces.push(tr);
        run.predictions.push(pred);
        run.residuals.push(tr - pred);
        run.tolerances.push(1e-8 * (k as f64 + 1.0));
    }
    Ok(run.finish())
}

/// `‖(1/i)Q_k[f] − T_k[f]‖` against `‖T_k[Δf]‖/(2k)`.
pub fn tuynman_sequence(f: &Symbol, k_values: &[usize], geometry: &QuantizedGeometry) -> Result<AsymptoticRun> {
    check_k_values(k_values)?;
    if k_values[0] == 0 {
        return Err(Error::ZeroK);
    }
    let mut run = AsymptoticRun {
        kind: "tuynman".into(),
        action: None,
        symbol: Some(f.id()),
        nu_g: None,
        normalized: false,
        k_values: k_values.to_vec(),
        dims: Vec::new(),
        traces: Vec::new(),
        predictions: Vec::new(),
        residuals: Vec::new(),
        tolerances: Vec::new(),
        fit: None,
        leading_fit: None,
        no_fit: None,
    };
    let lap = laplace_beltrami(f, geometry.metric_radius)?;
    for &k in k_values {
        let g = QuantizedGeometry { k, quadrature: QuadratureSpec::for_k(k), ..geometry.clone() };
        let space = build_sections(k, &g)?;
        let dev = tuynman_deviation(f, &space)?;
        let pred = op_norm(toeplitz(&lap, &space).matrix()) / (2.0 * k as f64);
        run.dims.push(k + 1);
        run.traces.push(dev);
        run.predictions.push(pred);
        run.residuals.push(dev - pred);
        run.tolerances.push(1e-9);
    }
    Ok(run.finish())
}
