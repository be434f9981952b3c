//! Product quadrature on P¹ ≅ S²: Gauss–Legendre in the height variable
//! times an equispaced azimuthal grid.
//!
//! The Fubini–Study volume pushes forward to the uniform measure in height, so
//! integrals against the normalized volume are `½∫dh · (1/2π)∫dφ`. Weights
//! here are normalized to total mass 1 over the whole sphere.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureScheme {
    GaussLatitudeUniformLongitude,
}

/// A product rule exact for polynomials of degree `≤ exactness_degree` in the
/// Cartesian coordinates of S².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: QuadratureScheme,
    pub n_latitude: usize,
    pub n_longitude: usize,
    pub exactness_degree: usize,
}

impl QuadratureSpec {
    /// Smallest rule of the scheme with the given exactness: `D/2 + 1` Gauss
    /// nodes (exact to degree `D + 1` in height) and `D + 1` azimuthal nodes
    /// (exact for `e^{imφ}`, `|m| ≤ D`).
    pub fn with_degree(degree: usize) -> Self {
        Self {
            scheme: QuadratureScheme::GaussLatitudeUniformLongitude,
            n_latitude: (degree / 2 + 1).max(2),
            n_longitude: degree + 1,
            exactness_degree: degree,
        }
    }

    /// Default rule for the section space of degree `k`: exactness `2k + 4`.
    pub fn for_k(k: usize) -> Self {
        Self::with_degree(2 * k + 4)
    }

    pub fn validate(&self) -> Result<()> {
        let need = Self::with_degree(self.exactness_degree);
        if self.n_latitude < need.n_latitude || self.n_longitude < need.n_longitude {
            return Err(Error::Malformed(format!(
                "{} latitude / {} longitude nodes cannot reach exactness {}",
                self.n_latitude, self.n_longitude, self.exactness_degree
            )));
        }
        Ok(())
    }

    /// Rule over the whole sphere.
    pub fn rule(&self) -> SphereRule {
        self.rule_on_panels(&[])
    }

    /// Rule over the sphere with the height interval split at `breaks`, each
    /// panel getting its own Gauss nodes. Break values outside `(−1, 1)` are
    /// ignored.
    pub fn rule_on_panels(&self, breaks: &[f64]) -> SphereRule {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| *b > -1.0 && *b < 1.0).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![-1.0];
        edges.extend(cuts);
        edges.push(1.0);
        let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
        self.rule_on_bands(&panels)
    }

    /// Rule restricted to the union of the given height intervals.
    pub fn rule_on_bands(&self, bands: &[(f64, f64)]) -> SphereRule {
        let gl = GaussLegendre::new(self.n_latitude.max(2)).expect("at least two nodes");
        let mut latitudes = Vec::with_capacity(bands.len() * self.n_latitude);
        for &(lo, hi) in bands {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for &(x, w) in gl.as_node_weight_pairs() {
                // ½∫dh, mapped from [−1, 1] to [lo, hi].
                latitudes.push(LatitudeNode { height: mid + half * x, weight: 0.5 * half * w });
            }
        }
        latitudes.sort_by(|a, b| a.height.total_cmp(&b.height));
        let n = self.n_longitude.max(1);
        let longitudes = (0..n).map(|j| std::f64::consts::TAU * j as f64 / n as f64).collect();
        SphereRule { latitudes, longitudes }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatitudeNode {
    pub height: f64,
    /// Normalized-measure weight of the whole latitude circle.
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct SphereRule {
    pub latitudes: Vec<LatitudeNode>,
    pub longitudes: Vec<f64>,
}

impl SphereRule {
    pub fn longitude_weight(&self) -> f64 {
        1.0 / self.longitudes.len() as f64
    }

    pub fn len(&self) -> usize {
        self.latitudes.len() * self.longitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total normalized mass covered by the rule.
    pub fn mass(&self) -> f64 {
        self.latitudes.iter().map(|l| l.weight).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = (SpherePoint, f64)> + '_ {
        let lw = self.longitude_weight();
        self.latitudes.iter().flat_map(move |lat| {
            self.longitudes
                .iter()
                .map(move |&phi| (SpherePoint::from_height(lat.height, phi), lat.weight * lw))
        })
    }

    /// `∫ f dμ` for the normalized Fubini–Study measure μ.
    pub fn integrate(&self, f: impl Fn(&SpherePoint) -> C64) -> C64 {
        self.points().map(|(p, w)| f(&p) * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    /// Γ(n/2) for a positive integer n.
    fn gamma_half(n: usize) -> f64 {
        match n {
            1 => PI.sqrt(),
            2 => 1.0,
            _ => (n as f64 / 2.0 - 1.0) * gamma_half(n - 2),
        }
    }

    /// Mean of x^a y^b z^c over the unit sphere:
    /// 2Γ(α)Γ(β)Γ(γ)/Γ(α+β+γ) / 4π with α = (a+1)/2 etc., zero for odd powers.
    fn monomial_mean(a: usize, b: usize, c: usize) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        2.0 * gamma_half(a + 1) * gamma_half(b + 1) * gamma_half(c + 1) / gamma_half(a + b + c + 3) / (4.0 * PI)
    }

    #[test]
    fn exact_for_cartesian_monomials() {
        for degree in [0, 1, 4, 9, 14] {
            let rule = QuadratureSpec::with_degree(degree).rule();
            for a in 0..=degree {
                for b in 0..=degree - a {
                    for c in 0..=degree - a - b {
                        let got = rule.integrate(|p| {
                            let x = p.cartesian();
                            C64::new(x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32), 0.0)
                        });
                        let want = monomial_mean(a, b, c);
                        assert!((got.re - want).abs() < 1e-14 && got.im.abs() < 1e-14, "deg {degree}: {a},{b},{c}");
                    }
                }
            }
        }
    }

    #[test]
    fn not_exact_beyond_stated_degree() {
        let spec = QuadratureSpec::with_degree(4);
        // z^6 needs four Gauss nodes, the rule has three.
        let got = spec.rule().integrate(|p| C64::new(p.height().powi(6), 0.0)).re;
        assert!((got - monomial_mean(0, 0, 6)).abs() > 1e-6);
    }

    #[test]
    fn panels_integrate_indicators_exactly() {
        let spec = QuadratureSpec::with_degree(6);
        let rule = spec.rule_on_panels(&[-0.3, 0.5, 0.5, 2.0]);
        assert_eq!(rule.latitudes.len(), 3 * spec.n_latitude);
        let band = rule.integrate(|p| {
            let h = p.height();
            C64::new(if (-0.3..0.5).contains(&h) { h * h } else { 0.0 }, 0.0)
        });
        // ½∫_{−0.3}^{0.5} h² dh
        let want = 0.5 * (0.5f64.powi(3) + 0.3f64.powi(3)) / 3.0;
        assert!((band.re - want).abs() < 1e-15);
        assert!((rule.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validate_catches_undersized_rules() {
        let mut spec = QuadratureSpec::for_k(3);
        assert_eq!(spec.exactness_degree, 10);
        assert!(spec.validate().is_ok());
        spec.n_longitude = 4;
        assert!(spec.validate().is_err());
    }
}
