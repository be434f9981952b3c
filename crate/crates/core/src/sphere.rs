//! Points of P¹ ≅ S² and the functions ("symbols") quantized on it.
//!
//! A point is a homogeneous pair `(z₀, z₁)`. Its height is
//! `(|z₀|² − |z₁|²)/(|z₀|² + |z₁|²)`, equal to `cos θ` for the polar angle,
//! and its azimuth is `arg(z₀·z̄₁)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    z0: C64,
    z1: C64,
}

impl SpherePoint {
    pub fn new(z0: C64, z1: C64) -> Result<Self> {
        if z0.norm_sqr() + z1.norm_sqr() == 0.0 || !(z0.is_finite() && z1.is_finite()) {
            return Err(Error::ZeroPoint);
        }
        Ok(Self { z0, z1 })
    }

    pub fn real(z0: f64, z1: f64) -> Result<Self> {
        Self::new(C64::new(z0, 0.0), C64::new(z1, 0.0))
    }

    /// Point with polar angle `theta` (from the `z₀` pole) and azimuth `phi`.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        Self { z0: C64::from_polar((theta / 2.0).cos(), phi), z1: C64::new((theta / 2.0).sin(), 0.0) }
    }

    /// Point with the given height in `[−1, 1]` and azimuth.
    pub fn from_height(height: f64, phi: f64) -> Self {
        let t = (0.5 * (1.0 + height)).clamp(0.0, 1.0);
        Self { z0: C64::from_polar(t.sqrt(), phi), z1: C64::new((1.0 - t).sqrt(), 0.0) }
    }

    /// Inverse of [`SpherePoint::cartesian`] for a unit vector.
    pub fn from_cartesian(x: [f64; 3]) -> Self {
        let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        Self::from_height((x[2] / norm).clamp(-1.0, 1.0), x[1].atan2(x[0]))
    }

    pub fn coords(&self) -> (C64, C64) {
        (self.z0, self.z1)
    }

    /// Representative on the unit sphere `|z₀|² + |z₁|² = 1`.
    pub fn unit_lift(&self) -> (C64, C64) {
        let n = (self.z0.norm_sqr() + self.z1.norm_sqr()).sqrt();
        (self.z0 / n, self.z1 / n)
    }

    /// The same point with coordinates multiplied by `c ≠ 0`.
    pub fn rescaled(&self, c: C64) -> Result<Self> {
        Self::new(self.z0 * c, self.z1 * c)
    }

    pub fn height(&self) -> f64 {
        let (a, b) = (self.z0.norm_sqr(), self.z1.norm_sqr());
        (a - b) / (a + b)
    }

    pub fn azimuth(&self) -> f64 {
        let w = self.z0 * self.z1.conj();
        if w.norm() == 0.0 {
            0.0
        } else {
            w.arg()
        }
    }

    pub fn theta(&self) -> f64 {
        self.height().clamp(-1.0, 1.0).acos()
    }

    /// Unit vector in R³ under the standard identification P¹ ≅ S².
    pub fn cartesian(&self) -> [f64; 3] {
        let s = self.z0.norm_sqr() + self.z1.norm_sqr();
        let w = self.z0 * self.z1.conj() * 2.0 / s;
        [w.re, w.im, self.height()]
    }
}

type SphereFn = Arc<dyn Fn(&SpherePoint) -> C64 + Send + Sync>;

/// A complex function on P¹.
#[derive(Clone)]
pub enum Symbol {
    Constant(C64),
    /// `offset + slope · height`.
    AffineHeight { offset: f64, slope: f64 },
    /// `coeff · Y_l^m`, with `Y_l^m` orthonormal on the unit sphere.
    Harmonic { l: usize, m: i64, coeff: C64 },
    /// Indicator of the latitude band `lo ≤ height < hi` (closed at `hi = 1`).
    Band { lo: f64, hi: f64 },
    Custom { id: String, f: SphereFn, laplacian: Option<SphereFn> },
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl Symbol {
    pub fn one() -> Self {
        Symbol::Constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: f64) -> Self {
        Symbol::Constant(C64::new(c, 0.0))
    }

    /// The torus moment map `(|z₀|² − |z₁|²)/(|z₀|² + |z₁|²)`.
    pub fn height() -> Self {
        Symbol::AffineHeight { offset: 0.0, slope: 1.0 }
    }

    pub fn harmonic(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::Malformed(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(Symbol::Harmonic { l, m, coeff: C64::new(1.0, 0.0) })
    }

    pub fn custom(
        id: impl Into<String>,
        f: impl Fn(&SpherePoint) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Symbol::Custom { id: id.into(), f: Arc::new(f), laplacian: None }
    }

    /// Custom symbol with a known unit-sphere Laplacian.
    pub fn custom_with_laplacian(
        id: impl Into<String>,
        f: impl Fn(&SpherePoint) -> C64 + Send + Sync + 'static,
        laplacian: impl Fn(&SpherePoint) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Symbol::Custom { id: id.into(), f: Arc::new(f), laplacian: Some(Arc::new(laplacian)) }
    }

    pub fn id(&self) -> String {
        match self {
            Symbol::Constant(c) if c.im == 0.0 => format!("const({})", c.re),
            Symbol::Constant(c) => format!("const({c})"),
            Symbol::AffineHeight { offset, slope } if *offset == 0.0 && *slope == 1.0 => "height".into(),
            Symbol::AffineHeight { offset, slope } => format!("{offset}+{slope}*height"),
            Symbol::Harmonic { l, m, coeff } if *coeff == C64::new(1.0, 0.0) => format!("Y({l},{m})"),
            Symbol::Harmonic { l, m, coeff } => format!("({coeff})*Y({l},{m})"),
            Symbol::Band { lo, hi } => format!("band[{lo},{hi})"),
            Symbol::Custom { id, .. } => id.clone(),
        }
    }

    pub fn eval(&self, p: &SpherePoint) -> C64 {
        match self {
            Symbol::Constant(c) => *c,
            Symbol::AffineHeight { offset, slope } => C64::new(offset + slope * p.height(), 0.0),
            Symbol::Harmonic { l, m, coeff } => coeff * spherical_harmonic(*l, *m, p.theta(), p.azimuth()),
            Symbol::Band { lo, hi } => {
                let h = p.height();
                let inside = h >= *lo && (h < *hi || (*hi >= 1.0 && h <= 1.0));
                C64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            }
            Symbol::Custom { f, .. } => f(p),
        }
    }

    /// Whether the symbol is real-valued by construction.
    pub fn is_real(&self) -> bool {
        match self {
            Symbol::Constant(c) => c.im == 0.0,
            Symbol::AffineHeight { .. } | Symbol::Band { .. } => true,
            Symbol::Harmonic { m, coeff, .. } => *m == 0 && coeff.im == 0.0,
            Symbol::Custom { .. } => false,
        }
    }

    /// Degree as a polynomial in the Cartesian coordinates of S², if known.
    /// Bands count as degree 0: they are integrated panel by panel.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Symbol::Constant(_) | Symbol::Band { .. } => Some(0),
            Symbol::AffineHeight { slope, .. } => Some(usize::from(*slope != 0.0)),
            Symbol::Harmonic { l, .. } => Some(*l),
            Symbol::Custom { .. } => None,
        }
    }

    /// Heights where the symbol is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Symbol::Band { lo, hi } => vec![*lo, *hi],
            _ => Vec::new(),
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Symbol {
        match self {
            Symbol::Constant(c) => Symbol::Constant(c.conj()),
            Symbol::Harmonic { l, m, coeff } => {
                // conj(Y_l^m) = (−1)^m Y_l^{−m}
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                Symbol::Harmonic { l: *l, m: -m, coeff: coeff.conj() * sign }
            }
            Symbol::Custom { id, f, laplacian } => {
                let f = f.clone();
                let laplacian = laplacian.clone().map(|g| -> SphereFn { Arc::new(move |p| g(p).conj()) });
                Symbol::Custom { id: format!("conj({id})"), f: Arc::new(move |p| f(p).conj()), laplacian }
            }
            other => other.clone(),
        }
    }

    /// Closed-form Laplacian on the unit round sphere, when one is known.
    pub fn analytic_laplacian(&self) -> Option<Symbol> {
        match self {
            Symbol::Constant(_) => Some(Symbol::Constant(C64::new(0.0, 0.0))),
            // Height is the l = 1 zonal harmonic: Δ cos θ = −2 cos θ.
            Symbol::AffineHeight { slope, .. } => Some(Symbol::AffineHeight { offset: 0.0, slope: -2.0 * slope }),
            Symbol::Harmonic { l, m, coeff } => {
                let ev = -((l * (l + 1)) as f64);
                Some(Symbol::Harmonic { l: *l, m: *m, coeff: coeff * ev })
            }
            Symbol::Custom { id, laplacian: Some(g), .. } => {
                Some(Symbol::Custom { id: format!("lap({id})"), f: g.clone(), laplacian: None })
            }
            _ => None,
        }
    }
}

/// Orthonormal complex spherical harmonic `Y_l^m(θ, φ)` with the
/// Condon–Shortley phase.
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> C64 {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return C64::new(0.0, 0.0);
    }
    let p = normalized_legendre(l, am, theta.cos());
    let y = C64::from_polar(p, am as f64 * phi);
    if m >= 0 {
        y
    } else {
        let sign = if am % 2 == 0 { 1.0 } else { -1.0 };
        y.conj() * sign
    }
}

/// `sqrt((2l+1)/4π · (l−m)!/(l+m)!) · P_l^m(x)`, Condon–Shortley phase
/// included, by the standard three-term recurrence in `l`.
pub fn normalized_legendre(l: usize, m: usize, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=m {
        let i = i as f64;
        pmm *= -s * ((2.0 * i + 1.0) / (2.0 * i)).sqrt();
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = x * (2.0 * mf + 3.0).sqrt() * pmm;
    for ll in m + 2..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Laplacian on the sphere of radius `radius`.
///
/// Symbols with a closed form use it. Other smooth symbols get a
/// finite-difference Laplacian (see [`fd_laplacian`]) after a smoothness probe
/// at fixed points; bands are rejected.
pub fn laplace_beltrami(f: &Symbol, radius: f64) -> Result<Symbol> {
    let scale = 1.0 / (radius * radius);
    if let Some(lap) = f.analytic_laplacian() {
        return Ok(scale_symbol(lap, scale));
    }
    if let Symbol::Band { .. } = f {
        return Err(Error::NonSmooth(format!("{} is an indicator function", f.id())));
    }
    for p in probe_points() {
        fd_laplacian(f, &p)?;
    }
    let inner = f.clone();
    let id = format!("lap({})", f.id());
    Ok(Symbol::custom(id, move |p| fd_laplacian(&inner, p).unwrap_or(C64::new(f64::NAN, f64::NAN)) * scale))
}

fn scale_symbol(s: Symbol, scale: f64) -> Symbol {
    if scale == 1.0 {
        return s;
    }
    match s {
        Symbol::Constant(c) => Symbol::Constant(c * scale),
        Symbol::AffineHeight { offset, slope } => Symbol::AffineHeight { offset: offset * scale, slope: slope * scale },
        Symbol::Harmonic { l, m, coeff } => Symbol::Harmonic { l, m, coeff: coeff * scale },
        Symbol::Custom { id, f, .. } => Symbol::custom(format!("{scale}*{id}"), move |p| f(p) * scale),
        band @ Symbol::Band { .. } => band,
    }
}

fn probe_points() -> Vec<SpherePoint> {
    (0..12)
        .map(|i| {
            let i = i as f64;
            SpherePoint::from_height(-0.95 + 0.17 * i, 0.7 + 1.3 * i)
        })
        .collect()
}

/// Finite-difference Laplacian of `f` on the unit sphere at `p`.
///
/// Works in a rotated frame where `p` sits on an equator, so the operator is
/// `∂²_α + ∂²_β` there and the poles need no special handling. Second-order
/// central differences at steps `h`, `h/2`, `h/4` are Richardson-extrapolated;
/// a difference sequence that grows under refinement is reported as
/// [`Error::NonSmooth`].
pub fn fd_laplacian(f: &Symbol, p: &SpherePoint) -> Result<C64> {
    let n = p.cartesian();
    // Any unit vector orthogonal to n, then v = n × u.
    let pick = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = pick[0] * n[0] + pick[1] * n[1] + pick[2] * n[2];
    let mut u = [pick[0] - d * n[0], pick[1] - d * n[1], pick[2] - d * n[2]];
    let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|x| *x /= un);
    let v = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];

    let g = |alpha: f64, beta: f64| -> C64 {
        let (ca, sa, cb, sb) = (alpha.cos(), alpha.sin(), beta.cos(), beta.sin());
        let x = [
            ca * cb * n[0] + ca * sb * u[0] + sa * v[0],
            ca * cb * n[1] + ca * sb * u[1] + sa * v[1],
            ca * cb * n[2] + ca * sb * u[2] + sa * v[2],
        ];
        f.eval(&SpherePoint::from_cartesian(x))
    };
    let centre = g(0.0, 0.0);
    let second = |h: f64| -> C64 {
        (g(h, 0.0) + g(-h, 0.0) + g(0.0, h) + g(0.0, -h) - centre * 4.0) / (h * h)
    };
    let h = 2e-2;
    let (d1, d2, d3) = (second(h), second(h / 2.0), second(h / 4.0));
    let (e12, e23) = ((d1 - d2).norm(), (d2 - d3).norm());
    if !(d3.is_finite()) || (e23 > e12 && e23 > 1e-6 * (1.0 + d3.norm())) {
        return Err(Error::NonSmooth(format!(
            "finite-difference Laplacian of {} diverges under refinement at height {:.4}",
            f.id(),
            p.height()
        )));
    }
    Ok((d3 * 4.0 - d2) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn point_coordinates() {
        let north = SpherePoint::real(1.0, 0.0).unwrap();
        assert_eq!(north.height(), 1.0);
        assert_eq!(north.cartesian(), [0.0, 0.0, 1.0]);
        let eq = SpherePoint::real(1.0, 1.0).unwrap();
        assert!(eq.height().abs() < 1e-15);
        assert!((eq.cartesian()[0] - 1.0).abs() < 1e-15);
        assert!(matches!(SpherePoint::real(0.0, 0.0), Err(Error::ZeroPoint)));
    }

    #[test]
    fn polar_height_and_cartesian_agree() {
        for &(th, ph) in &[(0.3, 1.1), (2.0, -2.5), (1.5707, 0.0)] {
            let p = SpherePoint::from_polar(th, ph);
            assert!((p.height() - th.cos()).abs() < 1e-14);
            assert!((p.azimuth() - ph).abs() < 1e-14);
            let x = p.cartesian();
            let q = SpherePoint::from_cartesian(x);
            assert!((q.height() - p.height()).abs() < 1e-14);
            assert!((q.azimuth() - p.azimuth()).abs() < 1e-13);
        }
    }

    #[test]
    fn rescaling_preserves_geometry() {
        let p = SpherePoint::new(c(0.3, -1.2), c(2.0, 0.4)).unwrap();
        let q = p.rescaled(c(-0.7, 3.1)).unwrap();
        assert!((p.height() - q.height()).abs() < 1e-14);
        assert!((p.azimuth() - q.azimuth()).abs() < 1e-14);
    }

    #[test]
    fn low_order_harmonics_match_closed_forms() {
        let (th, ph) = (0.83_f64, 2.2_f64);
        let y10 = (3.0 / (4.0 * PI)).sqrt() * th.cos();
        assert!((spherical_harmonic(1, 0, th, ph) - c(y10, 0.0)).norm() < 1e-14);
        let y11 = C64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * th.sin(), ph);
        assert!((spherical_harmonic(1, 1, th, ph) - y11).norm() < 1e-14);
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * th.cos().powi(2) - 1.0);
        assert!((spherical_harmonic(2, 0, th, ph) - c(y20, 0.0)).norm() < 1e-14);
        let y2m2 = C64::from_polar((15.0 / (32.0 * PI)).sqrt() * th.sin().powi(2), -2.0 * ph);
        assert!((spherical_harmonic(2, -2, th, ph) - y2m2).norm() < 1e-14);
    }

    #[test]
    fn symbol_ids_and_conj() {
        assert_eq!(Symbol::height().id(), "height");
        assert_eq!(Symbol::one().id(), "const(1)");
        let y = Symbol::harmonic(3, 2).unwrap();
        let p = SpherePoint::from_polar(1.0, 0.4);
        assert!((y.conj().eval(&p) - y.eval(&p).conj()).norm() < 1e-14);
        let y = Symbol::harmonic(3, -1).unwrap();
        assert!((y.conj().eval(&p) - y.eval(&p).conj()).norm() < 1e-14);
        assert!(Symbol::harmonic(1, 2).is_err());
    }

    #[test]
    fn band_indicator() {
        let b = Symbol::Band { lo: 0.0, hi: 1.0 };
        assert_eq!(b.eval(&SpherePoint::real(1.0, 0.0).unwrap()).re, 1.0);
        assert_eq!(b.eval(&SpherePoint::real(0.0, 1.0).unwrap()).re, 0.0);
        assert_eq!(b.breakpoints(), vec![0.0, 1.0]);
    }

    #[test]
    fn laplacian_examples() {
        let zero = laplace_beltrami(&Symbol::constant(3.0), 1.0).unwrap();
        assert_eq!(zero.eval(&SpherePoint::from_polar(0.4, 0.1)).norm(), 0.0);

        let lap = laplace_beltrami(&Symbol::height(), 1.0).unwrap();
        let p = SpherePoint::from_polar(0.9, 0.3);
        assert!((lap.eval(&p).re + 2.0 * 0.9_f64.cos()).abs() < 1e-14);

        // Radius r scales the Laplacian by 1/r².
        let lap = laplace_beltrami(&Symbol::height(), 0.5).unwrap();
        assert!((lap.eval(&p).re + 8.0 * 0.9_f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn finite_difference_matches_cos_squared() {
        // cos²θ = 1/3 + (2/3)P₂(cos θ), so Δ cos²θ = −4·P₂ = 2 − 6cos²θ.
        let f = Symbol::custom("cos2", |p: &SpherePoint| C64::new(p.height().powi(2), 0.0));
        let lap = laplace_beltrami(&f, 1.0).unwrap();
        let mut state = 12345u64;
        for _ in 0..10 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let h = ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let phi = ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 * PI;
            let p = SpherePoint::from_height(h, phi);
            let expect = 2.0 - 6.0 * h * h;
            assert!((lap.eval(&p).re - expect).abs() < 1e-6, "h={h}");
        }
    }

    #[test]
    fn finite_difference_handles_poles_and_harmonics() {
        let y = Symbol::harmonic(3, 1).unwrap();
        let opaque = {
            let y = y.clone();
            Symbol::custom("opaque", move |p: &SpherePoint| y.eval(p))
        };
        for p in [SpherePoint::real(1.0, 0.0).unwrap(), SpherePoint::from_polar(2.0, 1.0)] {
            let fd = fd_laplacian(&opaque, &p).unwrap();
            assert!((fd + y.eval(&p) * 12.0).norm() < 1e-6);
        }
    }

    #[test]
    fn non_smooth_inputs_are_rejected() {
        assert!(matches!(
            laplace_beltrami(&Symbol::Band { lo: -0.5, hi: 0.5 }, 1.0),
            Err(Error::NonSmooth(_))
        ));
        // A kink exactly at a probe point's height.
        let probe_h = -0.95 + 0.17 * 3.0;
        let kink = Symbol::custom("step", move |p: &SpherePoint| {
            C64::new(if p.height() > probe_h { 1.0 } else { 0.0 }, 0.0)
        });
        assert!(matches!(laplace_beltrami(&kink, 1.0), Err(Error::NonSmooth(_))));
    }
}
