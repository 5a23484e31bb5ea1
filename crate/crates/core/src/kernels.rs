//! Interaction kernels F(xi_2, xi_4), G(xi_1, xi_3) and checkers for the
//! integrability, infrared and smoothness conditions imposed on them.
//!
//! Every family is a product `scale * charged(s, n, p1, p3) * neutral(q)`,
//! so all integrals over Gamma_1 x R^3 factorise into a charged-lepton part
//! and a neutrino part.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landau::LandauQN;
use crate::quadrature::{self, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    GaussianProduct,
    CompactBump,
    CounterexampleIr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Support radius Lambda of the compact bump (energy units).
    pub cutoff: f64,
    /// Gaussian width sigma_w (energy units).
    pub width: f64,
    /// Highest Landau level carried by the kernel.
    pub level_cap: u32,
    pub scale: f64,
    /// Spin labels on which the kernel is supported.
    pub spins: Vec<i8>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            family: KernelFamily::GaussianProduct,
            cutoff: 4.0,
            width: 1.0,
            level_cap: 0,
            scale: 1.0,
            spins: vec![-1, 1],
        }
    }
}

/// Derivative selector for the charged-lepton factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargedDerivative {
    None,
    D3,
    D33,
    D1,
}

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

impl KernelSpec {
    pub fn gaussian(width: f64, level_cap: u32, scale: f64) -> Self {
        KernelSpec {
            width,
            level_cap,
            scale,
            ..Default::default()
        }
    }

    pub fn zero() -> Self {
        KernelSpec {
            scale: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::Config(format!(
                "kernel cutoff must be positive, got {}",
                self.cutoff
            )));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::Config(format!(
                "kernel width must be positive, got {}",
                self.width
            )));
        }
        if !self.scale.is_finite() {
            return Err(Error::Config("kernel scale must be finite".into()));
        }
        if self.spins.is_empty() || self.spins.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Config(
                "kernel spins must be a nonempty subset of {-1, 1}".into(),
            ));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    fn supports(&self, s: i8, n: u32) -> bool {
        n <= self.level_cap && self.spins.contains(&s)
    }

    /// Charged-lepton factor, without the overall scale.
    pub fn charged(&self, s: i8, n: u32, p1: f64, p3: f64) -> f64 {
        if !self.supports(s, n) {
            return 0.0;
        }
        self.charged_profile(p1, p3)
    }

    fn charged_profile(&self, p1: f64, p3: f64) -> f64 {
        let r2 = p1 * p1 + p3 * p3;
        match self.family {
            KernelFamily::GaussianProduct | KernelFamily::CounterexampleIr => {
                (-r2 / (2.0 * self.width * self.width)).exp()
            }
            KernelFamily::CompactBump => bump(r2 / (self.cutoff * self.cutoff)),
        }
    }

    /// Neutrino factor, without the overall scale.
    pub fn neutral(&self, q: &[f64; 3]) -> f64 {
        let r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        let w2 = self.width * self.width;
        match self.family {
            KernelFamily::GaussianProduct => (-r2 / (2.0 * w2)).exp(),
            KernelFamily::CompactBump => bump(r2 / (self.cutoff * self.cutoff)),
            KernelFamily::CounterexampleIr => {
                if r2 == 0.0 {
                    f64::INFINITY
                } else {
                    (-r2 / (2.0 * w2)).exp() / r2.sqrt()
                }
            }
        }
    }

    /// Full kernel value at a (Landau, momentum) pair.
    pub fn eval(&self, qn: &LandauQN, q: &[f64; 3]) -> C64 {
        let c = self.charged(qn.s, qn.n, qn.p1, qn.p3);
        if c == 0.0 || self.scale == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::new(self.scale * c * self.neutral(q), 0.0)
    }

    fn fd_step(&self) -> f64 {
        1e-4 * self.width
    }

    /// Derivatives of the charged profile in (p1, p3).
    pub fn charged_derivative(&self, which: ChargedDerivative, p1: f64, p3: f64) -> f64 {
        let w2 = self.width * self.width;
        match (self.family, which) {
            (_, ChargedDerivative::None) => self.charged_profile(p1, p3),
            (KernelFamily::GaussianProduct | KernelFamily::CounterexampleIr, d) => {
                let g = self.charged_profile(p1, p3);
                match d {
                    ChargedDerivative::D1 => -p1 / w2 * g,
                    ChargedDerivative::D3 => -p3 / w2 * g,
                    ChargedDerivative::D33 => (p3 * p3 / w2 - 1.0) / w2 * g,
                    ChargedDerivative::None => unreachable!(),
                }
            }
            (KernelFamily::CompactBump, d) => {
                let h = self.fd_step();
                match d {
                    ChargedDerivative::D1 => diff1(|x| self.charged_profile(x, p3), p1, h),
                    ChargedDerivative::D3 => diff1(|x| self.charged_profile(p1, x), p3, h),
                    ChargedDerivative::D33 => diff2(|x| self.charged_profile(p1, x), p3, h),
                    ChargedDerivative::None => unreachable!(),
                }
            }
        }
    }

    /// Mixed derivative d^2/dq1 dq3 of the neutrino factor.
    pub fn neutral_d13(&self, q: &[f64; 3]) -> f64 {
        let w2 = self.width * self.width;
        match self.family {
            KernelFamily::GaussianProduct => q[0] * q[2] / (w2 * w2) * self.neutral(q),
            _ => {
                let h = self.fd_step();
                diff1(|a| diff1(|b| self.neutral(&[a, q[1], b]), q[2], h), q[0], h)
            }
        }
    }

    /// Radius beyond which the kernel is negligible (or exactly zero).
    fn extent(&self) -> f64 {
        match self.family {
            KernelFamily::CompactBump => self.cutoff,
            _ => 12.0 * self.width,
        }
    }

    fn n_supported(&self) -> f64 {
        (self.spins.len() as f64) * (self.level_cap as f64 + 1.0)
    }
}

fn diff1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn diff2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

const PANEL_ORDER: usize = 16;
const RADIAL_PANELS: usize = 16;
const ANGLE_NODES: usize = 32;

/// Integral over the (p1, p3) plane in polar coordinates.
fn plane_integral<F: Fn(f64, f64) -> f64 + Sync>(radius: f64, f: F) -> Result<f64> {
    let radial = quadrature::composite_legendre(PANEL_ORDER, RADIAL_PANELS, 0.0, radius)?;
    let angles = quadrature::periodic_trapezoid(2 * ANGLE_NODES)?;
    let parts: Vec<f64> = radial
        .nodes
        .par_iter()
        .zip(radial.weights.par_iter())
        .map(|(&r, &wr)| {
            angles
                .iter()
                .map(|(phi, wp)| wp * f(r * phi.cos(), r * phi.sin()))
                .sum::<f64>()
                * r
                * wr
        })
        .collect();
    Ok(parts.iter().sum())
}

/// Sum over supported (s, n) and integral over the plane of `g(profile)`.
fn charged_integral<F: Fn(f64, f64) -> f64 + Sync>(spec: &KernelSpec, f: F) -> Result<f64> {
    Ok(spec.n_supported() * plane_integral(spec.extent(), f)?)
}

fn sphere_rule() -> Result<(Rule, Rule)> {
    Ok((
        quadrature::gauss_legendre(ANGLE_NODES)?,
        quadrature::periodic_trapezoid(ANGLE_NODES)?,
    ))
}

/// Angular average times 4 pi at radius r.
fn shell<F: Fn(&[f64; 3]) -> f64>(cos_rule: &Rule, phi_rule: &Rule, r: f64, f: &F) -> f64 {
    let mut acc = 0.0;
    for (ct, wc) in cos_rule.iter() {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for (phi, wp) in phi_rule.iter() {
            let q = [r * st * phi.cos(), r * st * phi.sin(), r * ct];
            acc += wc * wp * f(&q);
        }
    }
    acc
}

/// int_{|q| <= radius} f d^3q with panels graded geometrically towards the
/// origin down to radius * 2^-depth.
fn ball_integral<F: Fn(&[f64; 3]) -> f64 + Sync>(radius: f64, depth: usize, f: &F) -> Result<f64> {
    let (cos_rule, phi_rule) = sphere_rule()?;
    let mut edges: Vec<f64> = (0..=depth)
        .rev()
        .map(|k| radius * 0.5f64.powi(k as i32))
        .collect();
    // uniform panels on the outer half, which carries most of the mass
    let outer: Vec<f64> = (1..RADIAL_PANELS)
        .map(|k| radius * (0.5 + 0.5 * k as f64 / RADIAL_PANELS as f64))
        .collect();
    edges.pop();
    edges.extend(outer);
    edges.push(radius);
    let radial = quadrature::graded_legendre(PANEL_ORDER, &edges)?;
    let parts: Vec<f64> = radial
        .nodes
        .par_iter()
        .zip(radial.weights.par_iter())
        .map(|(&r, &wr)| wr * r * r * shell(&cos_rule, &phi_rule, r, f))
        .collect();
    Ok(parts.iter().sum())
}

/// Relative change between successive refinements above which an integral
/// is declared divergent.
pub const CAUCHY_TOL: f64 = 1e-3;

/// Ball integral with radial refinement; `None` when the refinement
/// sequence fails the Cauchy test.
fn refined_ball_integral<F: Fn(&[f64; 3]) -> f64 + Sync>(
    radius: f64,
    f: &F,
) -> Result<Option<f64>> {
    let depths = [20usize, 30, 40];
    let mut prev = ball_integral(radius, depths[0], f)?;
    let mut last_change = 0.0;
    for &d in &depths[1..] {
        let cur = ball_integral(radius, d, f)?;
        last_change = if cur == prev {
            0.0
        } else {
            (cur - prev).abs() / cur.abs().max(prev.abs())
        };
        prev = cur;
    }
    if !prev.is_finite() || last_change > CAUCHY_TOL {
        Ok(None)
    } else {
        Ok(Some(prev))
    }
}

/// ||F||_{L^2(Gamma_1 x R^3)} by quadrature.
pub fn l2_norm(spec: &KernelSpec) -> Result<f64> {
    if spec.is_zero() {
        return Ok(0.0);
    }
    let c = charged_integral(spec, |a, b| spec.charged_profile(a, b).powi(2))?;
    let n = refined_ball_integral(spec.extent(), &|q: &[f64; 3]| spec.neutral(q).powi(2))?
        .ok_or_else(|| {
            Error::convergence("kernel L2 norm", "neutrino integral diverges at q = 0")
        })?;
    Ok(spec.scale.abs() * (c * n).sqrt())
}

/// Closed-form ||F||^2 for the Gaussian family.
pub fn gaussian_l2_norm_sq(spec: &KernelSpec) -> f64 {
    let a = PI * spec.width * spec.width;
    spec.scale * spec.scale * spec.n_supported() * a * a.powf(1.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfraredFit {
    pub sigmas: Vec<f64>,
    pub masses: Vec<f64>,
    /// Least-squares slope of log mass against log sigma; `None` when the
    /// kernel vanishes identically.
    pub exponent: Option<f64>,
    pub residual: f64,
    /// max over sigma of mass / sigma
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub l2_norm_f: f64,
    pub l2_norm_g: f64,
    /// `None` marks a divergent integral.
    pub ir_weighted_f: Option<f64>,
    pub ir_weighted_g: Option<f64>,
    pub ir_mass_f: InfraredFit,
    pub ir_mass_g: InfraredFit,
    pub k_constant: f64,
    pub deriv_norms: BTreeMap<String, Option<f64>>,
    pub pass: BTreeMap<String, bool>,
}

fn infrared_fit(spec: &KernelSpec, charged_sq: f64, sigmas: &[f64]) -> Result<InfraredFit> {
    let mut masses = Vec::with_capacity(sigmas.len());
    for &s in sigmas {
        let inner = if spec.is_zero() {
            0.0
        } else {
            refined_ball_integral(s, &|q: &[f64; 3]| spec.neutral(q).powi(2))?
                .unwrap_or(f64::INFINITY)
        };
        masses.push(spec.scale.abs() * (charged_sq * inner).sqrt());
    }
    let k = sigmas
        .iter()
        .zip(&masses)
        .map(|(s, m)| m / s)
        .fold(0.0, f64::max);
    if masses.iter().all(|m| *m == 0.0) {
        return Ok(InfraredFit {
            sigmas: sigmas.to_vec(),
            masses,
            exponent: None,
            residual: 0.0,
            k,
        });
    }
    let xs: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    let (slope, _, residual) = linear_fit(&xs, &ys);
    Ok(InfraredFit {
        sigmas: sigmas.to_vec(),
        masses,
        exponent: Some(slope),
        residual,
        k,
    })
}

/// Least-squares line y = slope x + intercept; returns (slope, intercept, rms residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

struct Factors {
    charged_sq: f64,
    neutral_sq: f64,
}

fn factors(spec: &KernelSpec) -> Result<Factors> {
    if spec.is_zero() {
        return Ok(Factors {
            charged_sq: 0.0,
            neutral_sq: 0.0,
        });
    }
    Ok(Factors {
        charged_sq: charged_integral(spec, |a, b| spec.charged_profile(a, b).powi(2))?,
        neutral_sq: refined_ball_integral(spec.extent(), &|q: &[f64; 3]| spec.neutral(q).powi(2))?
            .unwrap_or(f64::INFINITY),
    })
}

/// Squared L^2 norms of the charged and neutral factors, without the
/// overall scale; the neutral one is infinite when divergent.
pub fn factor_norms_sq(spec: &KernelSpec) -> Result<(f64, f64)> {
    let f = factors(spec)?;
    Ok((f.charged_sq, f.neutral_sq))
}

fn charged_derivative_sq(spec: &KernelSpec, which: ChargedDerivative) -> Result<f64> {
    charged_integral(spec, |a, b| spec.charged_derivative(which, a, b).powi(2))
}

fn gradient_sq(spec: &KernelSpec) -> Result<f64> {
    charged_integral(spec, |a, b| {
        spec.charged_derivative(ChargedDerivative::D1, a, b).powi(2)
            + spec.charged_derivative(ChargedDerivative::D3, a, b).powi(2)
    })
}

/// Evaluates every kernel condition used by the spectral and scattering
/// results for the pair (F, G).
pub fn check_hypotheses(
    spec_f: &KernelSpec,
    spec_g: &KernelSpec,
    sigmas: &[f64],
) -> Result<HypothesisReport> {
    spec_f.validate()?;
    spec_g.validate()?;
    if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::invalid("sigmas must be positive"));
    }
    if sigmas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("sigmas must be strictly decreasing"));
    }
    let ff = factors(spec_f)?;
    let fg = factors(spec_g)?;
    let norm = |spec: &KernelSpec, f: &Factors| {
        if spec.is_zero() {
            0.0
        } else {
            spec.scale.abs() * (f.charged_sq * f.neutral_sq).sqrt()
        }
    };

    // infrared-weighted norms, weight 1/|q|^2
    let ir = |spec: &KernelSpec, f: &Factors| -> Result<Option<f64>> {
        if spec.is_zero() {
            return Ok(Some(0.0));
        }
        let inner = refined_ball_integral(spec.extent(), &|q: &[f64; 3]| {
            let r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
            spec.neutral(q).powi(2) / r2
        })?;
        Ok(inner.map(|v| spec.scale * spec.scale * f.charged_sq * v))
    };
    let ir_f = ir(spec_f, &ff)?;
    let ir_g = ir(spec_g, &fg)?;
    let mass_f = infrared_fit(spec_f, ff.charged_sq, sigmas)?;
    let mass_g = infrared_fit(spec_g, fg.charged_sq, sigmas)?;

    let mut deriv: BTreeMap<String, Option<f64>> = BTreeMap::new();
    for (tag, spec, f) in [("F", spec_f, &ff), ("G", spec_g, &fg)] {
        let s2 = spec.scale * spec.scale;
        let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
        if spec.is_zero() {
            for key in ["d3", "d33", "grad", "d13"] {
                deriv.insert(format!("{tag}.{key}"), Some(0.0));
            }
            continue;
        }
        deriv.insert(
            format!("{tag}.d3"),
            finite(s2 * charged_derivative_sq(spec, ChargedDerivative::D3)? * f.neutral_sq),
        );
        deriv.insert(
            format!("{tag}.d33"),
            finite(s2 * charged_derivative_sq(spec, ChargedDerivative::D33)? * f.neutral_sq),
        );
        deriv.insert(
            format!("{tag}.grad"),
            finite(s2 * gradient_sq(spec)? * f.neutral_sq),
        );
        let mixed =
            refined_ball_integral(spec.extent(), &|q: &[f64; 3]| spec.neutral_d13(q).powi(2))?;
        deriv.insert(format!("{tag}.d13"), mixed.map(|v| s2 * f.charged_sq * v));
    }

    let exponent_ok =
        |fit: &InfraredFit| fit.exponent.map_or(true, |e| e >= 1.0) && fit.k.is_finite();
    let mut pass = BTreeMap::new();
    pass.insert(
        "l2".to_string(),
        norm(spec_f, &ff).is_finite() && norm(spec_g, &fg).is_finite(),
    );
    pass.insert("ir_weighted_f".to_string(), ir_f.is_some());
    pass.insert("ir_weighted_g".to_string(), ir_g.is_some());
    pass.insert("ir_mass_f".to_string(), exponent_ok(&mass_f));
    pass.insert("ir_mass_g".to_string(), exponent_ok(&mass_g));
    let ok = |k: &str| deriv.get(k).map_or(false, |v| v.is_some());
    pass.insert("d3".to_string(), ok("F.d3") && ok("G.d3"));
    pass.insert("d33".to_string(), ok("F.d33") && ok("G.d33"));
    pass.insert("gradient".to_string(), ok("F.grad") && ok("G.grad"));
    pass.insert("mixed_d13".to_string(), ok("F.d13") && ok("G.d13"));

    Ok(HypothesisReport {
        l2_norm_f: norm(spec_f, &ff),
        l2_norm_g: norm(spec_g, &fg),
        ir_weighted_f: ir_f,
        ir_weighted_g: ir_g,
        k_constant: mass_f.k.max(mass_g.k),
        ir_mass_f: mass_f,
        ir_mass_g: mass_g,
        deriv_norms: deriv,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qn(s: i8, n: u32, p1: f64, p3: f64) -> LandauQN {
        LandauQN::new(s, n, p1, p3).unwrap()
    }

    #[test]
    fn gaussian_at_origin_is_scale() {
        let k = KernelSpec::gaussian(0.7, 0, 2.5);
        assert_eq!(k.eval(&qn(-1, 0, 0.0, 0.0), &[0.0; 3]), C64::new(2.5, 0.0));
        assert_eq!(k.eval(&qn(-1, 1, 0.0, 0.0), &[0.0; 3]), C64::new(0.0, 0.0));
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let k = KernelSpec {
            family: KernelFamily::CompactBump,
            cutoff: 1.0,
            ..Default::default()
        };
        assert_eq!(k.eval(&qn(-1, 0, 0.8, 0.8), &[0.0; 3]).norm(), 0.0);
        assert_eq!(k.eval(&qn(-1, 0, 0.0, 0.0), &[0.0, 1.0, 0.1]).norm(), 0.0);
        assert!(k.eval(&qn(-1, 0, 0.1, 0.1), &[0.1, 0.0, 0.0]).norm() > 0.0);
    }

    #[test]
    fn gaussian_norm_matches_closed_form() {
        for spins in [vec![-1], vec![-1, 1]] {
            let k = KernelSpec {
                spins,
                width: 0.8,
                level_cap: 0,
                scale: 1.3,
                ..Default::default()
            };
            let got = l2_norm(&k).unwrap().powi(2);
            let want = gaussian_l2_norm_sq(&k);
            assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn analytic_and_finite_difference_derivatives_agree() {
        let k = KernelSpec::gaussian(0.9, 0, 1.0);
        let h = k.fd_step();
        for &(a, b) in &[(0.3, -0.2), (1.1, 0.7), (-0.5, 1.4)] {
            let d3 = k.charged_derivative(ChargedDerivative::D3, a, b);
            assert!((d3 - diff1(|x| k.charged_profile(a, x), b, h)).abs() < 1e-9);
            let d33 = k.charged_derivative(ChargedDerivative::D33, a, b);
            assert!((d33 - diff2(|x| k.charged_profile(a, x), b, h)).abs() < 1e-6);
            let q = [a, 0.2, b];
            let mixed = diff1(|x| diff1(|y| k.neutral(&[x, 0.2, y]), b, h), a, h);
            assert!((k.neutral_d13(&q) - mixed).abs() < 1e-7);
        }
    }

    #[test]
    fn gaussian_passes_everything() {
        let f = KernelSpec::gaussian(1.0, 0, 1.0);
        let g = KernelSpec::gaussian(0.8, 1, 0.5);
        let r = check_hypotheses(&f, &g, &[0.4, 0.2, 0.1, 0.05]).unwrap();
        assert!(r.pass.values().all(|p| *p), "{:?}", r.pass);
        let e = r.ir_mass_f.exponent.unwrap();
        assert!((e - 1.5).abs() < 0.05, "{e}");
        // int |F|^2/|q|^2 = ||charged||^2 * 2 pi^{3/2} w
        let want = PI * 1.0 * 2.0 * 2.0 * PI.powf(1.5);
        assert!((r.ir_weighted_f.unwrap() - want).abs() < 1e-8 * want);
    }

    #[test]
    fn counterexample_fails_infrared_weight() {
        let f = KernelSpec {
            family: KernelFamily::CounterexampleIr,
            ..Default::default()
        };
        let g = KernelSpec::gaussian(1.0, 0, 1.0);
        let r = check_hypotheses(&f, &g, &[0.4, 0.2, 0.1]).unwrap();
        assert_eq!(r.ir_weighted_f, None);
        assert!(!r.pass["ir_weighted_f"]);
        assert!(r.pass["ir_weighted_g"]);
        assert!(!r.pass["ir_mass_f"]);
    }

    #[test]
    fn zero_kernels_pass_with_zero_constant() {
        let r = check_hypotheses(&KernelSpec::zero(), &KernelSpec::zero(), &[0.2, 0.1]).unwrap();
        assert!(r.pass.values().all(|p| *p));
        assert_eq!(r.k_constant, 0.0);
        assert_eq!(r.l2_norm_f, 0.0);
        assert_eq!(r.ir_weighted_f, Some(0.0));
    }

    #[test]
    fn rejects_bad_sigmas() {
        let k = KernelSpec::default();
        assert!(check_hypotheses(&k, &k, &[0.1, 0.2]).is_err());
        assert!(check_hypotheses(&k, &k, &[]).is_err());
    }

    #[test]
    fn report_is_deterministic() {
        let f = KernelSpec::gaussian(1.0, 0, 1.0);
        let a = check_hypotheses(&f, &f, &[0.3, 0.1]).unwrap();
        let b = check_hypotheses(&f, &f, &[0.3, 0.1]).unwrap();
        assert_eq!(a, b);
    }
}
