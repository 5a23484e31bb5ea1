//! The constant chain C -> M -> (a, b) -> g0 -> (a~, b~) and sampled checks
//! of the operator inequalities it implies on the truncated space.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::dirac::c_constant;
use crate::error::Result;
use crate::grids::Species;
use crate::hamiltonian::Model;
use crate::kernels::l2_norm;
use crate::spectral::{evolve, sectored_solve};

/// Margin below the critical coupling: g0 = (1 - eps) / a.
pub const G0_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub c: f64,
    pub m: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub a: f64,
    pub b: f64,
    /// `None` when both kernels vanish and every coupling is admissible.
    pub g0: Option<f64>,
    pub g0_infinite: bool,
    pub a_tilde: f64,
    pub b_tilde: f64,
    /// coupling used for H, and the inverted constants evaluated there
    pub g: f64,
    pub a_tilde_g: f64,
    pub b_tilde_g: f64,
}

impl BoundsReport {
    /// g0 as a number, +inf for vanishing kernels.
    pub fn g0_value(&self) -> f64 {
        self.g0.unwrap_or(f64::INFINITY)
    }
}

/// (a~, b~) = (1, g b) / (1 - g a), valid for g a < 1.
pub fn inverted_constants(a: f64, b: f64, g: f64) -> (f64, f64) {
    let d = 1.0 - g * a;
    (1.0 / d, g * b / d)
}

pub fn reduced_mass(m_e: f64, m_mu: f64) -> f64 {
    1.0 / (1.0 / m_e + 1.0 / m_mu)
}

pub fn compute_bounds(config: &ModelConfig) -> Result<BoundsReport> {
    let c = c_constant();
    let m = reduced_mass(config.physics.m_e, config.physics.m_mu);
    let norm_f = l2_norm(&config.kernel_f)?;
    let norm_g = l2_norm(&config.kernel_g)?;
    let a = 4.0 * (c / m) * norm_f * norm_g;
    let b = 2.0 * c * norm_f * norm_g;
    let g0 = (a > 0.0).then(|| (1.0 - G0_MARGIN) / a);
    let (a_tilde, b_tilde) = match g0 {
        Some(g0) => inverted_constants(a, b, g0),
        None => (1.0, 0.0),
    };
    let g = config.coupling(g0.unwrap_or(f64::INFINITY));
    let (a_tilde_g, b_tilde_g) = inverted_constants(a, b, g);
    Ok(BoundsReport {
        c,
        m,
        norm_f,
        norm_g,
        a,
        b,
        g0,
        g0_infinite: g0.is_none(),
        a_tilde,
        b_tilde,
        g,
        a_tilde_g,
        b_tilde_g,
    })
}

/// Relative residuals of every defining identity of the constant chain.
pub fn identity_residuals(r: &BoundsReport, m_e: f64, m_mu: f64) -> Vec<(&'static str, f64)> {
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
    let ff = r.norm_f * r.norm_g;
    let mut out = vec![
        (
            "1/M = 1/m_e + 1/m_mu",
            rel(1.0 / r.m, 1.0 / m_e + 1.0 / m_mu),
        ),
        (
            "a = 4 (C/M) |F| |G|",
            if ff > 0.0 {
                rel(r.a, 4.0 * r.c / r.m * ff)
            } else {
                r.a.abs()
            },
        ),
        (
            "b = 2 C |F| |G|",
            if ff > 0.0 {
                rel(r.b, 2.0 * r.c * ff)
            } else {
                r.b.abs()
            },
        ),
    ];
    if let Some(g0) = r.g0 {
        out.push(("g0 a = 1 - eps", rel(g0 * r.a, 1.0 - G0_MARGIN)));
        out.push(("a~ (1 - g0 a) = 1", rel(r.a_tilde * (1.0 - g0 * r.a), 1.0)));
        out.push(("b~ = g0 b a~", rel(r.b_tilde, g0 * r.b * r.a_tilde)));
    }
    out.push((
        "a~(g) (1 - g a) = 1",
        rel(r.a_tilde_g * (1.0 - r.g * r.a), 1.0),
    ));
    out.push((
        "b~(g) = g b a~(g)",
        if r.g > 0.0 {
            rel(r.b_tilde_g, r.g * r.b * r.a_tilde_g)
        } else {
            r.b_tilde_g.abs()
        },
    ));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub inequality: String,
    pub sample: usize,
    pub ratio: f64,
    /// digest of the configuration that reproduces the offending vector
    pub config_digest: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeBoundCheck {
    pub samples: usize,
    /// max |H_I phi| / (a |H_0 phi| + b |phi|)
    pub empirical_max_ratio: f64,
    /// max |H_0 psi| / (a~ |H psi| + b~ |psi|) at the working coupling
    pub inverted_max_ratio: f64,
    /// max of m_e |(N_e + 1)^{1/2} e^{-itH} psi| / (a~ |H psi| + (b~ + m_e) |psi|)
    pub number_max_ratio: f64,
    pub number_samples: usize,
    pub times: Vec<f64>,
    /// |H_I Omega|, which must not exceed b
    pub vacuum_hi_norm: f64,
    pub violations: Vec<Violation>,
    pub pass: bool,
}

/// Sample vectors used for the time-dependent number-operator bound.
pub const NUMBER_SAMPLES: usize = 32;

fn random_unit(dim: usize, seed: u64, index: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            C64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        })
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Draws complex Gaussian unit vectors (stream i of a ChaCha8 generator
/// seeded with `seed` for sample i) and evaluates the relative bound, the
/// inverted bound and the number-operator bound.
pub fn verify_relative_bound(
    model: &Model,
    report: &BoundsReport,
    n_samples: usize,
    seed: u64,
) -> Result<RelativeBoundCheck> {
    let dim = model.space.dim();
    let g = report.g;
    let h = model.total(g, report.g0);
    let h0 = &model.h0.matrix;
    let hi = &model.hi.matrix;
    let digest = model.config.digest();

    let rows: Vec<(f64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let phi = random_unit(dim, seed, i);
            let n_h0 = norm(&h0.matvec(&phi));
            let n_hi = norm(&hi.matvec(&phi));
            let n_h = norm(&h.matrix.matvec(&phi));
            let rel = n_hi / (report.a * n_h0 + report.b);
            let inv = n_h0 / (report.a_tilde_g * n_h + report.b_tilde_g);
            (if rel.is_nan() { 0.0 } else { rel }, inv)
        })
        .collect();

    let m_e = model.config.physics.m_e;
    let times = model.config.bounds.times.clone();
    let number_samples = n_samples.min(NUMBER_SAMPLES);
    let electrons: Vec<f64> = (0..dim)
        .map(|s| {
            let st = crate::fock::OccupationState(s as u32);
            model.space.species_count(st, Species::Electron) as f64 + 1.0
        })
        .collect();
    let mut number_ratios = Vec::new();
    if number_samples > 0 && !times.is_empty() {
        let sectors = sectored_solve(model, &h)?;
        number_ratios = (0..number_samples)
            .into_par_iter()
            .map(|i| {
                let psi = random_unit(dim, seed, i);
                let n_h = norm(&h.matrix.matvec(&psi));
                let rhs = report.a_tilde_g * n_h + report.b_tilde_g + m_e;
                times
                    .iter()
                    .map(|t| {
                        let ev = evolve(&sectors, &psi, *t);
                        let lhs = ev
                            .iter()
                            .zip(&electrons)
                            .map(|(x, n)| x.norm_sqr() * n)
                            .sum::<f64>()
                            .sqrt()
                            * m_e;
                        (i, lhs / rhs)
                    })
                    .collect::<Vec<_>>()
            })
            .flatten()
            .collect();
    }

    let mut violations = Vec::new();
    let mut push = |name: &str, i: usize, r: f64| {
        if r > 1.0 {
            violations.push(Violation {
                inequality: name.to_string(),
                sample: i,
                ratio: r,
                config_digest: digest.clone(),
                seed,
            });
        }
    };
    for (i, (rel, inv)) in rows.iter().enumerate() {
        push("relative", i, *rel);
        push("inverted", i, *inv);
    }
    for (i, r) in &number_ratios {
        push("number", *i, *r);
    }
    let vacuum_hi_norm = norm(&hi.matvec(&model.space.vacuum()));
    if vacuum_hi_norm > report.b {
        push("vacuum", 0, vacuum_hi_norm / report.b);
    }
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    Ok(RelativeBoundCheck {
        samples: n_samples,
        empirical_max_ratio: max(&mut rows.iter().map(|r| r.0)),
        inverted_max_ratio: max(&mut rows.iter().map(|r| r.1)),
        number_max_ratio: max(&mut number_ratios.iter().map(|r| r.1)),
        number_samples,
        times,
        vacuum_hi_norm,
        pass: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;

    #[test]
    fn reduced_mass_examples() {
        assert_eq!(reduced_mass(2.0, 2.0), 1.0);
    }

    #[test]
    fn chain_from_unit_norms() {
        let (c, m, f, g) = (16.0, 1.0, 1.0, 1.0);
        let a = 4.0 * c / m * f * g;
        let b = 2.0 * c * f * g;
        assert_eq!((a, b), (64.0, 32.0));
        let g0 = (1.0 - G0_MARGIN) / a;
        assert!((g0 - 1.0 / 64.0).abs() < 1e-7);
        assert_eq!(inverted_constants(a, b, 0.0), (1.0, 0.0));
    }

    #[test]
    fn default_chain_identities() {
        let cfg = ModelConfig::default();
        let r = compute_bounds(&cfg).unwrap();
        for (name, d) in identity_residuals(&r, cfg.physics.m_e, cfg.physics.m_mu) {
            assert!(d <= 1e-12, "{name}: {d:e}");
        }
        assert!(r.g0.unwrap() * r.a < 1.0);
    }

    #[test]
    fn doubling_f_halves_g0() {
        let cfg = ModelConfig::default();
        let mut doubled = cfg.clone();
        doubled.kernel_f.scale *= 2.0;
        let a = compute_bounds(&cfg).unwrap().g0.unwrap();
        let b = compute_bounds(&doubled).unwrap().g0.unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_kernels_give_infinite_threshold() {
        let mut cfg = ModelConfig::default();
        cfg.kernel_f = KernelSpec::zero();
        let r = compute_bounds(&cfg).unwrap();
        assert!(r.g0_infinite);
        assert_eq!(r.g0_value(), f64::INFINITY);
        assert_eq!(r.g, 0.0);
    }

    #[test]
    fn sampled_bounds_are_deterministic() {
        let cfg = ModelConfig::default();
        let model = Model::build(&cfg).unwrap();
        let r = compute_bounds(&cfg).unwrap();
        let a = verify_relative_bound(&model, &r, 20, 5).unwrap();
        let b = verify_relative_bound(&model, &r, 20, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.pass, "{a:?}");
        assert!(a.vacuum_hi_norm <= r.b);
    }
}
