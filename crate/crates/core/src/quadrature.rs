//! Gaussian quadrature rules.
//!
//! Nodes are located by Newton iteration on the orthonormal three-term
//! recurrences, so weights keep full relative accuracy even where they are
//! tiny (the outer Gauss-Hermite nodes carry weights near 1e-100 for a
//! 96-point rule, and the integrands used here are divided by the weight
//! function before summation).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A quadrature rule: `sum_i weights[i] * f(nodes[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX: usize = 100;

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::invalid(
            "Gauss-Legendre rule needs at least one node",
        ));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for iter in 0..NEWTON_MAX {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= NEWTON_TOL * z.abs().max(1.0) {
                dp = legendre_with_derivative(n, z).1;
                break;
            }
            if iter + 1 == NEWTON_MAX {
                return Err(Error::convergence(
                    "Gauss-Legendre node search",
                    format!("node {i} of {n}"),
                ));
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Rule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<Rule> {
    let base = gauss_legendre(n)?;
    Ok(map_to_interval(&base, a, b))
}

fn map_to_interval(base: &Rule, a: f64, b: f64) -> Rule {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Rule {
        nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
        weights: base.weights.iter().map(|w| half * w).collect(),
    }
}

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
pub fn composite_legendre(order: usize, panels: usize, a: f64, b: f64) -> Result<Rule> {
    if panels == 0 {
        return Err(Error::invalid("composite rule needs at least one panel"));
    }
    let base = gauss_legendre(order)?;
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let r = map_to_interval(&base, lo, lo + h);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok(Rule { nodes, weights })
}

/// Composite Gauss-Legendre on panels whose edges are given explicitly.
pub fn graded_legendre(order: usize, edges: &[f64]) -> Result<Rule> {
    if edges.len() < 2 {
        return Err(Error::invalid("graded rule needs at least two edges"));
    }
    let base = gauss_legendre(order)?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pair in edges.windows(2) {
        let r = map_to_interval(&base, pair[0], pair[1]);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok(Rule { nodes, weights })
}

/// Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
pub fn gauss_hermite(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::invalid("Gauss-Hermite rule needs at least one node"));
    }
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Asymptotic starting guesses, largest root first.
        let mut z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => nodes[n - 1] - 1.14 * nf.powf(0.426) / nodes[n - 1],
            2 => 1.86 * nodes[n - 2] - 0.86 * nodes[n - 1],
            3 => 1.91 * nodes[n - 3] - 0.91 * nodes[n - 2],
            _ => 2.0 * nodes[n - i] - nodes[n - i + 1],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..NEWTON_MAX {
            let (p, d) = hermite_orthonormal_with_derivative(n, z, pim4);
            pp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= NEWTON_TOL * z.abs().max(1.0) {
                pp = hermite_orthonormal_with_derivative(n, z, pim4).1;
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::convergence(
                "Gauss-Hermite node search",
                format!("node {i} of {n}"),
            ));
        }
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        let w = 2.0 / (pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Rule { nodes, weights })
}

/// Orthonormal Hermite polynomial (times pi^{-1/4} normalisation) and its
/// derivative, for the Newton step.
fn hermite_orthonormal_with_derivative(n: usize, x: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = x * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Equally spaced periodic trapezoid rule on `[0, 2 pi)`.
pub fn periodic_trapezoid(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::invalid("trapezoid rule needs at least one node"));
    }
    let h = 2.0 * PI / n as f64;
    Ok(Rule {
        nodes: (0..n).map(|k| h * k as f64).collect(),
        weights: vec![h; n],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(7).unwrap();
        for k in 0..14 {
            let exact = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            let got = r.integrate(|x| x.powi(k));
            assert!((got - exact).abs() < 1e-14, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn legendre_weights_sum_to_length() {
        for n in [1, 2, 5, 64, 200] {
            let r = gauss_legendre_on(n, -3.0, 5.0).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 8.0).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn hermite_moments() {
        // int x^{2k} exp(-x^2) dx = Gamma(k + 1/2)
        let r = gauss_hermite(20).unwrap();
        let mut gamma = PI.sqrt();
        for k in 0..20 {
            let got = r.integrate(|x| x.powi(2 * k));
            assert!(
                ((got - gamma) / gamma).abs() < 1e-12,
                "k={k}: {got} vs {gamma}"
            );
            gamma *= k as f64 + 0.5;
        }
    }

    #[test]
    fn hermite_large_rule_is_symmetric_and_sorted() {
        let r = gauss_hermite(96).unwrap();
        for i in 0..96 {
            assert!((r.nodes[i] + r.nodes[95 - i]).abs() < 1e-12);
            assert!((r.weights[i] - r.weights[95 - i]).abs() <= 1e-14 * r.weights[i]);
        }
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        let s: f64 = r.weights.iter().sum();
        assert!((s - PI.sqrt()).abs() < 1e-13);
        // Outer weight keeps relative accuracy: reproduce int exp(-x^2) x^60 dx
        let got = r.integrate(|x| x.powi(60));
        let mut exact = PI.sqrt();
        for k in 0..30 {
            exact *= k as f64 + 0.5;
        }
        assert!(((got - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn composite_matches_analytic() {
        let r = composite_legendre(10, 8, 0.0, 3.0).unwrap();
        let got = r.integrate(|x| (5.0 * x).sin());
        let exact = (1.0 - (15.0f64).cos()) / 5.0;
        assert!((got - exact).abs() < 1e-13);
    }

    #[test]
    fn rejects_empty_rules() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_hermite(0).is_err());
        assert!(composite_legendre(4, 0, 0.0, 1.0).is_err());
    }
}
