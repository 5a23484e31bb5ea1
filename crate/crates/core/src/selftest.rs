//! Invariant suite behind the `selftest` command: CAR table, Clifford
//! algebra and spinor normalisation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::dirac::{c_constant, clifford_deviation};
use crate::error::Result;
use crate::fock::{car_exact_deviation, CarPair, FockSpace};
use crate::landau::orthonormality_deviation;
use crate::neutrino::norm_deviation;
use crate::sparse::SparseMatrix;

pub const CAR_MODES: usize = 12;
pub const CAR_FLOAT_TOL: f64 = 1e-14;
pub const CLIFFORD_TOL: f64 = 1e-15;
pub const ORTHO_TOL: f64 = 1e-10;
pub const ORTHO_MAX_LEVEL: u32 = 8;
pub const ORTHO_NODES: usize = 64;
pub const NORM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    /// integer deviations for {b, b*}, {b, b}, {b*, b*} on `CAR_MODES` modes
    pub car_exact: [i64; 3],
    /// same table in floating point on the configured mode space
    pub car_float: f64,
    pub car_float_modes: usize,
    pub clifford: f64,
    pub c_constant: f64,
    pub orthonormality_electron: f64,
    pub orthonormality_muon: f64,
    pub neutrino_norms: f64,
    /// names of failed checks, empty on success
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Largest deviation of the floating-point anticommutator table on `space`.
pub fn car_float_deviation(space: &FockSpace) -> Result<f64> {
    let n = space.n_modes();
    let b = (0..n)
        .map(|j| space.annihilation_global(j).map(|o| o.matrix))
        .collect::<Result<Vec<_>>>()?;
    let bs: Vec<SparseMatrix> = b.iter().map(|m| m.adjoint()).collect();
    let id = SparseMatrix::identity(space.dim());
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let mixed = b[j].anticommutator(&bs[k]);
            let mixed = if j == k { mixed.sub(&id) } else { mixed };
            worst = worst
                .max(mixed.max_abs())
                .max(b[j].anticommutator(&b[k]).max_abs())
                .max(bs[j].anticommutator(&bs[k]).max_abs());
        }
    }
    Ok(worst)
}

pub fn run_selftest(config: &ModelConfig, samples: usize) -> Result<SelftestReport> {
    let car_exact = [CarPair::Mixed, CarPair::Annihilators, CarPair::Creators]
        .map(|p| car_exact_deviation(CAR_MODES, p));
    let space = FockSpace::new(config.grids()?)?;
    let car_float = car_float_deviation(&space)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let landau: Vec<(f64, f64)> = (0..samples)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    let momenta: Vec<[f64; 3]> = (0..samples)
        .map(|_| [0; 3].map(|_| rng.gen_range(-3.0..3.0)))
        .collect();
    let orthonormality_electron =
        orthonormality_deviation(&config.electron(), ORTHO_MAX_LEVEL, &landau, ORTHO_NODES)?;
    let orthonormality_muon =
        orthonormality_deviation(&config.muon(), ORTHO_MAX_LEVEL, &landau, ORTHO_NODES)?;
    let neutrino_norms = norm_deviation(&momenta)?;
    let clifford = clifford_deviation();
    let c = c_constant();

    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    check("car_exact", car_exact.iter().all(|d| *d == 0));
    check("car_float", car_float <= CAR_FLOAT_TOL);
    check("clifford", clifford <= CLIFFORD_TOL);
    check("c_constant", (c - 16.0).abs() <= 1e-12);
    check(
        "orthonormality_electron",
        orthonormality_electron <= ORTHO_TOL,
    );
    check("orthonormality_muon", orthonormality_muon <= ORTHO_TOL);
    check("neutrino_norms", neutrino_norms <= NORM_TOL);
    Ok(SelftestReport {
        car_exact,
        car_float,
        car_float_modes: space.n_modes(),
        clifford,
        c_constant: c,
        orthonormality_electron,
        orthonormality_muon,
        neutrino_norms,
        pass: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_selftest_passes() {
        let r = run_selftest(&ModelConfig::default(), 3).unwrap();
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(r.car_float_modes, 12);
    }
}
