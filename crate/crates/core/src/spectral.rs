//! Low spectrum of H: dense and Krylov eigensolvers, per-sector solves,
//! ground-state diagnostics and the second-order perturbative oracle.

use std::collections::BTreeMap;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::{Mat, Par};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SpectralConfig;
use crate::error::{Error, Result};
use crate::fock::{Charges, FockOperator};
use crate::hamiltonian::Model;
use crate::landau;
use crate::sparse::SparseMatrix;

/// Hermiticity tolerance applied before any solve.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Full eigendecomposition of a dense Hermitian matrix, ascending.
/// Runs sequentially so results are reproducible bit for bit.
pub fn dense_eigh(a: &Mat<C64>, vectors: bool) -> Result<(Vec<f64>, Option<Mat<C64>>)> {
    let n = a.nrows();
    let mut s = faer::diag::Diag::<C64>::zeros(n);
    let mut u = if vectors {
        Some(Mat::<C64>::zeros(n, n))
    } else {
        None
    };
    let compute = if vectors {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    let par = Par::Seq;
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<C64>(
        n,
        compute,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a.as_ref(),
        s.as_mut(),
        u.as_mut().map(|u| u.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::convergence("dense eigensolver", format!("{e:?}")))?;
    let values = s.column_vector().iter().map(|x| x.re).collect();
    Ok((values, u))
}

pub fn to_faer(m: &SparseMatrix) -> Mat<C64> {
    let mut a = Mat::<C64>::zeros(m.dim(), m.dim());
    for (i, j, v) in m.triplets() {
        a[(i, j)] = v;
    }
    a
}

/// Eigenpairs with eigenvectors stored as plain vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl Eigen {
    /// max_i ||H v_i - lambda_i v_i|| / (1 + |lambda_i|)
    pub fn max_scaled_residual(&self, h: &SparseMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(l, v)| residual(h, *l, v) / (1.0 + l.abs()))
            .fold(0.0, f64::max)
    }
}

pub fn residual(h: &SparseMatrix, lambda: f64, v: &[C64]) -> f64 {
    let hv = h.matvec(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Dense,
    Krylov,
    /// dense up to the configured limit, Krylov above
    Auto,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [C64], basis: &[Vec<C64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Lowest eigenpair of H restricted to the complement of `locked`, by
/// Lanczos with full reorthogonalisation.
fn lanczos_lowest(
    h: &SparseMatrix,
    locked: &[Vec<C64>],
    tol: f64,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<C64>)> {
    let n = h.dim();
    let free = n - locked.len();
    let mut q: Vec<C64> = (0..n)
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    orthogonalize(&mut q, locked);
    let nq = norm(&q);
    q.iter_mut().for_each(|x| *x /= nq);
    let mut basis: Vec<Vec<C64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let limit = max_iter.min(free);
    loop {
        let j = basis.len() - 1;
        let mut w = h.matvec(&basis[j]);
        alpha.push(dot(&basis[j], &w).re);
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = alpha.len();
        let exhausted = b <= 1e-14 * (1.0 + alpha.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        if m % 8 == 0 || m == limit || exhausted {
            let mut t = Mat::<C64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = C64::new(alpha[i], 0.0);
                if i + 1 < m {
                    t[(i, i + 1)] = C64::new(beta[i], 0.0);
                    t[(i + 1, i)] = C64::new(beta[i], 0.0);
                }
            }
            let (vals, vecs) = dense_eigh(&t, true)?;
            let y = vecs.expect("vectors");
            let lambda = vals[0];
            let estimate = b * y[(m - 1, 0)].norm();
            if exhausted || estimate <= 0.1 * tol * (1.0 + lambda.abs()) || m == limit {
                let mut v = vec![C64::new(0.0, 0.0); n];
                for (i, qi) in basis.iter().enumerate() {
                    let c = y[(i, 0)];
                    v.iter_mut().zip(qi).for_each(|(x, q)| *x += c * q);
                }
                orthogonalize(&mut v, locked);
                let nv = norm(&v);
                v.iter_mut().for_each(|x| *x /= nv);
                let hv = h.matvec(&v);
                let rq = dot(&v, &hv).re;
                let r = residual(h, rq, &v);
                if r <= tol * (1.0 + rq.abs()) {
                    return Ok((rq, v));
                }
                if exhausted || m == limit {
                    return Err(Error::convergence(
                        "Lanczos",
                        format!("{m} iterations, residual {r:e} at eigenvalue {rq}"),
                    ));
                }
            }
        }
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
}

/// The k lowest eigenpairs by Lanczos with explicit locking of converged
/// vectors; degenerate levels are found one copy at a time.
pub fn krylov_eigh(
    h: &SparseMatrix,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<Eigen> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let (l, v) = lanczos_lowest(h, &vectors, tol, max_iter, &mut rng)?;
        values.push(l);
        vectors.push(v);
    }
    // locking can return levels slightly out of order when they are close
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    Ok(Eigen {
        values: order.iter().map(|i| values[*i]).collect(),
        vectors: order.iter().map(|i| vectors[*i].clone()).collect(),
    })
}

/// The k smallest eigenpairs of a Hermitian operator.
pub fn eigensolve(
    h: &FockOperator,
    k: usize,
    cfg: &SpectralConfig,
    solver: Solver,
    seed: u64,
) -> Result<Eigen> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::invalid(format!("k = {k} outside 1..={dim}")));
    }
    h.check_hermitian(HERMITIAN_TOL)?;
    let dense = match solver {
        Solver::Dense => true,
        Solver::Krylov => false,
        Solver::Auto => dim <= cfg.dense_limit,
    };
    if dense {
        let (values, u) = dense_eigh(&to_faer(&h.matrix), true)?;
        let u = u.expect("vectors");
        Ok(Eigen {
            values: values[..k].to_vec(),
            vectors: (0..k)
                .map(|c| (0..dim).map(|r| u[(r, c)]).collect())
                .collect(),
        })
    } else {
        krylov_eigh(&h.matrix, k, cfg.residual_tol, cfg.krylov_max_iter, seed)
    }
}

/// Eigendecomposition of one charge sector.
#[derive(Debug, Clone)]
pub struct SectorSolution {
    pub charges: Charges,
    /// basis states of the sector, ascending
    pub states: Vec<usize>,
    pub values: Vec<f64>,
    /// columns are eigenvectors in the sector basis
    pub vectors: Mat<C64>,
}

impl SectorSolution {
    /// e^{-i t H} restricted to this sector, applied to the sector part of psi.
    pub fn evolve_into(&self, psi: &[C64], t: f64, out: &mut [C64]) {
        let d = self.states.len();
        let local: Vec<C64> = self.states.iter().map(|s| psi[*s]).collect();
        let mut coef = vec![C64::new(0.0, 0.0); d];
        for (c, slot) in coef.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                acc += self.vectors[(r, c)].conj() * local[r];
            }
            *slot = acc * C64::from_polar(1.0, -t * self.values[c]);
        }
        for (r, s) in self.states.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, x) in coef.iter().enumerate() {
                acc += self.vectors[(r, c)] * x;
            }
            out[*s] = acc;
        }
    }
}

/// Solves every (Q, L_e, L_mu) block of H densely, in parallel; ordered by
/// charge key.
pub fn sectored_solve(model: &Model, h: &FockOperator) -> Result<Vec<SectorSolution>> {
    h.check_hermitian(HERMITIAN_TOL)?;
    let sectors: Vec<(Charges, Vec<usize>)> = model.space.sectors().into_iter().collect();
    sectors
        .into_par_iter()
        .map(|(charges, states)| {
            let block = h.matrix.principal_block(&states);
            let (values, u) = dense_eigh(&to_faer(&block), true)?;
            Ok(SectorSolution {
                charges,
                states,
                values,
                vectors: u.expect("vectors"),
            })
        })
        .collect()
}

/// Sorted union of all sector eigenvalues.
pub fn sector_union(solutions: &[SectorSolution]) -> Vec<f64> {
    let mut all: Vec<f64> = solutions
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .collect();
    all.sort_by(f64::total_cmp);
    all
}

/// Evolves psi by e^{-i t H} using the sector decomposition.
pub fn evolve(solutions: &[SectorSolution], psi: &[C64], t: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for s in solutions {
        s.evolve_into(psi, t, &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowLevel {
    pub index: usize,
    pub eigenvalue: f64,
    pub charges: Charges,
    pub vacuum_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub g: f64,
    pub e: f64,
    /// E refined by the Rayleigh quotient split into H_0 and H_I parts
    pub e_rayleigh: f64,
    pub gap: f64,
    pub vacuum_overlap: f64,
    pub unique: bool,
    pub low_spectrum: Vec<f64>,
    pub low_levels: Vec<LowLevel>,
    pub thresholds: Vec<f64>,
    pub max_residual: f64,
    /// second-order coefficient S_2, so that E ~ -g^2 S_2
    pub s2: f64,
}

/// S_2 = sum_{n != vacuum} |<n|H_I|vacuum>|^2 / lambda_n over the free
/// eigenbasis, which is the occupation basis.
pub fn second_order_s2(model: &Model) -> f64 {
    let col: Vec<(usize, C64)> = (0..model.space.dim())
        .filter_map(|s| {
            let v = model.hi.matrix.get(s, 0);
            (s != 0 && v != C64::new(0.0, 0.0)).then_some((s, v))
        })
        .collect();
    col.iter()
        .map(|(s, v)| v.norm_sqr() / model.h0_diag[*s])
        .sum()
}

/// <v, H v> / <v, v> with H_0 and H_I accumulated separately so that a
/// small E is not swamped by rounding in large diagonal entries.
pub fn rayleigh_energy(model: &Model, g: f64, v: &[C64]) -> f64 {
    let nn: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let e0: f64 = v
        .iter()
        .zip(&model.h0_diag)
        .map(|(x, w)| x.norm_sqr() * w)
        .sum();
    let ei = dot(v, &model.hi.matrix.matvec(v)).re;
    (e0 + g * ei) / nn
}

pub fn ground_state_report(model: &Model, g: f64, g0: Option<f64>) -> Result<SpectralReport> {
    let h = model.total(g, g0);
    let solutions = sectored_solve(model, &h)?;
    let mut levels: Vec<(f64, usize, usize)> = Vec::new();
    for (si, s) in solutions.iter().enumerate() {
        for (c, l) in s.values.iter().enumerate() {
            levels.push((*l, si, c));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let k = model.config.spectral.k.min(levels.len());
    let mut low_levels = Vec::with_capacity(k);
    let mut max_residual: f64 = 0.0;
    let full = |si: usize, c: usize| -> Vec<C64> {
        let s = &solutions[si];
        let mut v = vec![C64::new(0.0, 0.0); model.space.dim()];
        for (r, st) in s.states.iter().enumerate() {
            v[*st] = s.vectors[(r, c)];
        }
        v
    };
    for (index, (l, si, c)) in levels.iter().take(k).enumerate() {
        let v = full(*si, *c);
        max_residual = max_residual.max(residual(&h.matrix, *l, &v) / (1.0 + l.abs()));
        low_levels.push(LowLevel {
            index,
            eigenvalue: *l,
            charges: solutions[*si].charges,
            vacuum_overlap: v[0].norm(),
        });
    }
    let (e, gsi, gc) = levels[0];
    let ground = full(gsi, gc);
    let gap = if levels.len() > 1 {
        levels[1].0 - e
    } else {
        f64::INFINITY
    };
    let tol = model.config.spectral.residual_tol;
    let thresholds = landau::thresholds(
        &model.config.electron(),
        &model.config.muon(),
        model
            .config
            .grid
            .electron
            .n_levels
            .max(model.config.grid.muon_minus.n_levels)
            - 1,
    );
    Ok(SpectralReport {
        g,
        e,
        e_rayleigh: rayleigh_energy(model, g, &ground),
        gap,
        vacuum_overlap: ground[0].norm().min(1.0),
        unique: gap > 10.0 * tol * (1.0 + e.abs()),
        low_spectrum: low_levels.iter().map(|l| l.eigenvalue).collect(),
        low_levels,
        thresholds,
        max_residual,
        s2: second_order_s2(model),
    })
}

/// Per-sector low spectra keyed by charges, as reported by the CLI.
pub fn sector_spectra(solutions: &[SectorSolution], k: usize) -> BTreeMap<String, Vec<f64>> {
    solutions
        .iter()
        .map(|s| {
            let (q, le, lm) = s.charges;
            (
                format!("{q},{le},{lm}"),
                s.values.iter().take(k).copied().collect(),
            )
        })
        .collect()
}

/// Eigenvalues of the full matrix, ascending, without eigenvectors.
pub fn full_spectrum(h: &FockOperator) -> Result<Vec<f64>> {
    h.check_hermitian(HERMITIAN_TOL)?;
    Ok(dense_eigh(&to_faer(&h.matrix), false)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;

    fn random_hermitian(dim: usize, density: f64, seed: u64) -> SparseMatrix {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..dim {
            t.push((i, i, C64::new(rng.gen_range(-1.0..1.0) * 3.0, 0.0)));
            for j in i + 1..dim {
                if rng.gen::<f64>() < density {
                    let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    t.push((i, j, v));
                    t.push((j, i, v.conj()));
                }
            }
        }
        SparseMatrix::from_triplets(dim, &t).unwrap()
    }

    #[test]
    fn diagonal_matrix_exact() {
        let d = [3.0, -1.0, 2.0, 0.5];
        let h = FockOperator::new(SparseMatrix::diagonal(&d), true);
        let e = eigensolve(&h, 4, &SpectralConfig::default(), Solver::Dense, 1).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn dense_and_krylov_agree_on_dim_1024() {
        let m = random_hermitian(1024, 0.004, 7);
        let h = FockOperator::new(m, true);
        let cfg = SpectralConfig::default();
        let d = eigensolve(&h, 6, &cfg, Solver::Dense, 1).unwrap();
        let k = eigensolve(&h, 6, &cfg, Solver::Krylov, 1).unwrap();
        for (a, b) in d.values.iter().zip(&k.values) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(d.max_scaled_residual(&h.matrix) <= 1e-9);
        assert!(k.max_scaled_residual(&h.matrix) <= 1e-9);
    }

    #[test]
    fn krylov_finds_degenerate_levels() {
        let d: Vec<f64> = (0..200).map(|i| (i / 3) as f64).collect();
        let h = SparseMatrix::diagonal(&d);
        let e = krylov_eigh(&h, 5, 1e-10, 300, 3).unwrap();
        assert_eq!(e.values.len(), 5);
        for (l, want) in e.values.iter().zip([0.0, 0.0, 0.0, 1.0, 1.0]) {
            assert!((l - want).abs() < 1e-9, "{:?}", e.values);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = SparseMatrix::from_triplets(2, &[(0, 1, C64::new(1.0, 0.0))]).unwrap();
        let h = FockOperator::new(m, false);
        assert!(eigensolve(&h, 1, &SpectralConfig::default(), Solver::Dense, 0).is_err());
    }

    #[test]
    fn free_ground_state_is_vacuum() {
        let model = Model::build(&ModelConfig::default()).unwrap();
        let r = ground_state_report(&model, 0.0, None).unwrap();
        assert_eq!(r.e, 0.0);
        assert!((r.vacuum_overlap - 1.0).abs() < 1e-12);
        assert!(r.unique);
    }

    #[test]
    fn evolution_is_unitary_and_reversible() {
        let model = Model::build(&ModelConfig::default()).unwrap();
        let h = model.total(0.01, None);
        let sol = sectored_solve(&model, &h).unwrap();
        let psi: Vec<C64> = (0..model.space.dim())
            .map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let a = evolve(&sol, &psi, 1.7);
        assert!((norm(&a) - norm(&psi)).abs() < 1e-10 * norm(&psi));
        let back = evolve(&sol, &a, -1.7);
        let err: f64 = back
            .iter()
            .zip(&psi)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn one_muon_sector_dimension() {
        let model = Model::build(&ModelConfig::default()).unwrap();
        let sectors = model.space.sectors();
        let counts = model.space.grids.counts();
        // enumerate states with Q = 1, L_e = 0, L_mu = 1 by brute force
        let mut n = 0;
        for s in 0..model.space.dim() {
            if model
                .space
                .charges_of(crate::fock::OccupationState(s as u32))
                == (1, 0, 1)
            {
                n += 1;
            }
        }
        assert_eq!(sectors[&(1, 0, 1)].len(), n);
        assert!(n >= counts[1]);
    }
}
