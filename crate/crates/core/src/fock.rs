//! Truncated fermionic Fock space over the globally ordered modes of the
//! five species.
//!
//! Basis state `s` has mode j occupied iff bit j of `s` is set. Creation on
//! mode j picks up the sign (-1)^(number of occupied modes below j), which
//! makes operators of different species anticommute.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grids::{GridSet, Species};
use crate::sparse::SparseMatrix;

/// Largest supported mode count (dimension 2^24).
pub const MAX_MODES: usize = 24;

/// Occupation bits of a basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OccupationState(pub u32);

impl OccupationState {
    pub fn occupied(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    /// Parity sign (-1)^(occupied modes below j).
    pub fn sign_below(self, j: usize) -> i32 {
        let mask = (1u32 << j) - 1;
        if (self.0 & mask).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// b_j^* acting on the state: `None` if mode j is already occupied.
    pub fn create(self, j: usize) -> Option<(i32, OccupationState)> {
        if self.occupied(j) {
            None
        } else {
            Some((self.sign_below(j), OccupationState(self.0 | 1 << j)))
        }
    }

    /// b_j acting on the state: `None` if mode j is empty.
    pub fn annihilate(self, j: usize) -> Option<(i32, OccupationState)> {
        if self.occupied(j) {
            Some((self.sign_below(j), OccupationState(self.0 & !(1 << j))))
        } else {
            None
        }
    }
}

/// A matrix on the Fock space together with a Hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: SparseMatrix,
    pub hermitian: bool,
}

impl FockOperator {
    pub fn new(matrix: SparseMatrix, hermitian: bool) -> Self {
        FockOperator { matrix, hermitian }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn adjoint(&self) -> Self {
        FockOperator::new(self.matrix.adjoint(), self.hermitian)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.matvec(v)
    }

    /// Checks the Hermiticity flag against the entries.
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.matrix.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(())
    }
}

/// Conserved charges (Q, L_e, L_mu) of a basis state.
pub type Charges = (i32, i32, i32);

#[derive(Debug, Clone)]
pub struct FockSpace {
    pub grids: GridSet,
    n_modes: usize,
    /// species of each global mode
    species: Vec<Species>,
}

impl FockSpace {
    pub fn new(grids: GridSet) -> Result<Self> {
        let n_modes = grids.total_modes();
        if n_modes > MAX_MODES {
            return Err(Error::invalid(format!(
                "{n_modes} modes exceed the supported maximum {MAX_MODES}"
            )));
        }
        let species = (0..n_modes)
            .map(|j| grids.locate(j).expect("mode in range").0)
            .collect();
        Ok(FockSpace {
            grids,
            n_modes,
            species,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_modes
    }

    pub fn species_of(&self, j: usize) -> Species {
        self.species[j]
    }

    pub fn global(&self, s: Species, k: usize) -> Result<usize> {
        self.grids.global(s, k)
    }

    pub fn creation(&self, s: Species, k: usize) -> Result<FockOperator> {
        Ok(creation_matrix(self.n_modes, self.global(s, k)?))
    }

    pub fn annihilation(&self, s: Species, k: usize) -> Result<FockOperator> {
        Ok(self.creation(s, k)?.adjoint())
    }

    pub fn creation_global(&self, j: usize) -> Result<FockOperator> {
        if j >= self.n_modes {
            return Err(Error::invalid(format!("mode {j} out of range")));
        }
        Ok(creation_matrix(self.n_modes, j))
    }

    pub fn annihilation_global(&self, j: usize) -> Result<FockOperator> {
        Ok(self.creation_global(j)?.adjoint())
    }

    pub fn vacuum(&self) -> Vec<C64> {
        vacuum(self.dim())
    }

    /// Number operator of global mode j.
    pub fn number(&self, j: usize) -> FockOperator {
        let diag: Vec<f64> = (0..self.dim())
            .map(|s| {
                if OccupationState(s as u32).occupied(j) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        FockOperator::new(SparseMatrix::diagonal(&diag), true)
    }

    /// Total number operator of one species.
    pub fn species_number(&self, sp: Species) -> FockOperator {
        let diag: Vec<f64> = (0..self.dim())
            .map(|s| self.species_count(OccupationState(s as u32), sp) as f64)
            .collect();
        FockOperator::new(SparseMatrix::diagonal(&diag), true)
    }

    pub fn species_count(&self, state: OccupationState, sp: Species) -> i32 {
        let off = self.grids.offset(sp);
        let len = self.grids.grid(sp).len();
        let mask = ((1u32 << len) - 1) << off;
        (state.0 & mask).count_ones() as i32
    }

    pub fn charges_of(&self, state: OccupationState) -> Charges {
        let n = |sp| self.species_count(state, sp);
        let (ne, nm, np, nb, nn) = (
            n(Species::Electron),
            n(Species::MuonMinus),
            n(Species::MuonPlus),
            n(Species::AntiNuE),
            n(Species::NuMu),
        );
        (ne + nm - np, ne - nb, nm - np + nn)
    }

    /// Diagonal operators Q, L_e, L_mu.
    pub fn charge_operators(&self) -> [FockOperator; 3] {
        let ch: Vec<Charges> = (0..self.dim())
            .map(|s| self.charges_of(OccupationState(s as u32)))
            .collect();
        let op = |f: fn(&Charges) -> i32| {
            let d: Vec<f64> = ch.iter().map(|c| f(c) as f64).collect();
            FockOperator::new(SparseMatrix::diagonal(&d), true)
        };
        [op(|c| c.0), op(|c| c.1), op(|c| c.2)]
    }

    /// Basis states grouped by charge, each list ascending.
    pub fn sectors(&self) -> BTreeMap<Charges, Vec<usize>> {
        let mut out: BTreeMap<Charges, Vec<usize>> = BTreeMap::new();
        for s in 0..self.dim() {
            out.entry(self.charges_of(OccupationState(s as u32)))
                .or_default()
                .push(s);
        }
        out
    }
}

fn creation_matrix(n_modes: usize, j: usize) -> FockOperator {
    let dim = 1usize << n_modes;
    let trip: Vec<(usize, usize, C64)> = (0..dim)
        .filter_map(|s| {
            OccupationState(s as u32)
                .create(j)
                .map(|(sign, t)| (t.0 as usize, s, C64::new(sign as f64, 0.0)))
        })
        .collect();
    FockOperator::new(
        SparseMatrix::from_triplets(dim, &trip).expect("indices in range"),
        false,
    )
}

/// The empty-occupation basis vector.
pub fn vacuum(dim: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[0] = C64::new(1.0, 0.0);
    v
}

/// Which anticommutator of the CAR table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarPair {
    /// {b_j, b_k^*} = delta_jk
    Mixed,
    /// {b_j, b_k} = 0
    Annihilators,
    /// {b_j^*, b_k^*} = 0
    Creators,
}

/// Applies {X_j, Y_k} to every basis state in integer arithmetic and returns
/// the largest deviation from the Kronecker target (0 when exact).
pub fn car_exact_deviation(n_modes: usize, pair: CarPair) -> i64 {
    let dim = 1usize << n_modes;
    let step = |create: bool, j: usize, s: OccupationState| {
        if create {
            s.create(j)
        } else {
            s.annihilate(j)
        }
    };
    let (cx, cy) = match pair {
        CarPair::Mixed => (false, true),
        CarPair::Annihilators => (false, false),
        CarPair::Creators => (true, true),
    };
    let mut worst = 0i64;
    for j in 0..n_modes {
        for k in 0..n_modes {
            for s in 0..dim {
                let s = OccupationState(s as u32);
                let mut out: BTreeMap<u32, i64> = BTreeMap::new();
                // X_j Y_k |s> + Y_k X_j |s>
                if let Some((a, t)) = step(cy, k, s) {
                    if let Some((b, u)) = step(cx, j, t) {
                        *out.entry(u.0).or_default() += (a * b) as i64;
                    }
                }
                if let Some((a, t)) = step(cx, j, s) {
                    if let Some((b, u)) = step(cy, k, t) {
                        *out.entry(u.0).or_default() += (a * b) as i64;
                    }
                }
                if pair == CarPair::Mixed && j == k {
                    *out.entry(s.0).or_default() -= 1;
                }
                worst = out.values().fold(worst, |w, v| w.max(v.abs()));
            }
        }
    }
    worst
}
