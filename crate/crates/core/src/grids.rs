//! Finite quadrature grids over the one-particle quantum numbers.
//!
//! A continuum field b(xi) is replaced by unit-normalised discrete modes
//! b_k = sqrt(w_k)^{-1} int_{cell k} b(xi) dxi; every kernel or vertex sample
//! attached to a continuum leg is multiplied by sqrt(w_k), so that discrete
//! l^2 sums approximate L^2 integrals and the discrete CAR are exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landau::LandauQN;
use crate::neutrino::MomentumQN;
use crate::quadrature;

/// The five lepton species, listed in the global mode order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    #[serde(rename = "e")]
    Electron,
    #[serde(rename = "mu-")]
    MuonMinus,
    #[serde(rename = "mu+")]
    MuonPlus,
    #[serde(rename = "nubar-e")]
    AntiNuE,
    #[serde(rename = "nu-mu")]
    NuMu,
}

impl Species {
    pub const ALL: [Species; 5] = [
        Species::Electron,
        Species::MuonMinus,
        Species::MuonPlus,
        Species::AntiNuE,
        Species::NuMu,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_landau(self) -> bool {
        matches!(
            self,
            Species::Electron | Species::MuonMinus | Species::MuonPlus
        )
    }

    /// Spin label whose n = 0 spinor vanishes identically for this species.
    pub fn null_spin(self) -> Option<i8> {
        match self {
            Species::Electron | Species::MuonMinus => Some(1),
            Species::MuonPlus => Some(-1),
            _ => None,
        }
    }

    pub fn helicity(self) -> Option<f64> {
        match self {
            Species::AntiNuE => Some(0.5),
            Species::NuMu => Some(-0.5),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::Electron => "e",
            Species::MuonMinus => "mu-",
            Species::MuonPlus => "mu+",
            Species::AntiNuE => "nubar-e",
            Species::NuMu => "nu-mu",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuantumNumbers {
    Landau(LandauQN),
    Momentum(MomentumQN),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub qn: QuantumNumbers,
    pub weight: f64,
}

impl Mode {
    pub fn landau(&self) -> Option<&LandauQN> {
        match &self.qn {
            QuantumNumbers::Landau(q) => Some(q),
            QuantumNumbers::Momentum(_) => None,
        }
    }

    pub fn momentum(&self) -> Option<[f64; 3]> {
        match &self.qn {
            QuantumNumbers::Momentum(q) => Some(q.p),
            QuantumNumbers::Landau(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub species: Species,
    pub modes: Vec<Mode>,
}

impl ModeGrid {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    /// Landau quantum numbers of mode k; panics for neutrino grids.
    pub fn landau(&self, k: usize) -> &LandauQN {
        self.modes[k].landau().expect("Landau grid")
    }

    /// Momentum of mode k; panics for Landau grids.
    pub fn momentum(&self, k: usize) -> [f64; 3] {
        self.modes[k].momentum().expect("neutrino grid")
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.weight.sqrt()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandauGridSpec {
    pub n_levels: u32,
    pub spins: Vec<i8>,
    pub p1_nodes: usize,
    pub p3_nodes: usize,
    pub p_range: f64,
}

impl Default for LandauGridSpec {
    fn default() -> Self {
        LandauGridSpec {
            n_levels: 1,
            spins: vec![-1, 1],
            p1_nodes: 1,
            p3_nodes: 2,
            p_range: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeutrinoGridSpec {
    /// Gauss-Legendre node counts along p^1, p^2, p^3.
    pub nodes: [usize; 3],
    pub p_range: f64,
}

impl Default for NeutrinoGridSpec {
    fn default() -> Self {
        NeutrinoGridSpec {
            nodes: [2, 2, 1],
            p_range: 1.5,
        }
    }
}

/// Per-species grid parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpecs {
    pub electron: LandauGridSpec,
    pub muon_minus: LandauGridSpec,
    pub muon_plus: LandauGridSpec,
    pub antineutrino: NeutrinoGridSpec,
    pub neutrino: NeutrinoGridSpec,
}

impl Default for GridSpecs {
    fn default() -> Self {
        GridSpecs {
            electron: LandauGridSpec::default(),
            muon_minus: LandauGridSpec::default(),
            muon_plus: LandauGridSpec::default(),
            antineutrino: NeutrinoGridSpec {
                nodes: [1, 2, 1],
                p_range: 1.5,
            },
            neutrino: NeutrinoGridSpec::default(),
        }
    }
}

fn check_range(p_range: f64) -> Result<()> {
    if !(p_range > 0.0 && p_range.is_finite()) {
        return Err(Error::invalid(format!(
            "p_range must be positive, got {p_range}"
        )));
    }
    Ok(())
}

pub fn build_landau_grid(species: Species, spec: &LandauGridSpec) -> Result<ModeGrid> {
    if !species.is_landau() {
        return Err(Error::invalid(format!(
            "{species} is not a charged species"
        )));
    }
    if spec.n_levels == 0 || spec.p1_nodes == 0 || spec.p3_nodes == 0 {
        return Err(Error::invalid(
            "Landau grid needs n_levels, p1_nodes, p3_nodes >= 1",
        ));
    }
    if spec.spins.iter().any(|s| *s != 1 && *s != -1) {
        return Err(Error::invalid("spins must be +1 or -1"));
    }
    check_range(spec.p_range)?;
    let r1 = quadrature::gauss_legendre_on(spec.p1_nodes, -spec.p_range, spec.p_range)?;
    let r3 = quadrature::gauss_legendre_on(spec.p3_nodes, -spec.p_range, spec.p_range)?;
    let mut spins = spec.spins.clone();
    spins.sort_unstable();
    spins.dedup();
    let mut modes = Vec::new();
    for &s in &spins {
        for n in 0..spec.n_levels {
            if n == 0 && species.null_spin() == Some(s) {
                continue;
            }
            for (p1, w1) in r1.iter() {
                for (p3, w3) in r3.iter() {
                    modes.push(Mode {
                        qn: QuantumNumbers::Landau(LandauQN { s, n, p1, p3 }),
                        weight: w1 * w3,
                    });
                }
            }
        }
    }
    if modes.is_empty() {
        return Err(Error::invalid(format!("grid for {species} has no modes")));
    }
    Ok(ModeGrid { species, modes })
}

pub fn build_neutrino_grid(species: Species, spec: &NeutrinoGridSpec) -> Result<ModeGrid> {
    let helicity = species
        .helicity()
        .ok_or_else(|| Error::invalid(format!("{species} is not a neutrino species")))?;
    if spec.nodes.iter().any(|n| *n == 0) {
        return Err(Error::invalid(
            "neutrino grid needs at least one node per axis",
        ));
    }
    check_range(spec.p_range)?;
    let rules = spec
        .nodes
        .map(|n| quadrature::gauss_legendre_on(n, -spec.p_range, spec.p_range));
    let [rx, ry, rz] = rules;
    let (rx, ry, rz) = (rx?, ry?, rz?);
    let mut modes = Vec::new();
    for (x, wx) in rx.iter() {
        for (y, wy) in ry.iter() {
            for (z, wz) in rz.iter() {
                if x == 0.0 && y == 0.0 && z == 0.0 {
                    return Err(Error::invalid(
                        "neutrino grid has a node at p = 0 where helicity is undefined; use an even node count on some axis",
                    ));
                }
                modes.push(Mode {
                    qn: QuantumNumbers::Momentum(MomentumQN {
                        p: [x, y, z],
                        helicity,
                    }),
                    weight: wx * wy * wz,
                });
            }
        }
    }
    Ok(ModeGrid { species, modes })
}

/// Uniform grid: `n_levels` Landau levels (charged species, both spins) or
/// `p_nodes` Gauss-Legendre nodes per momentum axis on [-p_range, p_range].
pub fn build_grid(
    species: Species,
    n_levels: u32,
    p_nodes: usize,
    p_range: f64,
) -> Result<ModeGrid> {
    if species.is_landau() {
        build_landau_grid(
            species,
            &LandauGridSpec {
                n_levels,
                spins: vec![-1, 1],
                p1_nodes: p_nodes,
                p3_nodes: p_nodes,
                p_range,
            },
        )
    } else {
        build_neutrino_grid(
            species,
            &NeutrinoGridSpec {
                nodes: [p_nodes; 3],
                p_range,
            },
        )
    }
}

/// The five grids with their offsets in the global mode order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSet {
    pub grids: Vec<ModeGrid>,
    offsets: Vec<usize>,
}

impl GridSet {
    pub fn new(grids: [ModeGrid; 5]) -> Result<Self> {
        for (g, s) in grids.iter().zip(Species::ALL) {
            if g.species != s {
                return Err(Error::invalid(format!(
                    "grid slot for {s} holds {}",
                    g.species
                )));
            }
            if g.is_empty() {
                return Err(Error::invalid(format!("empty grid for {s}")));
            }
        }
        let mut offsets = Vec::with_capacity(6);
        let mut acc = 0;
        for g in &grids {
            offsets.push(acc);
            acc += g.len();
        }
        offsets.push(acc);
        Ok(GridSet {
            grids: grids.into(),
            offsets,
        })
    }

    pub fn from_specs(specs: &GridSpecs) -> Result<Self> {
        Self::new([
            build_landau_grid(Species::Electron, &specs.electron)?,
            build_landau_grid(Species::MuonMinus, &specs.muon_minus)?,
            build_landau_grid(Species::MuonPlus, &specs.muon_plus)?,
            build_neutrino_grid(Species::AntiNuE, &specs.antineutrino)?,
            build_neutrino_grid(Species::NuMu, &specs.neutrino)?,
        ])
    }

    pub fn grid(&self, s: Species) -> &ModeGrid {
        &self.grids[s.index()]
    }

    pub fn total_modes(&self) -> usize {
        self.offsets[5]
    }

    pub fn offset(&self, s: Species) -> usize {
        self.offsets[s.index()]
    }

    /// Global mode index of mode `k` of species `s`.
    pub fn global(&self, s: Species, k: usize) -> Result<usize> {
        if k >= self.grid(s).len() {
            return Err(Error::invalid(format!(
                "mode {k} out of range for {s} ({} modes)",
                self.grid(s).len()
            )));
        }
        Ok(self.offsets[s.index()] + k)
    }

    /// Species and local index of a global mode.
    pub fn locate(&self, global: usize) -> Option<(Species, usize)> {
        Species::ALL
            .into_iter()
            .find(|s| global >= self.offset(*s) && global < self.offsets[s.index() + 1])
            .map(|s| (s, global - self.offset(s)))
    }

    pub fn counts(&self) -> [usize; 5] {
        std::array::from_fn(|i| self.grids[i].len())
    }
}
