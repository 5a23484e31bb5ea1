//! Assembly of H_0, the quartic interaction H_I = H1 + H1* + H2 + H2* and
//! H = H_0 + g H_I on the truncated Fock space.

use std::path::Path;

use log::warn;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::dirac::{vertex_contract, Spinor4};
use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockSpace, OccupationState};
use crate::grids::Species;
use crate::landau::{self, energy_unchecked, LandauQN, ParticleParams};
use crate::neutrino::{norm3, spinor_u_numu, spinor_w_nubar_e};
use crate::sparse::SparseMatrix;

/// Which vertex integral: the muon leg is U (decay term), W (pair-creation
/// term), or the conjugated decay structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Decay,
    Creation,
    DecayConjugate,
}

/// Phase wavenumber r^2: the 2-component of p_3 + p_4.
pub fn phase_wavenumber(p3: &[f64; 3], p4: &[f64; 3]) -> f64 {
    p3[1] + p4[1]
}

struct VertexLegs {
    e: ParticleParams,
    mu: ParticleParams,
    xi1: LandauQN,
    xi2: LandauQN,
    nu: Spinor4,
    nubar: Spinor4,
    r2: f64,
    variant: Variant,
}

impl VertexLegs {
    fn integrand(&self, x2: f64) -> C64 {
        let ue = landau::spinor_u(&self.e, &self.xi1, x2);
        match self.variant {
            Variant::Decay => {
                let um = landau::spinor_u(&self.mu, &self.xi2, x2);
                C64::from_polar(1.0, -x2 * self.r2)
                    * vertex_contract(&self.nu, &um, &ue, &self.nubar)
            }
            Variant::Creation => {
                let wm = landau::spinor_w_mu(&self.mu, &self.xi2, x2);
                C64::from_polar(1.0, -x2 * self.r2)
                    * vertex_contract(&self.nu, &wm, &ue, &self.nubar)
            }
            Variant::DecayConjugate => {
                let um = landau::spinor_u(&self.mu, &self.xi2, x2);
                C64::from_polar(1.0, x2 * self.r2)
                    * vertex_contract(&self.nubar, &ue, &um, &self.nu)
            }
        }
    }

    /// Midpoint of the two orbit centres, where the Gaussian envelope of the
    /// product of Hermite functions peaks.
    fn centre(&self) -> f64 {
        let ce = self.xi1.p1 / self.e.eb;
        let cm = match self.variant {
            Variant::Creation => -self.xi2.p1 / self.mu.eb,
            _ => self.xi2.p1 / self.mu.eb,
        };
        0.5 * (ce + cm)
    }

    fn quadrature(&self, nodes: usize) -> Result<(C64, f64)> {
        let rule = landau::x2_rule(self.e.eb, self.centre(), nodes)?;
        let mut acc = C64::new(0.0, 0.0);
        let mut l1 = 0.0;
        for (x, w) in rule.iter() {
            let v = self.integrand(x);
            acc += v * w;
            l1 += v.norm() * w;
        }
        Ok((acc, l1))
    }
}

/// The x^2 vertex integral for one quadruple of quantum numbers.
#[allow(clippy::too_many_arguments)]
pub fn vertex_integral_with(
    e: &ParticleParams,
    mu: &ParticleParams,
    xi1: &LandauQN,
    xi2: &LandauQN,
    p3: &[f64; 3],
    p4: &[f64; 3],
    variant: Variant,
    nodes: usize,
    tol: f64,
) -> Result<C64> {
    let legs = VertexLegs {
        e: *e,
        mu: *mu,
        xi1: *xi1,
        xi2: *xi2,
        nu: spinor_u_numu(p4)?,
        nubar: spinor_w_nubar_e(p3)?,
        r2: phase_wavenumber(p3, p4),
        variant,
    };
    let (coarse, _) = legs.quadrature(nodes)?;
    let (fine, l1) = legs.quadrature(2 * nodes)?;
    let diff = (fine - coarse).norm();
    let scale = fine.norm().max(1e-12 * l1);
    if diff > tol * scale {
        return Err(Error::convergence(
            "vertex integral",
            format!(
                "{nodes} vs {} nodes differ by {diff:e} (relative {:e}) at xi1={xi1:?}, xi2={xi2:?}, p3={p3:?}, p4={p4:?}",
                2 * nodes,
                diff / scale.max(f64::MIN_POSITIVE)
            ),
        ));
    }
    Ok(fine)
}

/// Vertex integral with the quadrature settings of `config`.
pub fn vertex_integral(
    config: &ModelConfig,
    xi1: &LandauQN,
    xi2: &LandauQN,
    p3: &[f64; 3],
    p4: &[f64; 3],
    variant: Variant,
) -> Result<C64> {
    vertex_integral_with(
        &config.electron(),
        &config.muon(),
        xi1,
        xi2,
        p3,
        p4,
        variant,
        config.quadrature.x2_nodes,
        config.quadrature.vertex_tol,
    )
}

/// Raw vertex integrals over all mode quadruples, index order
/// [k1 (e)][k2 (mu)][k3 (nubar)][k4 (nu)].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexTable {
    pub digest: String,
    /// dims of amp1: electron, mu-, nubar, nu
    pub dims1: [usize; 4],
    /// dims of amp2: electron, mu+, nubar, nu
    pub dims2: [usize; 4],
    pub amp1: Vec<C64>,
    pub amp2: Vec<C64>,
}

pub fn flat_index(dims: &[usize; 4], k: [usize; 4]) -> usize {
    ((k[0] * dims[1] + k[1]) * dims[2] + k[2]) * dims[3] + k[3]
}

fn quadruples(dims: [usize; 4]) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(dims.iter().product());
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            for c in 0..dims[2] {
                for d in 0..dims[3] {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

impl VertexTable {
    pub fn compute(config: &ModelConfig, space: &FockSpace) -> Result<Self> {
        let g = &space.grids;
        let (e, m, p, b, n) = (
            g.grid(Species::Electron),
            g.grid(Species::MuonMinus),
            g.grid(Species::MuonPlus),
            g.grid(Species::AntiNuE),
            g.grid(Species::NuMu),
        );
        let dims1 = [e.len(), m.len(), b.len(), n.len()];
        let dims2 = [e.len(), p.len(), b.len(), n.len()];
        let table =
            |dims: [usize; 4], muon: &crate::grids::ModeGrid, variant| -> Result<Vec<C64>> {
                quadruples(dims)
                    .par_iter()
                    .map(|k| {
                        vertex_integral(
                            config,
                            e.landau(k[0]),
                            muon.landau(k[1]),
                            &b.momentum(k[2]),
                            &n.momentum(k[3]),
                            variant,
                        )
                    })
                    .collect()
            };
        Ok(VertexTable {
            digest: config.digest(),
            dims1,
            dims2,
            amp1: table(dims1, m, Variant::Decay)?,
            amp2: table(dims2, p, Variant::Creation)?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Invariant(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Loads a cached table; `None` if absent or computed for another config.
    pub fn load(path: &Path, digest: &str) -> Result<Option<Self>> {
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(path)?;
        match serde_json::from_str::<VertexTable>(&text) {
            Ok(t) if t.digest == digest => Ok(Some(t)),
            _ => Ok(None),
        }
    }
}

/// The four monomial families making up H_I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartKind {
    H1,
    H1Star,
    H2,
    H2Star,
}

impl PartKind {
    pub const ALL: [PartKind; 4] = [
        PartKind::H1,
        PartKind::H1Star,
        PartKind::H2,
        PartKind::H2Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartKind::H1 => "H1",
            PartKind::H1Star => "H1*",
            PartKind::H2 => "H2",
            PartKind::H2Star => "H2*",
        }
    }
}

/// One operator slot of a monomial: species and whether it creates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub species: Species,
    pub create: bool,
}

const fn cr(species: Species) -> Slot {
    Slot {
        species,
        create: true,
    }
}

const fn an(species: Species) -> Slot {
    Slot {
        species,
        create: false,
    }
}

/// A sum of normal-ordered quartic monomials sharing one slot pattern,
/// written left to right as an operator product.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionPart {
    pub kind: PartKind,
    pub slots: [Slot; 4],
    /// (local mode index per slot, coefficient)
    pub terms: Vec<([usize; 4], C64)>,
}

impl InteractionPart {
    /// Matrix of the part, built by applying each monomial to every basis
    /// state right to left.
    pub fn matrix(&self, space: &FockSpace) -> Result<SparseMatrix> {
        let globals: Vec<[usize; 4]> = self
            .terms
            .iter()
            .map(|(k, _)| {
                let mut g = [0; 4];
                for i in 0..4 {
                    g[i] = space.global(self.slots[i].species, k[i])?;
                }
                Ok(g)
            })
            .collect::<Result<_>>()?;
        let creates = self.slots.map(|s| s.create);
        let coeffs: Vec<C64> = self.terms.iter().map(|t| t.1).collect();
        Ok(monomial_sum(space.dim(), &creates, &globals, &coeffs))
    }
}

/// Sum_t c_t * (op_0 op_1 ... op_{m-1}) with op_i = b^*_{g_t[i]} or b_{g_t[i]}.
pub fn monomial_sum<const M: usize>(
    dim: usize,
    creates: &[bool; M],
    globals: &[[usize; M]],
    coeffs: &[C64],
) -> SparseMatrix {
    let rows: Vec<Vec<(usize, usize, C64)>> = (0..dim)
        .into_par_iter()
        .map(|s| {
            let mut out = Vec::new();
            for (g, c) in globals.iter().zip(coeffs) {
                if *c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut state = OccupationState(s as u32);
                let mut sign = 1i32;
                let mut alive = true;
                for i in (0..M).rev() {
                    let step = if creates[i] {
                        state.create(g[i])
                    } else {
                        state.annihilate(g[i])
                    };
                    match step {
                        Some((sg, t)) => {
                            sign *= sg;
                            state = t;
                        }
                        None => {
                            alive = false;
                            break;
                        }
                    }
                }
                if alive {
                    out.push((state.0 as usize, s, c * sign as f64));
                }
            }
            out
        })
        .collect();
    let trip: Vec<(usize, usize, C64)> = rows.into_iter().flatten().collect();
    SparseMatrix::from_triplets(dim, &trip).expect("indices in range")
}

/// Weighted coefficients amp * F * G * sqrt(w1 w2 w3 w4) of the four parts.
pub fn interaction_parts(
    config: &ModelConfig,
    space: &FockSpace,
    vt: &VertexTable,
) -> [InteractionPart; 4] {
    use Species::*;
    let g = &space.grids;
    let coeff = |muon: Species, amp: &[C64], dims: &[usize; 4]| -> Vec<([usize; 4], C64)> {
        quadruples(*dims)
            .into_iter()
            .map(|k| {
                let xi1 = g.grid(Electron).modes[k[0]];
                let xi2 = g.grid(muon).modes[k[1]];
                let xi3 = g.grid(AntiNuE).modes[k[2]];
                let xi4 = g.grid(NuMu).modes[k[3]];
                let f = config
                    .kernel_f
                    .eval(xi2.landau().unwrap(), &xi4.momentum().unwrap());
                let gg = config
                    .kernel_g
                    .eval(xi1.landau().unwrap(), &xi3.momentum().unwrap());
                let w = (xi1.weight * xi2.weight * xi3.weight * xi4.weight).sqrt();
                (k, amp[flat_index(dims, k)] * f * gg * w)
            })
            .collect()
    };
    let c1 = coeff(MuonMinus, &vt.amp1, &vt.dims1);
    let c2 = coeff(MuonPlus, &vt.amp2, &vt.dims2);
    // slot order of the printed monomials; k = [e, mu, nubar, nu]
    let h1 = InteractionPart {
        kind: PartKind::H1,
        slots: [cr(NuMu), cr(Electron), cr(AntiNuE), an(MuonMinus)],
        terms: c1
            .iter()
            .map(|(k, c)| ([k[3], k[0], k[2], k[1]], *c))
            .collect(),
    };
    let h1s = InteractionPart {
        kind: PartKind::H1Star,
        slots: [cr(MuonMinus), an(AntiNuE), an(Electron), an(NuMu)],
        terms: c1
            .iter()
            .map(|(k, c)| ([k[1], k[2], k[0], k[3]], c.conj()))
            .collect(),
    };
    let h2 = InteractionPart {
        kind: PartKind::H2,
        slots: [cr(NuMu), cr(MuonPlus), cr(Electron), cr(AntiNuE)],
        terms: c2
            .iter()
            .map(|(k, c)| ([k[3], k[1], k[0], k[2]], *c))
            .collect(),
    };
    let h2s = InteractionPart {
        kind: PartKind::H2Star,
        slots: [an(AntiNuE), an(Electron), an(MuonPlus), an(NuMu)],
        terms: c2
            .iter()
            .map(|(k, c)| ([k[2], k[0], k[1], k[3]], c.conj()))
            .collect(),
    };
    [h1, h1s, h2, h2s]
}

/// One-particle energy of every global mode.
pub fn mode_energies(config: &ModelConfig, space: &FockSpace) -> Vec<f64> {
    let e = config.electron();
    let mu = config.muon();
    (0..space.n_modes())
        .map(|j| {
            let (sp, k) = space.grids.locate(j).expect("mode");
            let mode = &space.grids.grid(sp).modes[k];
            match sp {
                Species::Electron => {
                    let q = mode.landau().unwrap();
                    energy_unchecked(&e, q.n, q.p3)
                }
                Species::MuonMinus | Species::MuonPlus => {
                    let q = mode.landau().unwrap();
                    energy_unchecked(&mu, q.n, q.p3)
                }
                Species::AntiNuE | Species::NuMu => norm3(&mode.momentum().unwrap()),
            }
        })
        .collect()
}

/// Diagonal of H_0 in the occupation basis.
pub fn h0_diagonal(config: &ModelConfig, space: &FockSpace) -> Vec<f64> {
    let w = mode_energies(config, space);
    (0..space.dim())
        .map(|s| {
            (0..space.n_modes())
                .filter(|j| s >> j & 1 == 1)
                .map(|j| w[j])
                .sum()
        })
        .collect()
}

pub fn assemble_h0(config: &ModelConfig) -> Result<FockOperator> {
    let space = FockSpace::new(config.grids()?)?;
    Ok(FockOperator::new(
        SparseMatrix::diagonal(&h0_diagonal(config, &space)),
        true,
    ))
}

/// Everything assembled once per configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub space: FockSpace,
    pub vertices: VertexTable,
    pub parts: [InteractionPart; 4],
    pub part_matrices: [SparseMatrix; 4],
    pub h0_diag: Vec<f64>,
    pub h0: FockOperator,
    pub hi: FockOperator,
}

impl Model {
    pub fn build(config: &ModelConfig) -> Result<Self> {
        let space = FockSpace::new(config.grids()?)?;
        let vt = VertexTable::compute(config, &space)?;
        Self::with_vertices(config, space, vt)
    }

    /// Builds using a vertex table cached at `path` when its digest matches,
    /// computing and storing it otherwise.
    pub fn build_cached(config: &ModelConfig, path: &Path) -> Result<Self> {
        let space = FockSpace::new(config.grids()?)?;
        let vt = match VertexTable::load(path, &config.digest())? {
            Some(vt) => vt,
            None => {
                let vt = VertexTable::compute(config, &space)?;
                vt.save(path)?;
                vt
            }
        };
        Self::with_vertices(config, space, vt)
    }

    pub fn with_vertices(
        config: &ModelConfig,
        space: FockSpace,
        vertices: VertexTable,
    ) -> Result<Self> {
        let parts = interaction_parts(config, &space, &vertices);
        let mats: Vec<SparseMatrix> = parts
            .iter()
            .map(|p| p.matrix(&space))
            .collect::<Result<_>>()?;
        let part_matrices: [SparseMatrix; 4] = mats.try_into().expect("four parts");
        let hi = part_matrices[0]
            .add(&part_matrices[1])
            .add(&part_matrices[2].add(&part_matrices[3]));
        let h0_diag = h0_diagonal(config, &space);
        let h0 = FockOperator::new(SparseMatrix::diagonal(&h0_diag), true);
        let hi = FockOperator::new(hi, true);
        hi.check_hermitian(1e-12)?;
        Ok(Model {
            config: config.clone(),
            space,
            vertices,
            parts,
            part_matrices,
            h0_diag,
            h0,
            hi,
        })
    }

    pub fn part(&self, kind: PartKind) -> &SparseMatrix {
        &self.part_matrices[kind as usize]
    }

    /// H = H_0 + g H_I. Logs a warning when g exceeds `g0`.
    pub fn total(&self, g: f64, g0: Option<f64>) -> FockOperator {
        if let Some(g0) = g0 {
            if g > g0 {
                warn!("coupling g = {g:e} exceeds the self-adjointness threshold g0 = {g0:e}");
            }
        }
        if g == 0.0 {
            return self.h0.clone();
        }
        let one = C64::new(1.0, 0.0);
        FockOperator::new(
            self.h0.matrix.axpby(one, &self.hi.matrix, C64::new(g, 0.0)),
            true,
        )
    }
}

pub fn assemble_hi(config: &ModelConfig) -> Result<FockOperator> {
    Ok(Model::build(config)?.hi)
}

pub fn assemble_total(config: &ModelConfig) -> Result<FockOperator> {
    let model = Model::build(config)?;
    let bounds = crate::bounds::compute_bounds(config)?;
    Ok(model.total(bounds.g, bounds.g0))
}

// ---------------------------------------------------------------------------
// Commutator structure with smeared fields

/// Field operators entering the asymptotic-field construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    /// electron, s-label +
    B1,
    /// muon mu-
    B2Plus,
    /// antimuon mu+
    B2Minus,
    /// electron antineutrino
    B3,
    /// muon neutrino
    B4,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::B1,
        Channel::B2Plus,
        Channel::B2Minus,
        Channel::B3,
        Channel::B4,
    ];

    pub fn species(self) -> Species {
        match self {
            Channel::B1 => Species::Electron,
            Channel::B2Plus => Species::MuonMinus,
            Channel::B2Minus => Species::MuonPlus,
            Channel::B3 => Species::AntiNuE,
            Channel::B4 => Species::NuMu,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::B1 => "b1",
            Channel::B2Plus => "b2+",
            Channel::B2Minus => "b2-",
            Channel::B3 => "b3",
            Channel::B4 => "b4",
        }
    }

    /// Parts whose commutator with b (or b^* when `adjoint`) is nonzero.
    pub fn nonvanishing(self, adjoint: bool) -> &'static [PartKind] {
        use PartKind::*;
        match (self, adjoint) {
            (Channel::B1 | Channel::B3 | Channel::B4, false) => &[H1, H2],
            (Channel::B1 | Channel::B3 | Channel::B4, true) => &[H1Star, H2Star],
            (Channel::B2Plus, false) => &[H1Star],
            (Channel::B2Plus, true) => &[H1],
            (Channel::B2Minus, false) => &[H2],
            (Channel::B2Minus, true) => &[H2Star],
        }
    }
}

/// b(f) = sum_k conj(c_k) b_k, or b^*(f) = sum_k c_k b_k^*, for discrete
/// coefficients c_k = sqrt(w_k) f(xi_k).
pub fn field_operator(
    space: &FockSpace,
    species: Species,
    coeffs: &[C64],
    adjoint: bool,
) -> Result<SparseMatrix> {
    let n = space.grids.grid(species).len();
    if coeffs.len() != n {
        return Err(Error::invalid(format!(
            "{} coefficients for {n} {species} modes",
            coeffs.len()
        )));
    }
    let globals: Vec<[usize; 1]> = (0..n)
        .map(|k| space.global(species, k).map(|g| [g]))
        .collect::<Result<_>>()?;
    let c: Vec<C64> = coeffs
        .iter()
        .map(|c| if adjoint { *c } else { c.conj() })
        .collect();
    Ok(monomial_sum(space.dim(), &[adjoint], &globals, &c))
}

/// [X, b^#(f)] accumulated mode by mode, so that vanishing commutators
/// cancel entry by entry and come out exactly zero.
pub fn commutator_with_field(
    space: &FockSpace,
    x: &SparseMatrix,
    species: Species,
    coeffs: &[C64],
    adjoint: bool,
) -> Result<SparseMatrix> {
    let mut acc = SparseMatrix::zeros(space.dim());
    for (k, c) in coeffs.iter().enumerate() {
        let mode = space.global(species, k)?;
        let op = monomial_sum(space.dim(), &[adjoint], &[[mode]], &[C64::new(1.0, 0.0)]);
        let comm = x.commutator(&op);
        let w = if adjoint { *c } else { c.conj() };
        acc = acc.axpby(C64::new(1.0, 0.0), &comm, w);
    }
    Ok(acc)
}

/// The cubic operator predicted for [part, b^#(f)] by anticommuting b^#
/// through the monomial: -sum_j (-1)^j m_0..{b, m_j}..m_3 with the
/// contraction {b(f), b_k^*} = conj(c_k), {b^*(f), b_k} = c_k.
pub fn contracted_cubic(
    space: &FockSpace,
    part: &InteractionPart,
    species: Species,
    coeffs: &[C64],
    adjoint: bool,
) -> Result<SparseMatrix> {
    let mut acc = SparseMatrix::zeros(space.dim());
    for j in 0..4 {
        let slot = part.slots[j];
        // b pairs with a creator, b^* with an annihilator
        if slot.species != species || slot.create == adjoint {
            continue;
        }
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        let rest: Vec<usize> = (0..4).filter(|i| *i != j).collect();
        let creates = [
            part.slots[rest[0]].create,
            part.slots[rest[1]].create,
            part.slots[rest[2]].create,
        ];
        let mut globals = Vec::new();
        let mut cs = Vec::new();
        for (k, c) in &part.terms {
            let f = if adjoint {
                coeffs[k[j]]
            } else {
                coeffs[k[j]].conj()
            };
            let mut g = [0usize; 3];
            for (slot_i, &i) in rest.iter().enumerate() {
                g[slot_i] = space.global(part.slots[i].species, k[i])?;
            }
            globals.push(g);
            cs.push(c * f * sign);
        }
        let m = monomial_sum(space.dim(), &creates, &globals, &cs);
        acc = acc.add(&m);
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    pub part: PartKind,
    pub adjoint: bool,
    pub expected_zero: bool,
    /// largest |entry| of the computed commutator
    pub norm: f64,
    /// largest |entry| of the predicted cubic
    pub cubic_norm: f64,
    /// largest entry-wise deviation from the prediction (0 or cubic)
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub channel: Channel,
    pub checks: Vec<CommutatorCheck>,
    pub pass: bool,
}

/// Tolerance for matching a nonvanishing commutator to its cubic, relative
/// to the cubic's largest entry.
pub const CUBIC_TOL: f64 = 1e-12;

/// Smearing coefficients with real and imaginary parts uniform in [-1, 1),
/// drawn from stream `stream` of a ChaCha8 generator seeded with `seed`.
pub fn seeded_coeffs(len: usize, seed: u64, stream: u64) -> Vec<C64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Checks [part, b^#(f)] for every part and both b and b^* against the
/// vanishing pattern and the contracted cubic.
pub fn commutator_identities(
    model: &Model,
    channel: Channel,
    coeffs: &[C64],
) -> Result<CommutatorReport> {
    let species = channel.species();
    let mut checks = Vec::new();
    for adjoint in [false, true] {
        for kind in PartKind::ALL {
            let part = &model.parts[kind as usize];
            let comm =
                commutator_with_field(&model.space, model.part(kind), species, coeffs, adjoint)?;
            let cubic = contracted_cubic(&model.space, part, species, coeffs, adjoint)?;
            let expected_zero = !channel.nonvanishing(adjoint).contains(&kind);
            let deviation = comm.sub(&cubic).max_abs();
            let cubic_norm = cubic.max_abs();
            let pass = if expected_zero {
                comm.is_zero() && cubic.is_zero()
            } else {
                deviation <= CUBIC_TOL * cubic_norm.max(1.0)
            };
            checks.push(CommutatorCheck {
                part: kind,
                adjoint,
                expected_zero,
                norm: comm.max_abs(),
                cubic_norm,
                deviation,
                pass,
            });
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(CommutatorReport {
        channel,
        checks,
        pass,
    })
}
