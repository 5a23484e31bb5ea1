//! Stationary-phase decay of the oscillatory integrals that control the
//! asymptotic fields, and finite-time evolved fields on the truncated space.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::dirac::Spinor4;
use crate::error::{Error, Result};
use crate::fock::OccupationState;
use crate::grids::Species;
use crate::hamiltonian::{field_operator, mode_energies, Model};
use crate::kernels::{factor_norms_sq, linear_fit, KernelSpec};
use crate::landau::{self, energy_unchecked, LandauQN, ParticleParams};
use crate::neutrino::{norm3, spinor_u_numu, spinor_w_nubar_e};
use crate::quadrature::{composite_legendre, Rule};
use crate::spectral::{evolve, SectorSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayChannel {
    Electron,
    MuonU,
    MuonW,
    Nubar,
    Nu,
}

impl DecayChannel {
    pub const ALL: [DecayChannel; 5] = [
        DecayChannel::Electron,
        DecayChannel::MuonU,
        DecayChannel::MuonW,
        DecayChannel::Nubar,
        DecayChannel::Nu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecayChannel::Electron => "electron",
            DecayChannel::MuonU => "muon-u",
            DecayChannel::MuonW => "muon-w",
            DecayChannel::Nubar => "nubar",
            DecayChannel::Nu => "nu",
        }
    }

    pub fn is_landau(self) -> bool {
        matches!(
            self,
            DecayChannel::Electron | DecayChannel::MuonU | DecayChannel::MuonW
        )
    }

    fn kernel(self, config: &ModelConfig) -> &KernelSpec {
        match self {
            DecayChannel::Electron | DecayChannel::Nubar => &config.kernel_g,
            _ => &config.kernel_f,
        }
    }
}

impl std::str::FromStr for DecayChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecayChannel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown decay channel {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// u (1 - u)^3 on [0, 1]: a kink at the inner edge and three continuous
    /// derivatives at the outer one, so the kink sets a t^-2 amplitude.
    OneSided,
    /// exp(1 - 1/(1 - u^2)) on (-1, 1), centred at `centre`.
    Symmetric,
}

impl Profile {
    fn eval(self, u: f64) -> f64 {
        match self {
            Profile::OneSided if (0.0..1.0).contains(&u) => u * (1.0 - u).powi(3),
            Profile::Symmetric if u.abs() < 1.0 => (1.0 - 1.0 / (1.0 - u * u)).exp(),
            _ => 0.0,
        }
    }

    /// Support in the radial variable for centre c and width w.
    fn support(self, c: f64, w: f64) -> (f64, f64) {
        match self {
            Profile::OneSided => (c, c + w),
            Profile::Symmetric => (c - w, c + w),
        }
    }
}

/// Smooth bump on (-1, 1) used for the transverse directions.
fn bump(u: f64) -> f64 {
    Profile::Symmetric.eval(u)
}

/// Test function for one channel. Landau channels use profile(p3) x
/// bump(p1 / width) at a single (s, n); neutrino channels use
/// profile(|p|) x bump((theta - pi/2) / aperture) x bump(phi / aperture).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestModeFunction {
    pub channel: DecayChannel,
    pub centre: f64,
    pub width: f64,
    pub profile: Profile,
    pub level: u32,
    pub spin: i8,
    /// angular half-width of neutrino test functions, radians
    pub aperture: f64,
    /// x^2 at which neutrino channels are evaluated
    pub x2: f64,
}

/// Default angular half-width of neutrino test functions.
pub const APERTURE: f64 = 0.5;

impl TestModeFunction {
    pub fn from_config(config: &ModelConfig, channel: DecayChannel) -> Self {
        let d = &config.decay;
        // W^(mu) at n = 0 is the null spinor unless the spin label is +1
        let spin = if channel == DecayChannel::MuonW && d.level == 0 {
            1
        } else {
            d.spin
        };
        TestModeFunction {
            channel,
            centre: d.centre,
            width: d.width,
            profile: Profile::OneSided,
            level: d.level,
            spin,
            aperture: APERTURE,
            x2: d.x2,
        }
    }

    /// Symmetric profile straddling p3 = 0, which the admissible class excludes.
    pub fn negative_control(config: &ModelConfig, channel: DecayChannel) -> Self {
        TestModeFunction {
            centre: 0.0,
            profile: Profile::Symmetric,
            ..Self::from_config(config, channel)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.profile.support(self.centre, self.width)
    }

    /// Landau channels must keep p3 = 0 out of the support; neutrino
    /// channels must keep |p| > 0 and stay off the p3 axis.
    pub fn admissible(&self) -> bool {
        let (lo, hi) = self.support();
        if self.channel.is_landau() {
            lo > 0.0 || hi < 0.0
        } else {
            lo > 0.0 && self.aperture < FRAC_PI_2
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid("test-function width must be positive"));
        }
        if !self.channel.is_landau() && self.support().0 <= 0.0 {
            return Err(Error::invalid(
                "neutrino test functions need a radial support away from p = 0",
            ));
        }
        if self.spin != 1 && self.spin != -1 {
            return Err(Error::invalid("spin must be +-1"));
        }
        Ok(())
    }
}

/// Panel counts of one quadrature pass; doubled for the convergence check.
#[derive(Debug, Clone, Copy)]
struct Resolution {
    order: usize,
    /// panels per unit length in the oscillatory variable
    density: usize,
    /// Gauss-Hermite nodes in x^2
    x2_nodes: usize,
    /// panels across the transverse bumps
    transverse: usize,
}

impl Resolution {
    fn rule(&self, a: f64, b: f64) -> Result<Rule> {
        let panels = ((b - a) * self.density as f64).ceil().max(1.0) as usize;
        composite_legendre(self.order, panels, a, b)
    }

    fn transverse_rule(&self, a: f64, b: f64) -> Result<Rule> {
        composite_legendre(self.order, self.transverse, a, b)
    }

    fn doubled(self) -> Self {
        Resolution {
            order: self.order,
            density: 2 * self.density,
            x2_nodes: 2 * self.x2_nodes,
            transverse: 2 * self.transverse,
        }
    }
}

/// Precomputed amplitude pieces: I(t) = scale * sum_x w_x ||sum_k e^{i sign t E_k} B_xk||^2.
struct Amplitude {
    outer_weights: Vec<f64>,
    /// one row per outer node
    b: Vec<Vec<Spinor4>>,
    energies: Vec<f64>,
    /// +1 for e^{+itE}, -1 for e^{-itE}
    sign: f64,
    scale: f64,
}

impl Amplitude {
    fn eval(&self, t: f64) -> f64 {
        let phases: Vec<C64> = self
            .energies
            .iter()
            .map(|e| C64::from_polar(1.0, self.sign * t * e))
            .collect();
        let rows: Vec<f64> = self
            .b
            .par_iter()
            .zip(self.outer_weights.par_iter())
            .map(|(row, w)| {
                let mut acc = Spinor4::zero();
                for (s, p) in row.iter().zip(&phases) {
                    acc = acc + s.scale(*p);
                }
                w * acc.norm_sqr()
            })
            .collect();
        self.scale * rows.iter().sum::<f64>()
    }
}

fn landau_amplitude(
    config: &ModelConfig,
    f: &TestModeFunction,
    res: Resolution,
) -> Result<Amplitude> {
    let kernel = f.channel.kernel(config);
    let (params, spinor): (
        ParticleParams,
        fn(&ParticleParams, &LandauQN, f64) -> Spinor4,
    ) = match f.channel {
        DecayChannel::Electron => (config.electron(), landau::spinor_u),
        DecayChannel::MuonU => (config.muon(), landau::spinor_u),
        DecayChannel::MuonW => (config.muon(), landau::spinor_w_mu),
        _ => unreachable!("neutrino channel"),
    };
    let (_, neutral_sq) = factor_norms_sq(kernel)?;
    let scale = kernel.scale * kernel.scale * neutral_sq;
    let (lo, hi) = f.support();
    let p3 = res.rule(lo, hi)?;
    let p1 = res.transverse_rule(-f.width, f.width)?;
    // orbit centres spread over |x2| <= width/eB, well inside the Gaussian rule
    let x2 = landau::x2_rule(params.eb, 0.0, res.x2_nodes)?;
    let energies: Vec<f64> = p3
        .nodes
        .iter()
        .map(|p| energy_unchecked(&params, f.level, *p))
        .collect();
    let b: Vec<Vec<Spinor4>> = x2
        .nodes
        .par_iter()
        .map(|&x| {
            p3.iter()
                .map(|(q3, w3)| {
                    let mut acc = Spinor4::zero();
                    for (q1, w1) in p1.iter() {
                        let weight = f.profile.eval((q3 - f.centre) / f.width) * bump(q1 / f.width);
                        let g = kernel.charged(f.spin, f.level, q1, q3);
                        if weight == 0.0 || g == 0.0 {
                            continue;
                        }
                        let qn = LandauQN {
                            s: f.spin,
                            n: f.level,
                            p1: q1,
                            p3: q3,
                        };
                        acc = acc
                            + spinor(&params, &qn, x).scale(C64::new(w1 * w3 * weight * g, 0.0));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(Amplitude {
        outer_weights: x2.weights,
        b,
        energies,
        sign: -1.0,
        scale,
    })
}

fn neutrino_amplitude(
    config: &ModelConfig,
    f: &TestModeFunction,
    res: Resolution,
) -> Result<Amplitude> {
    let kernel = f.channel.kernel(config);
    let (charged_sq, _) = factor_norms_sq(kernel)?;
    let scale = kernel.scale * kernel.scale * charged_sq;
    let (lo, hi) = f.support();
    let radial = res.rule(lo, hi)?;
    let theta = res.transverse_rule(FRAC_PI_2 - f.aperture, FRAC_PI_2 + f.aperture)?;
    let phi = res.transverse_rule(-f.aperture, f.aperture)?;
    let mut energies = Vec::new();
    let mut row = Vec::new();
    for (r, wr) in radial.iter() {
        let mut acc = Spinor4::zero();
        for (th, wt) in theta.iter() {
            for (ph, wp) in phi.iter() {
                let p = [
                    r * th.sin() * ph.cos(),
                    r * th.sin() * ph.sin(),
                    r * th.cos(),
                ];
                let weight = f.profile.eval((r - f.centre) / f.width)
                    * bump((th - FRAC_PI_2) / f.aperture)
                    * bump(ph / f.aperture);
                let k = kernel.neutral(&p);
                if weight == 0.0 || k == 0.0 {
                    continue;
                }
                let jac = wr * wt * wp * r * r * th.sin();
                let (s, phase) = match f.channel {
                    DecayChannel::Nubar => (spinor_w_nubar_e(&p)?, -p[1] * f.x2),
                    _ => (spinor_u_numu(&p)?, p[1] * f.x2),
                };
                acc = acc + s.scale(C64::from_polar(jac * weight * k, phase));
            }
        }
        energies.push(r);
        row.push(acc);
    }
    Ok(Amplitude {
        outer_weights: vec![1.0],
        b: vec![row],
        energies,
        sign: if f.channel == DecayChannel::Nubar {
            1.0
        } else {
            -1.0
        },
        scale,
    })
}

fn amplitude(config: &ModelConfig, f: &TestModeFunction, res: Resolution) -> Result<Amplitude> {
    f.validate()?;
    if f.channel.is_landau() {
        landau_amplitude(config, f, res)
    } else {
        neutrino_amplitude(config, f, res)
    }
}

fn base_resolution(config: &ModelConfig) -> Resolution {
    Resolution {
        order: config.quadrature.decay_order,
        density: config.quadrature.decay_panels,
        x2_nodes: config.quadrature.x2_nodes,
        transverse: 2,
    }
}

/// One I(t) value with its node-doubling check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    pub value: f64,
    /// |I_fine - I_coarse|
    pub quad_error: f64,
    pub resolved: bool,
}

fn evaluate(config: &ModelConfig, f: &TestModeFunction, times: &[f64]) -> Result<Vec<DecayPoint>> {
    let res = base_resolution(config);
    let coarse = amplitude(config, f, res)?;
    let fine = amplitude(config, f, res.doubled())?;
    let tol = config.quadrature.decay_tol;
    Ok(times
        .iter()
        .map(|&t| {
            let a = coarse.eval(t);
            let b = fine.eval(t);
            let quad_error = (a - b).abs();
            DecayPoint {
                t,
                value: b,
                quad_error,
                resolved: quad_error <= tol * b.abs(),
            }
        })
        .collect())
}

/// I(t) for one channel; errors when node doubling moves it by more than
/// the configured relative tolerance.
pub fn decay_integral(config: &ModelConfig, f: &TestModeFunction, t: f64) -> Result<f64> {
    let p = evaluate(config, f, &[t])?[0];
    if f.width > 0.0 && p.value == 0.0 {
        return Ok(0.0);
    }
    if !p.resolved {
        return Err(Error::convergence(
            "decay integral",
            format!(
                "I({t}) = {:e} changes by {:e} under node doubling",
                p.value, p.quad_error
            ),
        ));
    }
    Ok(p.value)
}

/// Log-spaced times with `per_decade` points per decade, endpoints included.
pub fn time_grid(t_min: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    let decades = (t_max / t_min).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    (0..=n)
        .map(|i| t_min * (t_max / t_min).powf(i as f64 / n as f64))
        .collect()
}

/// The configured window, stretched by m_mu/m_e for muon channels whose
/// group velocity p3/E is that much smaller.
pub fn default_time_grid(config: &ModelConfig, channel: DecayChannel) -> Vec<f64> {
    let d = &config.decay;
    let stretch = match channel {
        DecayChannel::MuonU | DecayChannel::MuonW => config.physics.m_mu / config.physics.m_e,
        _ => 1.0,
    };
    time_grid(d.t_min * stretch, d.t_max * stretch, d.per_decade)
}

/// Gate on the fitted exponent of I(t) ~ t^p.
pub const EXPONENT_GATE: f64 = -4.0 + 0.3;
/// Gate on the rms residual of the log-log fit.
pub const RESIDUAL_GATE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFitReport {
    pub channel: DecayChannel,
    pub test_function: TestModeFunction,
    pub times: Vec<f64>,
    pub i_values: Vec<f64>,
    pub quad_errors: Vec<f64>,
    pub resolved: Vec<bool>,
    pub fitted_exponent: f64,
    pub fit_residual: f64,
    pub admissible: bool,
    /// exponent and residual gates alone
    pub numeric_pass: bool,
    /// numeric gates and admissible support
    pub pass: bool,
}

pub fn fit_decay(
    config: &ModelConfig,
    f: &TestModeFunction,
    times: &[f64],
) -> Result<DecayFitReport> {
    if times.len() < 3
        || times.iter().any(|t| !(*t > 0.0))
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::invalid(
            "need at least three positive increasing times",
        ));
    }
    let points = evaluate(config, f, times)?;
    let usable: Vec<&DecayPoint> = points
        .iter()
        .filter(|p| p.resolved && p.value > 0.0)
        .collect();
    if usable.len() < 3 {
        let reliable = points
            .iter()
            .filter(|p| p.resolved)
            .map(|p| p.t)
            .fold(f64::NAN, f64::max);
        return Err(Error::convergence(
            "decay fit",
            format!(
                "only {} resolved points; largest reliable t = {reliable}",
                usable.len()
            ),
        ));
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.t.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.value.ln()).collect();
    let (slope, _, rms) = linear_fit(&xs, &ys);
    let numeric_pass = slope <= EXPONENT_GATE && rms < RESIDUAL_GATE;
    let admissible = f.admissible();
    Ok(DecayFitReport {
        channel: f.channel,
        test_function: f.clone(),
        times: points.iter().map(|p| p.t).collect(),
        i_values: points.iter().map(|p| p.value).collect(),
        quad_errors: points.iter().map(|p| p.quad_error).collect(),
        resolved: points.iter().map(|p| p.resolved).collect(),
        fitted_exponent: slope,
        fit_residual: rms,
        admissible,
        numeric_pass,
        pass: numeric_pass && admissible,
    })
}

// ---------------------------------------------------------------------------
// Evolved fields on the truncated space

/// Largest sector handled by dense exponentials.
pub const MAX_SECTOR_DIM: usize = 1024;

/// One dense block of an evolved field, mapping sector `source` to `target`.
#[derive(Debug, Clone)]
pub struct FieldBlock {
    pub source: usize,
    pub target: usize,
    pub matrix: Mat<C64>,
}

/// b_t(f) = e^{itH} e^{-itH_0} b(f) e^{itH_0} e^{-itH} stored by sector blocks.
#[derive(Debug, Clone)]
pub struct EvolvedField {
    pub t: f64,
    pub dim: usize,
    pub blocks: Vec<FieldBlock>,
}

impl EvolvedField {
    pub fn apply(&self, sectors: &[SectorSolution], psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for b in &self.blocks {
            let src = &sectors[b.source].states;
            let tgt = &sectors[b.target].states;
            for (r, s) in tgt.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, from) in src.iter().enumerate() {
                    acc += b.matrix[(r, c)] * psi[*from];
                }
                out[*s] += acc;
            }
        }
        out
    }

    pub fn to_sparse(&self, sectors: &[SectorSolution]) -> Result<crate::sparse::SparseMatrix> {
        let mut trip = Vec::new();
        for b in &self.blocks {
            for (r, s) in sectors[b.target].states.iter().enumerate() {
                for (c, from) in sectors[b.source].states.iter().enumerate() {
                    trip.push((*s, *from, b.matrix[(r, c)]));
                }
            }
        }
        crate::sparse::SparseMatrix::from_triplets(self.dim, &trip)
    }

    /// Operator norm. Each block has its own source and target sector, so
    /// this is the largest block norm.
    pub fn operator_norm(&self) -> Result<f64> {
        let mut best: f64 = 0.0;
        for b in &self.blocks {
            let s = b
                .matrix
                .singular_values()
                .map_err(|e| Error::convergence("singular values", format!("{e:?}")))?;
            best = best.max(s.first().copied().unwrap_or(0.0));
        }
        Ok(best)
    }
}

fn sector_index(sectors: &[SectorSolution], dim: usize) -> Vec<(usize, usize)> {
    let mut idx = vec![(usize::MAX, 0); dim];
    for (si, s) in sectors.iter().enumerate() {
        for (k, st) in s.states.iter().enumerate() {
            idx[*st] = (si, k);
        }
    }
    idx
}

fn phase_diag(values: &[f64], tau: f64) -> Vec<C64> {
    values
        .iter()
        .map(|l| C64::from_polar(1.0, tau * l))
        .collect()
}

/// V diag(e^{i tau lambda}) V^dagger for one sector.
fn sector_exp(s: &SectorSolution, tau: f64) -> Mat<C64> {
    let d = s.states.len();
    let ph = phase_diag(&s.values, tau);
    let scaled = Mat::<C64>::from_fn(d, d, |r, c| s.vectors[(r, c)] * ph[c]);
    &scaled * s.vectors.adjoint()
}

/// The evolved field for coefficients c_k on `species`, by exact
/// exponentials from the sector eigendecompositions of H.
pub fn evolved_field(
    model: &Model,
    sectors: &[SectorSolution],
    species: Species,
    coeffs: &[C64],
    adjoint: bool,
    t: f64,
) -> Result<EvolvedField> {
    let dim = model.space.dim();
    if let Some(big) = sectors
        .iter()
        .map(|s| s.states.len())
        .max()
        .filter(|d| *d > MAX_SECTOR_DIM)
    {
        return Err(Error::DimensionTooLarge {
            dim: big,
            limit: MAX_SECTOR_DIM,
        });
    }
    let field = field_operator(&model.space, species, coeffs, adjoint)?;
    let idx = sector_index(sectors, dim);
    // group the entries of b(f) by (target, source) sector pair
    let mut pairs: HashMap<(usize, usize), Vec<(usize, usize, C64)>> = HashMap::new();
    for (i, j, v) in field.triplets() {
        let (ti, tl) = idx[i];
        let (si, sl) = idx[j];
        pairs.entry((ti, si)).or_default().push((tl, sl, v));
    }
    let mut keys: Vec<(usize, usize)> = pairs.keys().copied().collect();
    keys.sort();
    let h0 = &model.h0_diag;
    let blocks = keys
        .par_iter()
        .map(|&(ti, si)| {
            let (tgt, src) = (&sectors[ti], &sectors[si]);
            let mut b = Mat::<C64>::zeros(tgt.states.len(), src.states.len());
            for (r, c, v) in &pairs[&(ti, si)] {
                // e^{-itH_0} on the left, e^{itH_0} on the right
                let ph = C64::from_polar(1.0, t * (h0[src.states[*c]] - h0[tgt.states[*r]]));
                b[(*r, *c)] = v * ph;
            }
            let left = sector_exp(tgt, t);
            let right = sector_exp(src, -t);
            FieldBlock {
                source: si,
                target: ti,
                matrix: &(&left * &b) * &right,
            }
        })
        .collect();
    Ok(EvolvedField { t, dim, blocks })
}

/// sup over unit psi in the span of `low` of ||(b_t - b_t') psi||.
pub fn increment_norm(
    a: &EvolvedField,
    b: &EvolvedField,
    sectors: &[SectorSolution],
    low: &[Vec<C64>],
) -> Result<f64> {
    let dim = a.dim;
    let cols: Vec<Vec<C64>> = low
        .iter()
        .map(|v| {
            let x = a.apply(sectors, v);
            let y = b.apply(sectors, v);
            x.iter().zip(&y).map(|(p, q)| p - q).collect()
        })
        .collect();
    // low is orthonormal, so the norm on its span is the largest singular value
    let m = Mat::<C64>::from_fn(dim, cols.len(), |r, c| cols[c][r]);
    let s = m
        .singular_values()
        .map_err(|e| Error::convergence("singular values", format!("{e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Coefficients c_k e^{-i t omega_k} of the freely evolved test function.
pub fn free_evolved_coeffs(
    model: &Model,
    species: Species,
    coeffs: &[C64],
    t: f64,
) -> Result<Vec<C64>> {
    let w = mode_energies(&model.config, &model.space);
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| Ok(c * C64::from_polar(1.0, -t * w[model.space.global(species, k)?])))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub t: f64,
    pub numeric: C64,
    pub predicted: C64,
    pub deviation: f64,
}

/// Compares a central difference of <Phi, b_t(f) Psi> with
/// i g <Phi, e^{itH} [H_I, b(f_t)] e^{-itH} Psi>, f_t = e^{-it omega} f.
#[allow(clippy::too_many_arguments)]
pub fn derivative_check(
    model: &Model,
    sectors: &[SectorSolution],
    g: f64,
    species: Species,
    coeffs: &[C64],
    t: f64,
    h: f64,
    seed: u64,
) -> Result<DerivativeCheck> {
    let dim = model.space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || {
        let v: Vec<C64> = (0..dim)
            .map(|_| {
                C64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect::<Vec<_>>()
    };
    let phi = unit();
    let psi = unit();
    let element = |tau: f64| -> Result<C64> {
        let b = evolved_field(model, sectors, species, coeffs, false, tau)?;
        let v = b.apply(sectors, &psi);
        Ok(phi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    };
    // fourth-order central difference
    let numeric = (element(t - 2.0 * h)? - element(t + 2.0 * h)?
        + (element(t + h)? - element(t - h)?) * 8.0)
        / (12.0 * h);
    let ft = free_evolved_coeffs(model, species, coeffs, t)?;
    let x = field_operator(&model.space, species, &ft, false)?;
    let comm = model.hi.matrix.commutator(&x);
    let phi_t = evolve(sectors, &phi, t);
    let psi_t = evolve(sectors, &psi, t);
    let cv = comm.matvec(&psi_t);
    let inner: C64 = phi_t.iter().zip(&cv).map(|(a, b)| a.conj() * b).sum();
    let predicted = C64::new(0.0, g) * inner;
    Ok(DerivativeCheck {
        t,
        numeric,
        predicted,
        deviation: (numeric - predicted).norm(),
    })
}

/// Electron count per basis state, for diagnostics over evolved states.
pub fn electron_counts(model: &Model) -> Vec<i32> {
    (0..model.space.dim())
        .map(|s| {
            model
                .space
                .species_count(OccupationState(s as u32), Species::Electron)
        })
        .collect()
}

/// Norm of a neutrino momentum, re-exported for test-function checks.
pub fn momentum_norm(p: &[f64; 3]) -> f64 {
    norm3(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sectored_solve;
    use rand::Rng;

    fn cfg() -> ModelConfig {
        ModelConfig::default()
    }

    #[test]
    fn time_grid_is_log_spaced() {
        let t = time_grid(10.0, 100.0, 12);
        assert_eq!(t.len(), 13);
        assert!((t[0] - 10.0).abs() < 1e-12 && (t[12] - 100.0).abs() < 1e-9);
        let r = t[1] / t[0];
        assert!(t.windows(2).all(|w| ((w[1] / w[0]) - r).abs() < 1e-12));
    }

    #[test]
    fn zero_test_function_gives_zero() {
        let c = cfg();
        let mut f = TestModeFunction::from_config(&c, DecayChannel::Electron);
        f.level = 5; // outside the kernel's level cap
        assert_eq!(decay_integral(&c, &f, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn admissibility() {
        let c = cfg();
        assert!(TestModeFunction::from_config(&c, DecayChannel::Electron).admissible());
        assert!(!TestModeFunction::negative_control(&c, DecayChannel::Electron).admissible());
        assert!(TestModeFunction::from_config(&c, DecayChannel::Nubar).admissible());
    }

    #[test]
    fn time_reversal_symmetry_for_real_spinors() {
        let c = cfg();
        let f = TestModeFunction::from_config(&c, DecayChannel::Electron);
        let a = decay_integral(&c, &f, 7.0).unwrap();
        let b = decay_integral(&c, &f, -7.0).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn zero_time_matches_monte_carlo() {
        let c = cfg();
        let f = TestModeFunction::from_config(&c, DecayChannel::Electron);
        let exact = decay_integral(&c, &f, 0.0).unwrap();
        // I(0) = K int dx2 int dxi int dxi' <U(xi) h(xi), U(xi') h(xi')>
        let e = c.electron();
        let (_, nsq) = factor_norms_sq(&c.kernel_g).unwrap();
        let k = c.kernel_g.scale.powi(2) * nsq;
        let reach = f.width / e.eb + 12.0 * e.magnetic_length();
        let (lo, hi) = f.support();
        let h = |p1: f64, p3: f64, x: f64| -> Spinor4 {
            let qn = LandauQN {
                s: f.spin,
                n: f.level,
                p1,
                p3,
            };
            let w = f.profile.eval((p3 - f.centre) / f.width)
                * bump(p1 / f.width)
                * c.kernel_g.charged(f.spin, f.level, p1, p3);
            landau::spinor_u(&e, &qn, x).scale(C64::new(w, 0.0))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 400_000;
        let vol = (2.0 * reach) * (2.0 * f.width * (hi - lo)).powi(2);
        let mut acc = 0.0;
        for _ in 0..n {
            let x = rng.gen_range(-reach..reach);
            let a = h(rng.gen_range(-f.width..f.width), rng.gen_range(lo..hi), x);
            let b = h(rng.gen_range(-f.width..f.width), rng.gen_range(lo..hi), x);
            acc += a.dot(&b).re;
        }
        let mc = k * vol * acc / n as f64;
        assert!((mc - exact).abs() < 0.05 * exact, "mc {mc} vs {exact}");
    }

    #[test]
    fn electron_channel_decays_like_t4() {
        let c = cfg();
        let f = TestModeFunction::from_config(&c, DecayChannel::Electron);
        let r = fit_decay(&c, &f, &default_time_grid(&c, DecayChannel::Electron)).unwrap();
        assert!(r.pass, "{} {}", r.fitted_exponent, r.fit_residual);
    }

    fn small_model() -> Model {
        let mut c = cfg();
        c.grid.electron.p3_nodes = 1;
        c.grid.neutrino.nodes = [1, 2, 1];
        Model::build(&c).unwrap()
    }

    #[test]
    fn evolved_field_basics() {
        let model = small_model();
        let g = 0.2;
        let h = model.total(g, None);
        let sectors = sectored_solve(&model, &h).unwrap();
        let n = model.space.grids.grid(Species::Electron).len();
        let coeffs: Vec<C64> = (0..n).map(|k| C64::new(0.5 + k as f64, -0.25)).collect();
        let norm_f = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let b0 = evolved_field(&model, &sectors, Species::Electron, &coeffs, false, 0.0).unwrap();
        let plain = field_operator(&model.space, Species::Electron, &coeffs, false).unwrap();
        assert!(b0.to_sparse(&sectors).unwrap().sub(&plain).max_abs() < 1e-12);
        for t in [0.3, 2.0] {
            let bt = evolved_field(&model, &sectors, Species::Electron, &coeffs, false, t).unwrap();
            assert!((bt.operator_norm().unwrap() - norm_f).abs() < 1e-10 * norm_f);
        }
    }

    #[test]
    fn free_fields_do_not_evolve() {
        let model = small_model();
        let sectors = sectored_solve(&model, &model.h0).unwrap();
        let n = model.space.grids.grid(Species::NuMu).len();
        let coeffs: Vec<C64> = (0..n).map(|k| C64::new(1.0, k as f64)).collect();
        let plain = field_operator(&model.space, Species::NuMu, &coeffs, false).unwrap();
        let bt = evolved_field(&model, &sectors, Species::NuMu, &coeffs, false, 1.3).unwrap();
        assert!(bt.to_sparse(&sectors).unwrap().sub(&plain).max_abs() < 1e-12);
        // pull-through: e^{itH0} b(f) e^{-itH0} = b(e^{it omega} f)
        let t = 1.3;
        let fwd = free_evolved_coeffs(&model, Species::NuMu, &coeffs, -t).unwrap();
        let expect = field_operator(&model.space, Species::NuMu, &fwd, false).unwrap();
        let d = model.h0_diag.clone();
        let ph = |tau: f64| {
            crate::sparse::SparseMatrix::from_triplets(
                d.len(),
                &d.iter()
                    .enumerate()
                    .map(|(i, w)| (i, i, C64::from_polar(1.0, tau * w)))
                    .collect::<Vec<_>>(),
            )
            .unwrap()
        };
        let conj = ph(t).matmul(&plain).matmul(&ph(-t));
        assert!(conj.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn derivative_identity() {
        let model = small_model();
        let g = 0.05;
        let h = model.total(g, None);
        let sectors = sectored_solve(&model, &h).unwrap();
        let n = model.space.grids.grid(Species::Electron).len();
        let coeffs: Vec<C64> = (0..n).map(|k| C64::new(1.0, 0.5 * k as f64)).collect();
        let r = derivative_check(
            &model,
            &sectors,
            g,
            Species::Electron,
            &coeffs,
            0.7,
            1e-4,
            3,
        )
        .unwrap();
        assert!(r.deviation < 1e-6 * r.predicted.norm().max(1.0), "{r:?}");
        assert!(r.predicted.norm() > 0.0);
    }
}
