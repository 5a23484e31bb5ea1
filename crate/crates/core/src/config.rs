//! Model configuration: TOML text in, validated `ModelConfig` out, plus a
//! digest that is independent of key order and formatting.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grids::{GridSet, GridSpecs};
use crate::kernels::KernelSpec;
use crate::landau::ParticleParams;

/// Physical muon/electron mass ratio.
pub const MUON_ELECTRON_RATIO: f64 = 206.768283;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    /// Electron mass; sets the energy unit.
    pub m_e: f64,
    /// Muon mass in the same units.
    pub m_mu: f64,
    /// Field strength eB in units of m_e^2.
    pub eb: f64,
    /// Absolute coupling. When absent, `g_fraction * g0` is used.
    pub g: Option<f64>,
    pub g_fraction: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            m_e: 1.0,
            m_mu: MUON_ELECTRON_RATIO,
            eb: 1.0,
            g: None,
            g_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Gauss-Hermite nodes for the x^2 vertex integral.
    pub x2_nodes: usize,
    /// Relative tolerance of the node-doubling check on vertex integrals.
    pub vertex_tol: f64,
    /// Gauss-Legendre order per panel in decay integrals.
    pub decay_order: usize,
    /// Panels per unit of support length in decay integrals.
    pub decay_panels: usize,
    /// Relative tolerance of the node-doubling check on decay integrals.
    pub decay_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            x2_nodes: 96,
            vertex_tol: 1e-8,
            decay_order: 16,
            decay_panels: 24,
            decay_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    /// Number of low eigenvalues reported.
    pub k: usize,
    /// Largest dimension handled by the dense solver.
    pub dense_limit: usize,
    pub residual_tol: f64,
    pub krylov_max_iter: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            k: 8,
            dense_limit: 4096,
            residual_tol: 1e-9,
            krylov_max_iter: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub samples: usize,
    /// Times at which the number-operator bound is sampled.
    pub times: Vec<f64>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            samples: 1000,
            times: vec![0.0, 0.5, 2.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    /// Centre of the test function in p^3 (Landau channels) or |p|
    /// (neutrino channels).
    pub centre: f64,
    /// Length scale of the test-function profile.
    pub width: f64,
    /// Landau level and spin of Landau-channel test functions.
    pub level: u32,
    pub spin: i8,
    /// Fixed x^2 at which neutrino channels are evaluated.
    pub x2: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            t_min: 10.0,
            t_max: 100.0,
            per_decade: 12,
            centre: 1.0,
            width: 1.0,
            level: 0,
            spin: -1,
            x2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Single source of randomness for every sampled check.
    pub seed: u64,
    pub physics: Physics,
    pub kernel_f: KernelSpec,
    pub kernel_g: KernelSpec,
    pub grid: GridSpecs,
    pub quadrature: QuadratureConfig,
    pub spectral: SpectralConfig,
    pub bounds: BoundsConfig,
    pub decay: DecayConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            seed: 20240601,
            physics: Physics::default(),
            kernel_f: KernelSpec::default(),
            kernel_g: KernelSpec::default(),
            grid: GridSpecs::default(),
            quadrature: QuadratureConfig::default(),
            spectral: SpectralConfig::default(),
            bounds: BoundsConfig::default(),
            decay: DecayConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ModelConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        if !(p.m_e > 0.0 && p.m_mu > 0.0) {
            return Err(Error::Config("masses must be positive".into()));
        }
        if p.m_e >= p.m_mu {
            return Err(Error::Config(format!(
                "electron mass {} must be below muon mass {}",
                p.m_e, p.m_mu
            )));
        }
        if !(p.eb > 0.0 && p.eb.is_finite()) {
            return Err(Error::Config("eb must be positive".into()));
        }
        if let Some(g) = p.g {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::Config(format!(
                    "coupling must be non-negative, got {g}"
                )));
            }
        }
        if !(p.g_fraction >= 0.0 && p.g_fraction.is_finite()) {
            return Err(Error::Config("g_fraction must be non-negative".into()));
        }
        self.kernel_f.validate()?;
        self.kernel_g.validate()?;
        GridSet::from_specs(&self.grid).map_err(|e| Error::Config(e.to_string()))?;
        let q = &self.quadrature;
        if q.x2_nodes < 2 || q.decay_order < 2 || q.decay_panels < 1 {
            return Err(Error::Config("quadrature orders too small".into()));
        }
        if !(q.vertex_tol > 0.0 && q.decay_tol > 0.0) {
            return Err(Error::Config(
                "quadrature tolerances must be positive".into(),
            ));
        }
        let s = &self.spectral;
        if s.k == 0 || !(s.residual_tol > 0.0) {
            return Err(Error::Config(
                "spectral.k and residual_tol must be positive".into(),
            ));
        }
        let d = &self.decay;
        if !(d.t_min > 0.0 && d.t_max > d.t_min) || d.per_decade == 0 {
            return Err(Error::Config(
                "decay time window must satisfy 0 < t_min < t_max".into(),
            ));
        }
        if !(d.width > 0.0) || (d.spin != 1 && d.spin != -1) {
            return Err(Error::Config(
                "decay width must be positive and spin +-1".into(),
            ));
        }
        Ok(())
    }

    pub fn electron(&self) -> ParticleParams {
        ParticleParams {
            mass: self.physics.m_e,
            eb: self.physics.eb,
        }
    }

    pub fn muon(&self) -> ParticleParams {
        ParticleParams {
            mass: self.physics.m_mu,
            eb: self.physics.eb,
        }
    }

    pub fn grids(&self) -> Result<GridSet> {
        GridSet::from_specs(&self.grid)
    }

    /// Coupling actually used, given the threshold g0.
    pub fn coupling(&self, g0: f64) -> f64 {
        match self.physics.g {
            Some(g) => g,
            None if g0.is_finite() => self.physics.g_fraction * g0,
            None => 0.0,
        }
    }

    pub fn with_g(&self, g: f64) -> Self {
        let mut c = self.clone();
        c.physics.g = Some(g);
        c
    }

    /// sha256 of the canonical JSON form (struct field order, fixed float
    /// formatting), so key order and whitespace in the TOML do not matter.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = ModelConfig::default();
        c.validate().unwrap();
        let back = ModelConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.digest(), back.digest());
    }

    #[test]
    fn digest_ignores_key_order() {
        let a = "seed = 3\n[physics]\nm_e = 1.0\neb = 2.0\n[kernel_f]\nwidth = 0.5\nscale = 2.0\n";
        let b =
            "[kernel_f]\nscale = 2.0\nwidth = 0.5\n\n[physics]\neb = 2.0\nm_e = 1.0\n\nseed = 3\n";
        // a bare key after a table belongs to that table, so b is invalid TOML for seed
        assert!(ModelConfig::from_toml_str(b).is_err());
        let b =
            "seed = 3\n[kernel_f]\nscale = 2.0\nwidth = 0.5\n\n[physics]\neb = 2.0\nm_e = 1.0\n";
        let ca = ModelConfig::from_toml_str(a).unwrap();
        let cb = ModelConfig::from_toml_str(b).unwrap();
        assert_eq!(ca.digest(), cb.digest());
        assert_ne!(ca.digest(), ModelConfig::default().digest());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ModelConfig::from_toml_str("[physics]\nm_e = 300.0\n").is_err());
        assert!(ModelConfig::from_toml_str("[physics]\ng = -1.0\n").is_err());
        assert!(ModelConfig::from_toml_str("[physics]\nbogus = 1\n").is_err());
        assert!(ModelConfig::from_toml_str("[kernel_f]\nfamily = \"nope\"\n").is_err());
        assert!(ModelConfig::from_toml_str("[grid.neutrino]\nnodes = [1, 1, 1]\n").is_err());
    }

    #[test]
    fn coupling_resolution() {
        let c = ModelConfig::default();
        assert_eq!(c.coupling(2.0), 0.2);
        assert_eq!(c.coupling(f64::INFINITY), 0.0);
        assert_eq!(c.with_g(0.5).coupling(2.0), 0.5);
    }
}
