//! One function per subcommand. Each writes its reports into `out` and
//! returns the name of a failed invariant, if any.

use mudecay_core::asymptotics::{default_time_grid, fit_decay, DecayChannel, TestModeFunction};
use mudecay_core::bounds::{
    compute_bounds, identity_residuals, verify_relative_bound, BoundsReport,
};
use mudecay_core::grids::QuantumNumbers;
use mudecay_core::hamiltonian::{commutator_identities, mode_energies, seeded_coeffs, Channel};
use mudecay_core::kernels::check_hypotheses;
use mudecay_core::selftest::run_selftest;
use mudecay_core::spectral::{ground_state_report, sector_spectra, sectored_solve};
use mudecay_core::{Model, ModelConfig};
use serde::Serialize;

use crate::error::CliResult;
use crate::output::{num, Outputs};

/// Infrared radii for the kernel mass fit, strictly decreasing.
pub const SIGMAS: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];
const SELFTEST_SAMPLES: usize = 20;
const IDENTITY_TOL: f64 = 1e-12;
const ENERGY_TOL: f64 = 1e-12;

pub type Failure = Option<String>;

fn model(config: &ModelConfig, out: &Outputs) -> CliResult<Model> {
    let cache = out.dir().join("cache");
    std::fs::create_dir_all(&cache)?;
    Ok(Model::build_cached(
        config,
        &cache.join(format!("vertices-{}.json", config.digest())),
    )?)
}

pub fn selftest(config: &ModelConfig, out: &mut Outputs) -> CliResult<Failure> {
    let r = run_selftest(config, SELFTEST_SAMPLES)?;
    out.json("selftest.json", &r)?;
    let rows = [
        ("car_exact_mixed", r.car_exact[0] as f64),
        ("car_exact_annihilators", r.car_exact[1] as f64),
        ("car_exact_creators", r.car_exact[2] as f64),
        ("car_float", r.car_float),
        ("clifford", r.clifford),
        ("c_constant", r.c_constant),
        ("orthonormality_electron", r.orthonormality_electron),
        ("orthonormality_muon", r.orthonormality_muon),
        ("neutrino_norms", r.neutrino_norms),
    ];
    out.csv(
        "selftest.csv",
        &["check", "value"],
        rows.iter().map(|(k, v)| [k.to_string(), num(*v)]),
    )?;
    Ok((!r.pass).then(|| format!("selftest: {}", r.failures.join(", "))))
}

pub fn check_kernels(config: &ModelConfig, out: &mut Outputs) -> CliResult<Failure> {
    let r = check_hypotheses(&config.kernel_f, &config.kernel_g, &SIGMAS)?;
    out.json("kernels.json", &r)?;
    out.csv(
        "kernels.csv",
        &["hypothesis", "pass"],
        r.pass.iter().map(|(k, v)| [k.clone(), v.to_string()]),
    )?;
    out.csv(
        "kernels_infrared.csv",
        &["sigma", "mass_f", "mass_g"],
        r.ir_mass_f
            .sigmas
            .iter()
            .zip(r.ir_mass_f.masses.iter().zip(&r.ir_mass_g.masses))
            .map(|(s, (f, g))| [num(*s), num(*f), num(*g)]),
    )?;
    let failed: Vec<&str> = r
        .pass
        .iter()
        .filter(|(_, v)| !**v)
        .map(|(k, _)| k.as_str())
        .collect();
    Ok((!failed.is_empty()).then(|| format!("kernel hypotheses: {}", failed.join(", "))))
}

#[derive(Serialize)]
struct BoundsOutput<'a> {
    bounds: &'a BoundsReport,
    identities: Vec<(&'static str, f64)>,
    relative_bound: mudecay_core::bounds::RelativeBoundCheck,
}

pub fn bounds(config: &ModelConfig, out: &mut Outputs) -> CliResult<Failure> {
    let b = compute_bounds(config)?;
    let identities = identity_residuals(&b, config.physics.m_e, config.physics.m_mu);
    let m = model(config, out)?;
    let check = verify_relative_bound(&m, &b, config.bounds.samples, config.seed)?;
    let mut rows: Vec<[String; 2]> = vec![
        ["C".into(), num(b.c)],
        ["M".into(), num(b.m)],
        ["norm_F".into(), num(b.norm_f)],
        ["norm_G".into(), num(b.norm_g)],
        ["a".into(), num(b.a)],
        ["b".into(), num(b.b)],
        ["g0".into(), num(b.g0_value())],
        ["a_tilde".into(), num(b.a_tilde)],
        ["b_tilde".into(), num(b.b_tilde)],
        ["g".into(), num(b.g)],
        ["empirical_max_ratio".into(), num(check.empirical_max_ratio)],
    ];
    rows.extend(
        identities
            .iter()
            .map(|(k, v)| [format!("residual_{k}"), num(*v)]),
    );
    out.csv("bounds.csv", &["quantity", "value"], rows)?;
    let bad_identity = identities
        .iter()
        .find(|(_, v)| !(*v <= IDENTITY_TOL))
        .map(|(k, _)| *k);
    let pass = check.pass;
    out.json(
        "bounds.json",
        &BoundsOutput {
            bounds: &b,
            identities,
            relative_bound: check,
        },
    )?;
    Ok(match bad_identity {
        Some(k) => Some(format!("bound identity {k} exceeds {IDENTITY_TOL:e}")),
        None => (!pass).then(|| "relative bound violated on sampled vectors".to_string()),
    })
}

fn coupling(config: &ModelConfig) -> CliResult<(f64, Option<f64>)> {
    let b = compute_bounds(config)?;
    Ok((b.g, b.g0))
}

#[derive(Serialize)]
struct AssembleOutput {
    dim: usize,
    modes: [usize; 5],
    g: f64,
    g0: Option<f64>,
    nnz_h0: usize,
    nnz_hi: usize,
    nnz_h: usize,
    hermiticity_deviation: f64,
    files: [&'static str; 3],
}

pub fn assemble(config: &ModelConfig, out: &mut Outputs) -> CliResult<Failure> {
    let m = model(config, out)?;
    let (g, g0) = coupling(config)?;
    let h = m.total(g, g0);
    let files = ["h.triplets", "h0.triplets", "hi.triplets"];
    for (name, op) in files.iter().zip([&h.matrix, &m.h0.matrix, &m.hi.matrix]) {
        op.write_triplets(out.raw(name)?)?;
    }
    let energies = mode_energies(config, &m.space);
    let rows = (0..m.space.n_modes()).map(|j| {
        let sp = m.space.species_of(j);
        let (_, k) = m.space.grids.locate(j).expect("mode in range");
        let mode = &m.space.grids.grid(sp).modes[k];
        let qn = match &mode.qn {
            QuantumNumbers::Landau(q) => {
                format!("s={} n={} p1={} p3={}", q.s, q.n, num(q.p1), num(q.p3))
            }
            QuantumNumbers::Momentum(q) => {
                format!("p=({}, {}, {})", num(q.p[0]), num(q.p[1]), num(q.p[2]))
            }
        };
        [
            j.to_string(),
            sp.name().to_string(),
            qn,
            num(mode.weight),
            num(energies[j]),
        ]
    });
    out.csv(
        "modes.csv",
        &["mode", "species", "quantum_numbers", "weight", "energy"],
        rows,
    )?;
    let dev = h.matrix.hermiticity_deviation();
    out.json(
        "assemble.json",
        &AssembleOutput {
            dim: m.space.dim(),
            modes: m.space.grids.counts(),
            g,
            g0,
            nnz_h0: m.h0.matrix.nnz(),
            nnz_hi: m.hi.matrix.nnz(),
            nnz_h: h.matrix.nnz(),
            hermiticity_deviation: dev,
            files,
        },
    )?;
    Ok((dev != 0.0).then(|| format!("assembled H not Hermitian (deviation {dev:e})")))
}

#[derive(Serialize)]
struct SpectrumOutput {
    g: f64,
    g0: Option<f64>,
    dim: usize,
    sectors: usize,
    lowest: Vec<f64>,
    sector_spectra: std::collections::BTreeMap<String, Vec<f64>>,
}

pub fn spectrum(config: &ModelConfig, out: &mut Outputs) -> CliResult<Failure> {
    let m = model(config, out)?;
    let (g, g0) = coupling(config)?;
    let h = m.total(g, g0);
    let sectors = sectored_solve(&m, &h)?;
    let mut rows: Vec<(f64, (i32, i32, i32), f64)> = Vec::with_capacity(m.space.dim());
    for s in &sectors {
        let vac = s.states.first() == Some(&0);
        for (i, v) in s.values.iter().enumerate() {
            let overlap = if vac {
                s.vectors[(0, i)].norm_sqr()
            } else {
                0.0
            };
            rows.push((*v, s.charges, overlap));
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out.csv(
        "spectrum.csv",
        &["index", "eigenvalue", "Q", "L_e", "L_mu", "vacuum_overlap"],
        rows.iter().enumerate().map(|(i, (e, (q, le, lm), ov))| {
            [
                i.to_string(),
                num(*e),
                q.to_string(),
                le.to_string(),
                lm.to_string(),
                num(*ov),
            ]
        }),
    )?;
    let k = config.spectral.k;
    out.json(
        "spectrum.json",
        &SpectrumOutput {
            g,
            g0,
            dim: m.space.dim(),
            sectors: sectors.len(),
            lowest: rows.iter().take(k).map(|r| r.0).collect(),
            sector_spectra: sector_spectra(&sectors, k),
        },
    )?;
    Ok(None)
}

pub fn ground_state(config: &ModelConfig, out: &mut Outputs) -> CliResult<Failure> {
    let m = model(config, out)?;
    let (g, g0) = coupling(config)?;
    let r = ground_state_report(&m, g, g0)?;
    out.json("ground_state.json", &r)?;
    out.csv(
        "ground_state_levels.csv",
        &["index", "eigenvalue", "Q", "L_e", "L_mu", "vacuum_overlap"],
        r.low_levels.iter().map(|l| {
            let (q, le, lm) = l.charges;
            [
                l.index.to_string(),
                num(l.eigenvalue),
                q.to_string(),
                le.to_string(),
                lm.to_string(),
                num(l.vacuum_overlap),
            ]
        }),
    )?;
    let below_threshold = g0.map_or(true, |g0| g <= g0);
    Ok(if r.e > ENERGY_TOL {
        Some(format!("ground-state energy {:e} is positive", r.e))
    } else if below_threshold && !(r.gap > 0.0) {
        Some("ground state is not separated from the rest of the spectrum".to_string())
    } else {
        None
    })
}

pub fn commutators(config: &ModelConfig, out: &mut Outputs) -> CliResult<Failure> {
    let m = model(config, out)?;
    let mut reports = Vec::new();
    for (i, ch) in Channel::ALL.into_iter().enumerate() {
        let f = seeded_coeffs(
            m.space.grids.grid(ch.species()).len(),
            config.seed,
            i as u64,
        );
        reports.push(commutator_identities(&m, ch, &f)?);
    }
    out.json("commutators.json", &reports)?;
    let rows = reports.iter().flat_map(|r| {
        r.checks.iter().map(move |c| {
            [
                r.channel.name().to_string(),
                c.part.name().to_string(),
                c.adjoint.to_string(),
                c.expected_zero.to_string(),
                num(c.norm),
                num(c.cubic_norm),
                num(c.deviation),
                c.pass.to_string(),
            ]
        })
    });
    out.csv(
        "commutators.csv",
        &[
            "channel",
            "part",
            "adjoint",
            "expected_zero",
            "norm",
            "cubic_norm",
            "deviation",
            "pass",
        ],
        rows,
    )?;
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().filter(|c| !c.pass).map(move |c| {
                format!(
                    "{}/{}{}",
                    r.channel.name(),
                    c.part.name(),
                    if c.adjoint { "*" } else { "" }
                )
            })
        })
        .collect();
    Ok((!failed.is_empty()).then(|| format!("commutator identities: {}", failed.join(", "))))
}

/// With `control` set the support straddles p^3 = 0 and the run succeeds
/// only when the fit gate rejects it.
pub fn decay_rate(
    config: &ModelConfig,
    out: &mut Outputs,
    channel: DecayChannel,
    control: bool,
) -> CliResult<Failure> {
    let f = if control {
        TestModeFunction::negative_control(config, channel)
    } else {
        TestModeFunction::from_config(config, channel)
    };
    let r = fit_decay(config, &f, &default_time_grid(config, channel))?;
    let stem = format!(
        "decay_{}{}",
        channel.name(),
        if control { "_control" } else { "" }
    );
    out.json(&format!("{stem}.json"), &r)?;
    out.csv(
        &format!("{stem}.csv"),
        &["t", "I"],
        r.times
            .iter()
            .zip(&r.i_values)
            .map(|(t, i)| [num(*t), num(*i)]),
    )?;
    Ok(match (control, r.numeric_pass, r.pass) {
        (false, _, false) => Some(format!(
            "decay gate for {}: exponent {:.3}, residual {:.3}, admissible {}",
            channel.name(),
            r.fitted_exponent,
            r.fit_residual,
            r.admissible
        )),
        (true, true, _) => Some(format!(
            "negative control for {} passed the decay gate",
            channel.name()
        )),
        _ => None,
    })
}
