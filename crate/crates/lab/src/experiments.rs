//! The experiments behind `tlsim run`. Each returns its tables plus notes;
//! writing them to disk is left to the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tlsim_core::dressed::{self, BandIndex};
use tlsim_core::ensemble::{self, EnsembleSpec};
use tlsim_core::hilbert::{
    build_h_decoherence_capped, build_h_ensemble_capped, required_n_max, sigma_x_eigenstate, SPIN_DOWN,
};
use tlsim_core::oracle::{fidelity, partial_trace_spin};
use tlsim_core::wigner::{
    coherent_blob, fringe_wavenumber, wigner_interference_analytic, Axis, PhaseSpaceGrid, PhotonState,
    WignerEvaluator,
};
use tlsim_core::{Basis, Error, FockBasis, ModelParams, StateVector, C64};

use crate::cache::EigenCache;
use crate::config::{linspace, Experiment, ExperimentConfig, InitialState};
use crate::output::{col, Cell, Column, Table};
use crate::LabError;

pub struct Outcome {
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub pool: &'a rayon::ThreadPool,
    pub cache: &'a EigenCache,
}

const BANDS: [Column; 4] = [col("g_over_omega", "1"), col("n", "1"), col("sigma", "1"), col("energy", "omega")];
const DYNAMICS: [Column; 6] =
    [col("t", "1/omega"), col("n", "1"), col("sigma", "1"), col("re_a", "1"), col("im_a", "1"), col("norm", "1")];
const SCALING: [Column; 4] = [col("N", "1"), col("mean", "varies"), col("stddev", "varies"), col("ratio", "1")];
const WIGNER: [Column; 3] = [col("x", "1"), col("p", "1"), col("w", "1")];

pub fn run(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    match ctx.cfg.experiment {
        Experiment::Spectrum => spectrum(ctx),
        Experiment::Bands => bands(ctx),
        Experiment::StrongDynamics => strong_dynamics(ctx),
        Experiment::EnsembleScaling => ensemble_scaling(ctx),
        Experiment::Decoherence => decoherence(ctx),
        Experiment::Amplification => amplification(ctx),
        Experiment::Cat => cat(ctx),
        Experiment::WignerMap => wigner_map(ctx),
    }
}

fn single_params(cfg: &ExperimentConfig) -> ModelParams {
    ModelParams { n_atoms: 1, delta_x: Vec::new(), delta_z: Vec::new(), ..cfg.model_params() }
}

fn spectrum(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    let p = single_params(cfg);
    let fock = FockBasis::new(cfg.n_max)?;
    let h = build_h_ensemble_capped(&p, fock, cfg.dimension_cap)?;
    let eig = ctx.cache.get_or_compute(&h, cfg.dimension_cap)?;
    let mut t = Table::new(
        "spectrum.csv",
        &[col("index", "1"), col("n", "1"), col("sigma", "1"), col("energy", "omega"), col("predicted", "omega")],
        "oracle::exact_eigensystem, dressed::band_energy",
    );
    let pairs = (cfg.band_n_max + 1).min(eig.eigenvalues.len() / 2);
    for n in 0..pairs {
        let k = dressed::band_factor(n, p.g_over_omega()) * p.delta;
        let lower: i8 = if k >= 0.0 { -1 } else { 1 };
        for (slot, sigma) in [(0, lower), (1, -lower)] {
            let idx = 2 * n + slot;
            let predicted = dressed::dressed_energy(n, &p) + dressed::band_energy(BandIndex::new(n, sigma), &p);
            t.push([idx.into(), n.into(), sigma.into(), eig.eigenvalues[idx].into(), predicted.into()]);
        }
    }
    Ok(Outcome { tables: vec![t], notes: vec![format!("lowest {} levels of a {}-dimensional Hamiltonian", 2 * pairs, h.dim())] })
}

fn bands(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    let xs = linspace(cfg.g_over_omega_min, cfg.g_over_omega_max, cfg.g_over_omega_steps);
    let base = single_params(cfg);
    let blocks: Vec<Vec<Vec<Cell>>> = ctx.pool.install(|| {
        xs.par_iter()
            .map(|&x| {
                let p = ModelParams { g: x * base.omega, ..base.clone() };
                let mut rows = Vec::new();
                for n in 0..=cfg.band_n_max {
                    for sigma in [1i8, -1] {
                        let e = dressed::band_energy(BandIndex::new(n, sigma), &p);
                        rows.push(vec![x.into(), n.into(), sigma.into(), e.into()]);
                    }
                }
                rows
            })
            .collect()
    });
    let mut t = Table::new("bands.csv", &BANDS, "dressed::band_energy");
    for row in blocks.into_iter().flatten() {
        t.push(row);
    }
    Ok(Outcome { tables: vec![t], notes: Vec::new() })
}

fn initial_single(cfg: &ExperimentConfig, p: &ModelParams, fock: FockBasis) -> Result<StateVector, LabError> {
    let basis = Basis::with_spins(fock, 1);
    if cfg.initial_n > cfg.n_max {
        return Err(LabError::Config(format!("initial_n {} above n_max {}", cfg.initial_n, cfg.n_max)));
    }
    Ok(match cfg.initial {
        InitialState::BareUp => StateVector::basis_state(basis, cfg.initial_n, 0),
        InitialState::BareDown => StateVector::basis_state(basis, cfg.initial_n, 1),
        InitialState::DressedPlus => dressed::dressed_state(cfg.initial_n, 1, p, fock)?,
        InitialState::DressedMinus => dressed::dressed_state(cfg.initial_n, -1, p, fock)?,
    })
}

fn strong_dynamics(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    let p = single_params(cfg);
    let fock = FockBasis::new(cfg.n_max)?;
    let psi0 = initial_single(cfg, &p, fock)?;
    let times = cfg.sample_times();
    let traj = dressed::evolve_amplitudes(&psi0, &times, &p, cfg.band_n_max, cfg.tolerance)?;
    let mut t = Table::new("dynamics.csv", &DYNAMICS, "dressed::evolve_amplitudes");
    let top = cfg.output_n_max.min(cfg.band_n_max);
    for amps in &traj {
        let norm = amps.norm();
        for n in 0..=top {
            for sigma in [1i8, -1] {
                let a = amps.get(BandIndex::new(n, sigma));
                t.push([amps.t.into(), n.into(), sigma.into(), a.re.into(), a.im.into(), norm.into()]);
            }
        }
    }
    let mut tables = vec![t];
    let mut notes = Vec::new();
    if cfg.oracle {
        let h = build_h_ensemble_capped(&p, fock, cfg.dimension_cap)?;
        let eig = ctx.cache.get_or_compute(&h, cfg.dimension_cap)?;
        let rows: Vec<Result<(f64, f64), LabError>> = ctx.pool.install(|| {
            traj.par_iter()
                .map(|amps| {
                    let lab = dressed::lab_frame_state(amps, fock)?;
                    let exact = eig.propagate(&psi0, amps.t)?;
                    Ok((amps.t, fidelity(&lab, &exact)?))
                })
                .collect()
        });
        let mut f = Table::new("oracle_fidelity.csv", &[col("t", "1/omega"), col("fidelity", "1")], "oracle::exact_propagate");
        let mut worst: f64 = 1.0;
        for row in rows {
            let (time, fid) = row?;
            worst = worst.min(fid);
            f.push([time.into(), fid.into()]);
        }
        notes.push(format!("minimum fidelity against exact propagation: {worst:.12}"));
        tables.push(f);
    }
    Ok(Outcome { tables, notes })
}

fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> Result<EnsembleSpec, Error> {
    let coeffs = (0..n)
        .map(|_| {
            let beta_sq: f64 = rng.random_range(0.0..1.0);
            let pa: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let pb: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            (C64::from_polar((1.0 - beta_sq).sqrt(), pa), C64::from_polar(beta_sq.sqrt(), pb))
        })
        .collect();
    EnsembleSpec::new(coeffs)
}

fn ensemble_scaling(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    // drawn sequentially, in size order
    let specs: Vec<EnsembleSpec> = if cfg.random_spec {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        cfg.sizes.iter().map(|&n| random_spec(&mut rng, n)).collect::<Result<_, _>>()?
    } else {
        cfg.sizes.iter().map(|&n| EnsembleSpec::uniform(n, cfg.beta_sq)).collect::<Result<_, _>>()?
    };
    let rows: Vec<Result<ensemble::ScalingRow, Error>> = ctx.pool.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                let one = ensemble::fluctuation_scaling(|_| Ok(spec.clone()), cfg.delta, &[spec.n_atoms()])?;
                Ok(one[0])
            })
            .collect()
    });
    let mut t = Table::new("scaling.csv", &SCALING, "ensemble::fluctuation_scaling");
    let mut points = Vec::new();
    for r in rows {
        let r = r?;
        points.push((r.n_atoms as f64, r.ratio));
        t.push([r.n_atoms.into(), r.mean.into(), r.stddev.into(), r.ratio.into()]);
    }
    let mut notes = Vec::new();
    if points.len() > 1 {
        notes.push(format!("log-log slope of ratio vs N: {:.15}", ensemble::loglog_slope(&points)));
    }
    Ok(Outcome { tables: vec![t], notes })
}

fn decoherence(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    let window = cfg.jt / cfg.j_coupling;
    let mut t = Table::new(
        "decoherence.csv",
        &[col("N", "1"), col("jt", "1"), col("offdiag", "1"), col("envelope", "1"), col("rho_uu", "1")],
        "ensemble::time_averaged_density",
    );
    let mut notes = Vec::new();
    for &n in &cfg.sizes {
        let r = ensemble::time_averaged_density(n, cfg.j_coupling, window)?;
        let env = ensemble::coherence_envelope(n, cfg.j_coupling, window);
        t.push([n.into(), cfg.jt.into(), r.off_diagonal_magnitude().into(), env.into(), r.uu.re.into()]);
        let v = ensemble::leading_order_validity(cfg.omega0, n, cfg.j_coupling);
        if !v.valid {
            notes.push(format!("N = {n}: Omega0/(NJ) = {:.4} exceeds the leading-order threshold", v.omega0_ratio));
        }
    }
    let mut tables = vec![t];
    if cfg.oracle {
        let times = cfg.sample_times();
        let mut o = Table::new(
            "oracle_check.csv",
            &[col("N", "1"), col("t", "1/J"), col("max_deviation", "1")],
            "oracle::exact_propagate, oracle::partial_trace_spin",
        );
        for &n in &cfg.sizes {
            let p = ModelParams { n_atoms: n, delta_x: Vec::new(), delta_z: Vec::new(), ..cfg.model_params() };
            let h = build_h_decoherence_capped(&p, cfg.dimension_cap)?;
            let eig = ctx.cache.get_or_compute(&h, cfg.dimension_cap)?;
            let mut spins = vec![SPIN_DOWN];
            spins.extend(std::iter::repeat_n(sigma_x_eigenstate(-1), n));
            let psi0 = StateVector::product(&nalgebra_one(), &spins)?;
            let devs: Vec<Result<(f64, f64), Error>> = ctx.pool.install(|| {
                times
                    .par_iter()
                    .map(|&time| {
                        let rho = partial_trace_spin(&eig.propagate(&psi0, time)?, 0)?;
                        Ok((time, rho.max_distance(&ensemble::reduced_density_leading(n, cfg.j_coupling, time))))
                    })
                    .collect()
            });
            for d in devs {
                let (time, dev) = d?;
                o.push([n.into(), time.into(), dev.into()]);
            }
        }
        tables.push(o);
    }
    Ok(Outcome { tables, notes })
}

fn nalgebra_one() -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_element(1, C64::new(1.0, 0.0))
}

fn amplification(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    let rows = ensemble::amplification_sweep(&cfg.sizes, cfg.g, cfg.omega, cfg.t_final);
    let mut s = Table::new("scaling.csv", &SCALING, "ensemble::amplification");
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n_atoms as f64, r.mean)).collect();
    for r in rows {
        s.push([r.n_atoms.into(), r.mean.into(), r.stddev.into(), r.ratio.into()]);
    }
    let mut traj = Table::new(
        "amplification.csv",
        &[col("t", "1/omega"), col("re_alpha", "1"), col("im_alpha", "1"), col("xi", "rad"), col("mean_photons", "1")],
        "ensemble::amplification",
    );
    let times = cfg.sample_times();
    for &time in &times {
        let r = ensemble::amplification(cfg.n_atoms, cfg.g, cfg.omega, time);
        traj.push([time.into(), r.alpha_hat.re.into(), r.alpha_hat.im.into(), r.xi.into(), r.mean_photons().into()]);
    }
    let mut notes = Vec::new();
    if points.len() > 1 && points.iter().all(|p| p.1 > 0.0) {
        notes.push(format!("log-log slope of mean photons vs N: {:.15}", ensemble::loglog_slope(&points)));
    }
    let mut tables = vec![s, traj];
    if cfg.oracle {
        let fock = FockBasis::new(cfg.n_max)?;
        let p = ModelParams { delta_x: Vec::new(), delta_z: Vec::new(), ..cfg.model_params() };
        let h = build_h_ensemble_capped(&p, fock, cfg.dimension_cap)?;
        let eig = ctx.cache.get_or_compute(&h, cfg.dimension_cap)?;
        let vac = StateVector::fock(fock, 0)?;
        let psi0 = StateVector::product(vac.amplitudes(), &vec![sigma_x_eigenstate(-1); cfg.n_atoms])?;
        let fids: Vec<Result<(f64, f64), Error>> = ctx.pool.install(|| {
            times
                .par_iter()
                .map(|&time| {
                    let closed = ensemble::amplification(cfg.n_atoms, cfg.g, cfg.omega, time).full_state(fock)?;
                    Ok((time, fidelity(&closed, &eig.propagate(&psi0, time)?)?))
                })
                .collect()
        });
        let mut f = Table::new("oracle_fidelity.csv", &[col("t", "1/omega"), col("fidelity", "1")], "oracle::exact_propagate");
        for r in fids {
            let (time, fid) = r?;
            f.push([time.into(), fid.into()]);
        }
        if cfg.delta != 0.0 {
            notes.push("delta != 0: the closed form is leading order only; fidelities are informative".into());
        }
        tables.push(f);
    }
    Ok(Outcome { tables, notes })
}

fn cat(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    let mut t = Table::new(
        "cat.csv",
        &[
            col("t", "1/omega"),
            col("re_beta", "1"),
            col("im_beta", "1"),
            col("phi1", "rad"),
            col("phi2", "rad"),
            col("xi", "rad"),
            col("norm_sq", "1"),
        ],
        "ensemble::cat_evolution",
    );
    for time in cfg.sample_times() {
        let r = ensemble::cat_evolution(cfg.alpha, cfg.phi, cfg.n_atoms, cfg.g, cfg.omega, time);
        t.push([
            time.into(),
            r.beta_t.re.into(),
            r.beta_t.im.into(),
            r.phi1.into(),
            r.phi2.into(),
            r.xi.into(),
            r.normalization_sq().into(),
        ]);
    }
    // materialize the last state so an undersized n_max is reported
    let last = ensemble::cat_evolution(cfg.alpha, cfg.phi, cfg.n_atoms, cfg.g, cfg.omega, cfg.t_final);
    last.photon_state(FockBasis::new(cfg.n_max)?)?;
    Ok(Outcome { tables: vec![t], notes: Vec::new() })
}

fn wigner_map(ctx: &Context<'_>) -> Result<Outcome, LabError> {
    let cfg = ctx.cfg;
    let fock = FockBasis::new(cfg.n_max)?;
    let r = ensemble::cat_evolution(cfg.alpha, cfg.phi, cfg.n_atoms, cfg.g, cfg.omega, cfg.t_final);
    let psi = r.photon_state(fock)?;
    let grid = PhaseSpaceGrid::zeros((cfg.x_min, cfg.x_max), (cfg.p_min, cfg.p_max), cfg.nx, cfg.np)?;
    let ev = WignerEvaluator::new(PhotonState::Pure(&psi))?;
    ev.validate_grid(&grid)?;
    let cols: Vec<Vec<f64>> = ctx.pool.install(|| {
        (0..grid.nx())
            .into_par_iter()
            .map(|i| (0..grid.np()).map(|j| ev.eval(grid.x(i), grid.p(j))).collect())
            .collect()
    });
    let (g1, g2) = r.branch_amplitudes();
    let n2 = r.normalization_sq();
    let mut w = Table::new("wigner.csv", &WIGNER, "wigner::wigner_from_state");
    let mut wi = Table::new("interference.csv", &WIGNER, "wigner::wigner_interference_analytic");
    let mut residual = grid.like();
    for (i, column) in cols.iter().enumerate() {
        let x = grid.x(i);
        for (j, &val) in column.iter().enumerate() {
            let p = grid.p(j);
            w.push([x.into(), p.into(), val.into()]);
            let analytic = n2 * wigner_interference_analytic(x, p, cfg.alpha, cfg.phi, cfg.n_atoms, cfg.g, cfg.omega, cfg.t_final);
            wi.push([x.into(), p.into(), analytic.into()]);
            residual.values[(i, j)] = val - n2 * (coherent_blob(g1, x, p) + coherent_blob(g2, x, p));
        }
    }
    let mut notes = vec![format!("normalization on grid: {:.10}", {
        let mut full = grid.like();
        for (i, column) in cols.iter().enumerate() {
            for (j, &val) in column.iter().enumerate() {
                full.values[(i, j)] = val;
            }
        }
        full.integral()
    })];
    match fringe_wavenumber(&residual, Axis::X) {
        Ok(f) => notes.push(format!("fringe wavenumber along x: {:.6} (bin width {:.6})", f.wavenumber, f.bin_width)),
        Err(e) => notes.push(format!("fringe wavenumber along x: {e}")),
    }
    Ok(Outcome { tables: vec![w, wi], notes })
}

/// Dry-run estimate returned by `tlsim validate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Largest dense dimension the run will touch.
    pub dimension: usize,
    pub memory_bytes: u64,
    pub runtime_class: &'static str,
}

/// Dimension, memory and truncation checks for `cfg`, with no side effects.
pub fn estimate(cfg: &ExperimentConfig) -> Result<Estimate, LabError> {
    let levels = cfg.n_max + 1;
    let spin_dim = |n: usize| 1usize.checked_shl(n as u32).unwrap_or(usize::MAX);
    let dimension = match cfg.experiment {
        Experiment::Spectrum => 2 * levels,
        Experiment::StrongDynamics => {
            if cfg.oracle {
                (2 * levels).max(2 * (cfg.band_n_max + 1))
            } else {
                2 * (cfg.band_n_max + 1)
            }
        }
        Experiment::Decoherence if cfg.oracle => {
            cfg.sizes.iter().map(|&n| spin_dim(n + 1)).max().unwrap_or(2)
        }
        Experiment::Amplification if cfg.oracle => levels.saturating_mul(spin_dim(cfg.n_atoms)),
        Experiment::Cat | Experiment::WignerMap | Experiment::Amplification => levels,
        _ => 1,
    };
    let dense = matches!(cfg.experiment, Experiment::Spectrum)
        || (cfg.oracle && matches!(cfg.experiment, Experiment::StrongDynamics | Experiment::Decoherence | Experiment::Amplification));
    if dense && dimension > cfg.dimension_cap {
        return Err(Error::Dimension { requested: dimension, cap: cfg.dimension_cap }.into());
    }
    let c = cfg.n_atoms as f64 * cfg.g / cfg.omega;
    let radius = match cfg.experiment {
        Experiment::Cat | Experiment::WignerMap => Some(cfg.alpha.abs() + 2.0 * c),
        Experiment::Amplification => Some(2.0 * c),
        _ => None,
    };
    if let Some(r) = radius {
        let amps = tlsim_core::hilbert::coherent_amplitudes(C64::new(r, 0.0), levels);
        let tail = (1.0 - amps.iter().map(|a| a.norm_sqr()).sum::<f64>()).max(0.0);
        if tail > tlsim_core::hilbert::TAIL_TOLERANCE {
            return Err(Error::Truncation {
                tail_mass: tail,
                tolerance: tlsim_core::hilbert::TAIL_TOLERANCE,
                suggested_n_max: required_n_max(r).max(cfg.n_max + 1),
            }
            .into());
        }
    }
    let memory_bytes = if dense { (dimension as u64).saturating_pow(2).saturating_mul(16 * 3) } else { (dimension as u64) * 16 };
    let work = match cfg.experiment {
        Experiment::WignerMap => (cfg.nx * cfg.np) as f64 * (levels as f64).powi(2),
        Experiment::StrongDynamics => cfg.t_final * (2.0 * (cfg.band_n_max + 1) as f64).powi(2) * 50.0,
        _ if dense => (dimension as f64).powi(3),
        _ => 1e3,
    };
    let runtime_class = if work < 1e8 {
        "seconds"
    } else if work < 1e11 {
        "minutes"
    } else {
        "hours"
    };
    Ok(Estimate { dimension, memory_bytes, runtime_class })
}
