//! The experiment pipelines behind `entrel run`.

use rayon::prelude::*;

use entrel_core::correlations::entanglement_entropy;
use entrel_core::dynamics::models::{build_hamiltonians, initial_state, InitialCondition, QbmModel};
use entrel_core::dynamics::{
    evolve_exact, integrate_caldeira_leggett, integrate_recoilless, position_momentum_ops,
    projection_derivative_compare, MasterEqParams, SystemOperators, Trajectory,
};
use entrel_core::hilbert::{kron, partial_trace_operator, trace_norm, CMatrix, CVector};
use entrel_core::projections::{
    pure_state_condition_matrix, separable_condition_matrix, SeparableDecomposition, SeparableTerm,
};
use entrel_core::sampling::{
    haar_state, haar_unitary, random_density, random_probabilities, sample_rng, SampleRng,
};
use entrel_core::{
    commutation_residual, leakage_residual, refactor_coefficients, Bipartition, CompositeSpace,
    DensityMatrix, Direction, ProjectionScheme, StateVector, Structure, StructureMap, C64,
};

use crate::config::{Experiment, ExperimentConfig, Reference, Refactor, StateFamily};
use crate::output::ResultRecord;
use crate::CliError;

pub fn run(config: &ExperimentConfig) -> Result<ResultRecord, CliError> {
    let violations = config.check();
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    match config.experiment {
        Experiment::Lemma1 => lemma1(config),
        Experiment::Lemma2 => lemma2(config),
        Experiment::ErScan => er_scan(config),
        Experiment::AppendixVerify => appendix_verify(config),
        Experiment::QbmCompare => qbm_compare(config),
    }
}

/// Runs `f` for every sample index on its own RNG stream; rows come back in
/// sample order whatever the thread count.
fn per_sample<F>(config: &ExperimentConfig, f: F) -> Result<Vec<Vec<f64>>, CliError>
where
    F: Fn(usize, &mut SampleRng) -> Result<Vec<f64>, CliError> + Sync,
{
    (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(config.seed, k as u64);
            let mut row = vec![k as f64];
            row.extend(f(k, &mut rng)?);
            Ok(row)
        })
        .collect()
}

struct Setup {
    space: CompositeSpace,
    cut: Bipartition,
}

impl Setup {
    fn new(config: &ExperimentConfig) -> Result<Self, CliError> {
        let space = CompositeSpace::new(config.dims.clone())?;
        let cut = Bipartition::with_system(space.clone(), config.system.clone())?;
        Ok(Self { space, cut })
    }

    fn alt_factor_dims(&self, config: &ExperimentConfig) -> (usize, usize) {
        let ds = self.space.dim_of(&config.alt_system);
        (ds, self.space.total_dim() / ds)
    }

    /// The alternative structure for one sample. Draws from `rng` only for
    /// unitary re-factorizations.
    fn alt_structure(&self, config: &ExperimentConfig, rng: &mut SampleRng) -> Result<Structure, CliError> {
        Ok(match config.refactor {
            Refactor::Regroup => {
                Structure::from(Bipartition::with_system(self.space.clone(), config.alt_system.clone())?)
            }
            Refactor::Unitary => {
                let u = haar_unitary(self.space.total_dim(), rng);
                StructureMap::unitary(u, self.alt_factor_dims(config))?.target(&self.cut)?
            }
        })
    }

    fn state(&self, family: StateFamily, rng: &mut SampleRng) -> StateVector {
        match family {
            StateFamily::Haar => haar_state(&self.space, rng),
            StateFamily::Product => product_state(&self.space, rng),
        }
    }
}

/// Product of Haar-random single-particle pure states.
pub fn product_state(space: &CompositeSpace, rng: &mut SampleRng) -> StateVector {
    let mut v = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for &d in space.dims() {
        let f = haar_state(&CompositeSpace::new(vec![d]).expect("dimension >= 2"), rng);
        v = kron(&v, &CMatrix::from_column_slice(d, 1, f.amplitudes().as_slice()));
    }
    StateVector::normalized(space.clone(), CVector::from_column_slice(v.as_slice()))
        .expect("product of unit vectors")
}

fn scheme_for(structure: Structure, reference: Reference, rho: &DensityMatrix) -> Result<ProjectionScheme, CliError> {
    Ok(match reference {
        Reference::Mixed => ProjectionScheme::maximally_mixed(structure),
        Reference::Matched => {
            let env = structure.reduce_environment(rho.matrix());
            let space = structure.cut().e_space();
            ProjectionScheme::reference(structure, DensityMatrix::new(space, env)?)?
        }
    })
}

fn lemma1(config: &ExperimentConfig) -> Result<ResultRecord, CliError> {
    let setup = Setup::new(config)?;
    let rows = per_sample(config, |_, rng| {
        let alt = setup.alt_structure(config, rng)?;
        let rho = setup.state(config.state, rng).to_density();
        let scheme = scheme_for(Structure::from(setup.cut.clone()), config.reference, &rho)?;
        let report = leakage_residual(&rho, &scheme, &alt)?;
        Ok(vec![report.residual, report.frobenius])
    })?;
    Ok(ResultRecord::new(config, &["sample", "residual", "frobenius"], rows, vec![]))
}

fn lemma2(config: &ExperimentConfig) -> Result<ResultRecord, CliError> {
    let setup = Setup::new(config)?;
    let rows = per_sample(config, |_, rng| {
        let alt = setup.alt_structure(config, rng)?;
        let rho = setup.state(config.state, rng).to_density();
        let scheme = scheme_for(Structure::from(setup.cut.clone()), config.reference, &rho)?;
        let scheme_alt = scheme_for(alt, config.reference, &rho)?;
        Ok(vec![commutation_residual(&rho, &scheme, &scheme_alt)?])
    })?;
    Ok(ResultRecord::new(config, &["sample", "residual"], rows, vec![]))
}

fn er_scan(config: &ExperimentConfig) -> Result<ResultRecord, CliError> {
    let setup = Setup::new(config)?;
    let regrouped = Bipartition::with_system(setup.space.clone(), config.alt_system.clone())?;
    let rows = per_sample(config, |_, rng| {
        let u = haar_unitary(setup.space.total_dim(), rng);
        let psi = setup.state(config.state, rng);
        let map = StructureMap::unitary(u, setup.alt_factor_dims(config))?;
        let (mapped, new_cut) = entrel_core::apply_structure_map(&psi, &setup.cut, &map)?;
        Ok(vec![
            entanglement_entropy(&psi, &setup.cut)?,
            entanglement_entropy(&mapped, &new_cut)?,
            entanglement_entropy(&psi, &regrouped)?,
        ])
    })?;
    Ok(ResultRecord::new(
        config,
        &["sample", "entropy_original", "entropy_unitary", "entropy_regrouped"],
        rows,
        vec![],
    ))
}

/// The single-particle regrouping turning `system` into `alt`, if any.
pub fn regrouping_between(system: &[usize], alt: &[usize]) -> Option<StructureMap> {
    let added: Vec<usize> = alt.iter().copied().filter(|p| !system.contains(p)).collect();
    let removed: Vec<usize> = system.iter().copied().filter(|p| !alt.contains(p)).collect();
    match (added.as_slice(), removed.as_slice()) {
        ([p], []) => Some(StructureMap::regrouping(*p, Direction::EnvironmentToSystem)),
        ([], [p]) => Some(StructureMap::regrouping(*p, Direction::SystemToEnvironment)),
        _ => None,
    }
}

fn appendix_verify(config: &ExperimentConfig) -> Result<ResultRecord, CliError> {
    let setup = Setup::new(config)?;
    let cut = &setup.cut;
    let fixed_map = match config.refactor {
        Refactor::Regroup => Some(regrouping_between(&config.system, &config.alt_system).ok_or_else(|| {
            CliError::Usage("appendix-verify with refactor = regroup needs alt_system to differ from system by one particle".into())
        })?),
        Refactor::Unitary => None,
    };
    let run_kind = |kind: usize| {
        per_sample(config, |_, rng| {
            let map = match &fixed_map {
                Some(m) => m.clone(),
                None => StructureMap::unitary(haar_unitary(setup.space.total_dim(), rng), setup.alt_factor_dims(config))?,
            };
            let coeffs = refactor_coefficients(cut, &map)?;
            let alt = map.target(cut)?;
            let (rho, coefficient_matrix, scheme) = if kind == 0 {
                let psi = haar_state(&setup.space, rng);
                let rho = psi.to_density();
                let scheme = scheme_for(Structure::from(cut.clone()), config.reference, &rho)?;
                let a = pure_state_condition_matrix(&psi, &scheme, &coeffs)?;
                (rho, a, scheme)
            } else {
                let weights = random_probabilities(config.terms, rng);
                let terms = weights
                    .into_iter()
                    .map(|weight| SeparableTerm {
                        weight,
                        rho_s: random_density(&cut.s_space(), rng),
                        rho_e: random_density(&cut.e_space(), rng),
                    })
                    .collect();
                let dec = SeparableDecomposition::new(cut.clone(), terms)?;
                let rho = dec.density();
                let scheme = scheme_for(Structure::from(cut.clone()), config.reference, &rho)?;
                let l = separable_condition_matrix(&dec, &scheme, &coeffs)?;
                (rho, l, scheme)
            };
            let q = rho.matrix() - scheme.apply(rho.matrix())?;
            let operator = alt.reduce(&q);
            Ok(vec![
                kind as f64,
                entrel_core::hilbert::max_abs(&(&coefficient_matrix - &operator)),
                coefficient_matrix.trace().norm(),
                trace_norm(&operator),
            ])
        })
    };
    let mut rows = run_kind(0)?;
    let offset = rows.len();
    for mut row in run_kind(1)? {
        row[0] += offset as f64;
        rows.push(row);
    }
    Ok(ResultRecord::new(
        config,
        &["sample", "kind", "coefficient_vs_operator", "trace_identity", "residual"],
        rows,
        vec![],
    ))
}

/// Model described by a `qbm-compare` config.
pub fn qbm_model(config: &ExperimentConfig) -> QbmModel {
    let mut model = QbmModel::uniform(config.n_s, config.n_e);
    model.system_cutoff = config.system_cutoff;
    model.bath_cutoff = config.bath_cutoff;
    model.couplings = vec![config.kappa; config.n_e];
    model.pair_coupling = config.pair_coupling;
    model.trap_frequency = config.trap_frequency;
    model.max_dim = config.max_dim;
    if config.decoupled {
        model.decoupled()
    } else {
        model
    }
}

/// Initial system state: a seed-dependent superposition of the two lowest
/// Fock levels of the first system particle, the others in their ground
/// level.
pub fn initial_system_state(model: &QbmModel, seed: u64) -> Result<DensityMatrix, CliError> {
    let d = model.system_cutoff;
    let low = haar_state(&CompositeSpace::new(vec![2])?, &mut sample_rng(seed, 0));
    let mut v = CVector::zeros(d);
    v[0] = low.amplitudes()[0];
    v[1] = low.amplitudes()[1];
    let mut m = &v * v.adjoint();
    for _ in 1..model.n_s() {
        let mut ground = CMatrix::zeros(d, d);
        ground[(0, 0)] = C64::new(1.0, 0.0);
        m = kron(&m, &ground);
    }
    Ok(DensityMatrix::new(CompositeSpace::new(vec![d; model.n_s()])?, m)?)
}

fn qbm_compare(config: &ExperimentConfig) -> Result<ResultRecord, CliError> {
    if config.n_e < 2 {
        return Err(CliError::Usage("qbm-compare needs n_e >= 2 to absorb an oscillator".into()));
    }
    let model = qbm_model(config);
    model.validate()?;
    let beta = config.beta;
    let hs = build_hamiltonians(&model)?;
    let rho_s = initial_system_state(&model, config.seed)?;
    let rho0 = initial_state(&model, beta, &InitialCondition::AbsorbedOscillatorProduct { rho_s: rho_s.clone() })?;
    let times: Vec<f64> = (0..config.steps)
        .map(|k| config.t_max * k as f64 / (config.steps - 1) as f64)
        .collect();
    let exact = evolve_exact(&rho0, &hs.total, &times, model.hbar)?;

    let scheme = ProjectionScheme::reference(hs.original.structure(), model.bath_thermal_state(beta)?)?;
    let absorbed = hs.absorbed.as_ref().expect("n_e >= 2");
    let scheme_alt = ProjectionScheme::reference(absorbed.structure(), model.remaining_bath_thermal_state(beta)?)?;
    let cmp = projection_derivative_compare(&exact, &scheme, &scheme_alt)?;

    let system: Vec<usize> = (0..model.n_s()).collect();
    let reduced: Vec<CMatrix> = exact
        .states
        .iter()
        .map(|s| partial_trace_operator(s, exact.space.dims(), &system))
        .collect();
    let h_total = hs.total.matrix();
    let mut columns = vec!["t", "state_distance", "derivative_distance", "reduced_purity", "energy"];
    let mut rows: Vec<Vec<f64>> = (0..times.len())
        .map(|k| {
            vec![
                times[k],
                cmp.state_distance[k],
                cmp.derivative_distance[k],
                (&reduced[k] * &reduced[k]).trace().re,
                (&exact.states[k] * h_total).trace().re,
            ]
        })
        .collect();

    let truncation = exact.truncation();
    let mut notes = vec![
        ("total_dim".to_string(), model.total_dim().unwrap_or(0) as f64),
        ("max_top_occupation".to_string(), truncation.top_occupation.iter().cloned().fold(0.0, f64::max)),
        ("unsafe_truncation".to_string(), if truncation.unsafe_truncation { 1.0 } else { 0.0 }),
    ];

    if model.n_s() == 1 {
        let (x, p) = position_momentum_ops(
            model.system_cutoff,
            model.system_masses[0],
            model.system_basis_frequency,
            model.hbar,
        )?;
        let ops = SystemOperators::new(&x, &p)?;
        let params = MasterEqParams {
            mass: model.system_masses[0],
            gamma: config.gamma,
            temperature: config.temperature.unwrap_or(1.0 / beta),
            k_b: 1.0,
            hbar: model.hbar,
        };
        let h_s = model.system_hamiltonian()?;
        let recoilless = integrate_recoilless(&rho_s, &h_s, &ops, &params, &times)?;
        let cl = integrate_caldeira_leggett(&rho_s, &h_s, &ops, &params, &times)?;
        let distance = |traj: &Trajectory, k: usize| 0.5 * trace_norm(&(&traj.states[k] - &reduced[k]));
        let (rec_min, cl_min) = (recoilless.min_eigenvalues(), cl.min_eigenvalues());
        for (k, row) in rows.iter_mut().enumerate() {
            row.extend([distance(&recoilless, k), distance(&cl, k), rec_min[k], cl_min[k]]);
        }
        columns.extend([
            "recoilless_distance",
            "caldeira_leggett_distance",
            "recoilless_min_eigenvalue",
            "caldeira_leggett_min_eigenvalue",
        ]);
        let worst = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
        notes.push(("recoilless_max_trace_error".into(), worst(recoilless.trace_errors())));
        notes.push(("caldeira_leggett_max_trace_error".into(), worst(cl.trace_errors())));
    }
    Ok(ResultRecord::new(config, &columns, rows, notes))
}
