//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::PathBuf;

use entrel_cli::experiments::{initial_system_state, product_state, qbm_model};
use entrel_cli::{ExperimentConfig, Format};
use entrel_core::dynamics::evolve_exact;
use entrel_core::dynamics::master::{
    integrate_caldeira_leggett, integrate_recoilless, MasterEqParams, SystemOperators,
};
use entrel_core::dynamics::models::{
    build_hamiltonians, initial_state, position_momentum_ops, InitialCondition, QbmModel,
};
use entrel_core::hilbert::{kron, max_abs, partial_trace_operator};
use entrel_core::projections::{
    pure_state_condition_matrix, separable_condition_matrix, SeparableDecomposition,
    SeparableTerm,
};
use entrel_core::sampling::{
    haar_state, haar_unitary, random_density, random_probabilities, sample_rng, SampleRng,
};
use entrel_core::{
    apply_structure_map, commutation_residual, entanglement_entropy, leakage_residual,
    mutual_information, refactor_coefficients, Bipartition, CMatrix, CompositeSpace,
    DensityMatrix, Direction, HermitianOperator, ProjectionScheme, Structure, StructureMap, C64,
};
use entrel_validation::{fraction_above, max_of, min_of, run_check, Outcome};
use rayon::prelude::*;

const GENERIC: f64 = 1e-6;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/configs")
}

fn shipped(name: &str) -> String {
    std::fs::read_to_string(configs_dir().join(name)).expect("shipped config")
}

/// Replaces `key = value` lines of a config text, appending keys it lacked.
fn with_overrides(text: &str, overrides: &[(&str, &str)]) -> String {
    let mut out: Vec<String> = text
        .lines()
        .filter(|l| {
            let key = l.split('=').next().unwrap_or("").trim();
            !overrides.iter().any(|(k, _)| *k == key)
        })
        .map(str::to_string)
        .collect();
    out.extend(overrides.iter().map(|(k, v)| format!("{k} = {v}")));
    out.join("\n") + "\n"
}

// ---------------------------------------------------------------------------
// 1

fn supported_density(v: &CMatrix, range: std::ops::Range<usize>, rng: &mut SampleRng) -> CMatrix {
    let n = v.nrows();
    let w = random_probabilities(range.len(), rng);
    let mut d = CMatrix::zeros(n, n);
    for (k, i) in range.enumerate() {
        d[(i, i)] = c(w[k]);
    }
    v * d * v.adjoint()
}

fn rank_projector(v: &CMatrix, range: std::ops::Range<usize>) -> CMatrix {
    let cols = v.columns(range.start, range.len());
    &cols * cols.adjoint()
}

/// Reference, conditional and environment-projector schemes on `{0} | rest`.
fn random_schemes(space: &CompositeSpace, rng: &mut SampleRng) -> Vec<ProjectionScheme> {
    let cut = Bipartition::with_system(space.clone(), vec![0]).unwrap();
    let (ds, de) = (cut.s_dim(), cut.e_dim());
    let reference = ProjectionScheme::reference(cut.clone(), random_density(&cut.e_space(), rng)).unwrap();
    let w = haar_unitary(ds, rng);
    let v = haar_unitary(de, rng);
    let half = de / 2;
    let branches = vec![
        (
            rank_projector(&w, 0..1),
            DensityMatrix::new(cut.e_space(), supported_density(&v, 0..half, rng)).unwrap(),
        ),
        (
            rank_projector(&w, 1..ds),
            DensityMatrix::new(cut.e_space(), supported_density(&v, half..de, rng)).unwrap(),
        ),
    ];
    let conditional = ProjectionScheme::conditional(cut.clone(), branches).unwrap();
    let v = haar_unitary(de, rng);
    let projectors = vec![rank_projector(&v, 0..1), rank_projector(&v, 1..3), rank_projector(&v, 3..de)];
    let env = ProjectionScheme::environment_projectors(cut, projectors).unwrap();
    vec![reference, conditional, env]
}

/// Worst idempotence, linearity, trace and (reference variant) partial-trace
/// defects over one sample.
fn identity_defects(space: &CompositeSpace, seed: u64, k: u64) -> [f64; 4] {
    let mut rng = sample_rng(seed, k);
    let rho1 = random_density(space, &mut rng);
    let rho2 = random_density(space, &mut rng);
    let a = random_probabilities(2, &mut rng)[0];
    let mix = rho1.matrix() * c(a) + rho2.matrix() * c(1.0 - a);
    let mut worst = [0f64; 4];
    for (v, scheme) in random_schemes(space, &mut rng).iter().enumerate() {
        let p1 = scheme.apply(rho1.matrix()).unwrap();
        let p2 = scheme.apply(rho2.matrix()).unwrap();
        let pp = scheme.apply(&p1).unwrap();
        let lin = scheme.apply(&mix).unwrap() - (&p1 * c(a) + &p2 * c(1.0 - a));
        let q = rho1.matrix() - &p1;
        worst[0] = worst[0].max(max_abs(&(&pp - &p1)));
        worst[1] = worst[1].max(max_abs(&lin));
        worst[2] = worst[2].max(q.trace().norm());
        if v == 0 {
            worst[3] = worst[3].max(max_abs(&partial_trace_operator(&q, space.dims(), &[0])));
        }
    }
    worst
}

fn criterion_projection_identities() -> (bool, String) {
    let mut worst = [0f64; 4];
    for dims in [vec![2, 2, 2], vec![2, 3, 2]] {
        let space = CompositeSpace::new(dims).unwrap();
        let per: Vec<[f64; 4]> = (0..1000u64)
            .into_par_iter()
            .map(|k| identity_defects(&space, 101, k))
            .collect();
        for d in per {
            for i in 0..4 {
                worst[i] = worst[i].max(d[i]);
            }
        }
    }
    (
        worst.iter().all(|&w| w <= 1e-12),
        format!(
            "idempotence {:.1e}, linearity {:.1e}, trace {:.1e}, partial trace {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

// ---------------------------------------------------------------------------
// 2 and 3

fn qubits3() -> CompositeSpace {
    CompositeSpace::qubits(3).unwrap()
}

fn cut(s: Vec<usize>, e: Vec<usize>) -> Bipartition {
    Bipartition::new(qubits3(), s, e).unwrap()
}

/// `rho1 ⊗ rho2 ⊗ rho3` with the scheme on `{0}|{1,2}` referencing
/// `rho2 ⊗ rho3` and the alternative on `{0,1}|{2}` referencing `rho3`.
fn matched_product_fixture(seed: u64) -> (DensityMatrix, ProjectionScheme, ProjectionScheme) {
    let mut rng = sample_rng(seed, 0);
    let q = CompositeSpace::qubits(1).unwrap();
    let (r1, r2, r3) = (random_density(&q, &mut rng), random_density(&q, &mut rng), random_density(&q, &mut rng));
    let rho = DensityMatrix::new(qubits3(), kron(&kron(r1.matrix(), r2.matrix()), r3.matrix())).unwrap();
    let env = DensityMatrix::new(CompositeSpace::qubits(2).unwrap(), kron(r2.matrix(), r3.matrix())).unwrap();
    let scheme = ProjectionScheme::reference(cut(vec![0], vec![1, 2]), env).unwrap();
    let alt = ProjectionScheme::reference(cut(vec![0, 1], vec![2]), r3).unwrap();
    (rho, scheme, alt)
}

/// Oscillator-bath state with the absorbed oscillator already thermal, on
/// three qubit-truncated particles.
fn thermal_absorbed_fixture() -> (DensityMatrix, ProjectionScheme, Structure) {
    let mut model = QbmModel::uniform(1, 2);
    model.system_cutoff = 2;
    model.bath_cutoff = 2;
    let beta = 1.0;
    let hs = build_hamiltonians(&model).unwrap();
    let rho_s = random_density(&CompositeSpace::qubits(1).unwrap(), &mut sample_rng(5, 0));
    let rho = initial_state(&model, beta, &InitialCondition::AbsorbedOscillatorProduct { rho_s }).unwrap();
    let scheme = ProjectionScheme::reference(hs.original.structure(), model.bath_thermal_state(beta).unwrap()).unwrap();
    (rho, scheme, hs.absorbed.expect("two oscillators").structure())
}

fn haar_density(space: &CompositeSpace, seed: u64, k: u64) -> DensityMatrix {
    haar_state(space, &mut sample_rng(seed, k)).to_density()
}

fn criterion_leakage() -> (bool, String) {
    let space = qubits3();
    let scheme = ProjectionScheme::maximally_mixed(cut(vec![0], vec![1, 2]));
    let alt = Structure::from(cut(vec![0, 1], vec![2]));
    let forward_scheme = ProjectionScheme::maximally_mixed(cut(vec![0, 1], vec![2]));
    let forward_alt = Structure::from(cut(vec![0], vec![1, 2]));
    let pairs: Vec<(f64, f64)> = (0..10_000u64)
        .into_par_iter()
        .map(|k| {
            let rho = haar_density(&space, 202, k);
            (
                leakage_residual(&rho, &scheme, &alt).unwrap().residual,
                leakage_residual(&rho, &forward_scheme, &forward_alt).unwrap().residual,
            )
        })
        .collect();
    let residuals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let forward_max = max_of(pairs.iter().map(|p| p.1));
    let fraction = fraction_above(&residuals, GENERIC);

    let (rho, product_scheme, product_alt) = matched_product_fixture(9);
    let product = leakage_residual(&rho, &product_scheme, product_alt.structure()).unwrap().residual;
    let (rho, thermal_scheme, thermal_alt) = thermal_absorbed_fixture();
    let thermal = leakage_residual(&rho, &thermal_scheme, &thermal_alt).unwrap().residual;
    (
        fraction >= 0.999 && product <= 1e-12 && thermal <= 1e-12,
        format!(
            "fraction above 1e-6 {fraction:.4} (min {:.3e}); product fixture {product:.1e}; thermal fixture {thermal:.1e}; nested orientation max {forward_max:.1e}",
            min_of(residuals.iter().copied())
        ),
    )
}

fn criterion_commutation() -> (bool, String) {
    let space = qubits3();
    let p = ProjectionScheme::maximally_mixed(cut(vec![0], vec![1, 2]));
    let p_alt = ProjectionScheme::maximally_mixed(cut(vec![0, 1], vec![2]));
    let residuals: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|k| commutation_residual(&haar_density(&space, 303, k), &p, &p_alt).unwrap())
        .collect();
    let fraction = fraction_above(&residuals, GENERIC);
    let (rho, scheme, alt) = matched_product_fixture(10);
    let fixture = commutation_residual(&rho, &scheme, &alt).unwrap();
    (
        fraction >= 0.999 && fixture <= 1e-12,
        format!(
            "fraction above 1e-6 {fraction:.4} (max {:.1e}); matched product fixture {fixture:.1e}",
            max_of(residuals.iter().copied())
        ),
    )
}

// ---------------------------------------------------------------------------
// 4

fn maps_for(cut: &Bipartition, k: u64, rng: &mut SampleRng) -> StructureMap {
    let n = cut.space().total_dim();
    match k % 3 {
        0 if cut.s_particles().len() > 1 => StructureMap::regrouping(cut.s_particles()[1], Direction::SystemToEnvironment),
        1 if cut.e_particles().len() > 1 => StructureMap::regrouping(cut.e_particles()[0], Direction::EnvironmentToSystem),
        _ => StructureMap::unitary(haar_unitary(n, rng), (2, n / 2)).unwrap(),
    }
}

/// Coefficient-level difference and trace of the condition matrix for one
/// pure input.
fn pure_condition_sample(k: u64) -> (f64, f64) {
    let mut rng = sample_rng(404, k);
    let space = CompositeSpace::new(vec![2, 3, 2]).unwrap();
    let s = if k % 2 == 0 { vec![0, 1] } else { vec![2] };
    let cut = Bipartition::with_system(space.clone(), s).unwrap();
    let scheme = ProjectionScheme::reference(cut.clone(), random_density(&cut.e_space(), &mut rng)).unwrap();
    let psi = haar_state(&space, &mut rng);
    let map = maps_for(&cut, k / 2, &mut rng);
    let coeffs = refactor_coefficients(&cut, &map).unwrap();
    let a = pure_state_condition_matrix(&psi, &scheme, &coeffs).unwrap();
    let rho = psi.to_density();
    let q = rho.matrix() - scheme.apply(rho.matrix()).unwrap();
    let operator = map.target(&cut).unwrap().reduce(&q);
    (max_abs(&(&a - operator)), a.trace().norm())
}

fn separable_condition_sample(k: u64) -> (f64, f64) {
    let mut rng = sample_rng(405, k);
    let cut = Bipartition::new(qubits3(), vec![0], vec![1, 2]).unwrap();
    let n_terms = 1 + (k % 3) as usize;
    let weights = random_probabilities(n_terms, &mut rng);
    let terms = weights
        .iter()
        .map(|&weight| SeparableTerm {
            weight,
            rho_s: random_density(&cut.s_space(), &mut rng),
            rho_e: random_density(&cut.e_space(), &mut rng),
        })
        .collect();
    let dec = SeparableDecomposition::new(cut.clone(), terms).unwrap();
    let scheme = ProjectionScheme::reference(cut.clone(), random_density(&cut.e_space(), &mut rng)).unwrap();
    let map = maps_for(&cut, k, &mut rng);
    let coeffs = refactor_coefficients(&cut, &map).unwrap();
    let lambda = separable_condition_matrix(&dec, &scheme, &coeffs).unwrap();
    let rho = dec.density();
    let q = rho.matrix() - scheme.apply(rho.matrix()).unwrap();
    let operator = map.target(&cut).unwrap().reduce(&q);
    (max_abs(&(&lambda - operator)), lambda.trace().norm())
}

fn criterion_condition_matrices() -> (bool, String) {
    let pure: Vec<(f64, f64)> = (0..1000u64).into_par_iter().map(pure_condition_sample).collect();
    let sep: Vec<(f64, f64)> = (0..1000u64).into_par_iter().map(separable_condition_sample).collect();
    let pure_diff = max_of(pure.iter().map(|p| p.0));
    let pure_trace = max_of(pure.iter().map(|p| p.1));
    let sep_diff = max_of(sep.iter().map(|p| p.0));
    let sep_trace = max_of(sep.iter().map(|p| p.1));
    (
        [pure_diff, pure_trace, sep_diff, sep_trace].iter().all(|&v| v <= 1e-10),
        format!("pure: diff {pure_diff:.1e}, trace {pure_trace:.1e}; separable: diff {sep_diff:.1e}, trace {sep_trace:.1e}"),
    )
}

// ---------------------------------------------------------------------------
// 5

fn criterion_entanglement_relativity() -> (bool, String) {
    let space = qubits3();
    let from = Bipartition::new(space.clone(), vec![0], vec![1, 2]).unwrap();
    let samples: Vec<(f64, f64)> = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(505, k);
            let psi = product_state(&space, &mut rng);
            let u = haar_unitary(8, &mut rng);
            let (out, new_cut) = apply_structure_map(&psi, &from, &StructureMap::unitary(u, (2, 4)).unwrap()).unwrap();
            let unitary = entanglement_entropy(&out, &new_cut).unwrap();
            let mut regrouped: f64 = 0.0;
            let moves = [
                (vec![0], vec![1, 2], 1, Direction::EnvironmentToSystem),
                (vec![0], vec![1, 2], 2, Direction::EnvironmentToSystem),
                (vec![0, 1], vec![2], 0, Direction::SystemToEnvironment),
                (vec![0, 1], vec![2], 1, Direction::SystemToEnvironment),
            ];
            for (s, e, p, dir) in moves {
                let cut = Bipartition::new(space.clone(), s, e).unwrap();
                let (out, new_cut) = apply_structure_map(&psi, &cut, &StructureMap::regrouping(p, dir)).unwrap();
                regrouped = regrouped.max(entanglement_entropy(&out, &new_cut).unwrap());
            }
            (unitary, regrouped)
        })
        .collect();
    let unitary: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let fraction = fraction_above(&unitary, GENERIC);
    let regrouped_max = max_of(samples.iter().map(|s| s.1));
    (
        fraction >= 0.999 && regrouped_max <= 1e-10,
        format!(
            "unitary fraction above 1e-6 {fraction:.4} (min {:.3}); regrouped max {regrouped_max:.1e}",
            min_of(unitary.iter().copied())
        ),
    )
}

// ---------------------------------------------------------------------------
// 6

fn criterion_dephasing() -> (bool, String) {
    let d = 16;
    let space = CompositeSpace::new(vec![d]).unwrap();
    let positions: Vec<f64> = (0..d).map(|j| -1.5 + 0.2 * j as f64).collect();
    let x = CMatrix::from_fn(d, d, |i, j| if i == j { c(positions[i]) } else { c(0.0) });
    let zero = HermitianOperator::new(space.clone(), CMatrix::zeros(d, d)).unwrap();
    let x = HermitianOperator::new(space.clone(), x).unwrap();
    let ops = SystemOperators::new(&x, &zero).unwrap();
    let rho0 = DensityMatrix::new(space, CMatrix::from_element(d, d, c(1.0 / d as f64))).unwrap();
    let params = MasterEqParams::natural(0.05, 1.0);
    let rate = params.decoherence_rate();
    let times: Vec<f64> = (0..50).map(|k| 2.0 * k as f64 / 49.0).collect();
    let traj = integrate_recoilless(&rho0, &zero, &ops, &params, &times).unwrap();
    let mut worst: f64 = 0.0;
    for (t, state) in times.iter().zip(&traj.states) {
        for i in 0..d {
            for j in 0..d {
                let dx = positions[i] - positions[j];
                let exact = (-rate * dx * dx * t).exp() / d as f64;
                worst = worst.max((state[(i, j)] - c(exact)).norm() / exact);
            }
        }
    }
    let slowest = (-rate * 9.0 * times[49]).exp();
    (
        worst <= 1e-6,
        format!("max relative error {worst:.1e} (smallest decay factor {slowest:.3})"),
    )
}

// ---------------------------------------------------------------------------
// 7

fn default_qbm_config() -> ExperimentConfig {
    ExperimentConfig::parse(&shipped("qbm-compare.conf")).unwrap()
}

fn criterion_conservation() -> (bool, String) {
    let config = default_qbm_config();
    let model = qbm_model(&config);
    let beta = config.beta;
    let times: Vec<f64> = (0..config.steps)
        .map(|k| config.t_max * k as f64 / (config.steps - 1) as f64)
        .collect();
    let rho_s = initial_system_state(&model, config.seed).unwrap();
    let (x, p) = position_momentum_ops(model.system_cutoff, model.system_masses[0], model.system_basis_frequency, model.hbar).unwrap();
    let ops = SystemOperators::new(&x, &p).unwrap();
    let params = MasterEqParams {
        mass: model.system_masses[0],
        gamma: config.gamma,
        temperature: config.temperature.unwrap_or(1.0 / beta),
        k_b: 1.0,
        hbar: model.hbar,
    };
    let h_s = model.system_hamiltonian().unwrap();
    let rec = integrate_recoilless(&rho_s, &h_s, &ops, &params, &times).unwrap();
    let cl = integrate_caldeira_leggett(&rho_s, &h_s, &ops, &params, &times).unwrap();
    let trace_err = max_of(rec.trace_errors().into_iter().chain(cl.trace_errors()));
    let herm = max_of(rec.hermiticity_defects().into_iter().chain(cl.hermiticity_defects()));
    let min_eig = min_of(rec.min_eigenvalues());

    let hs = build_hamiltonians(&model).unwrap();
    let rho0 = initial_state(&model, beta, &InitialCondition::AbsorbedOscillatorProduct { rho_s }).unwrap();
    let exact = evolve_exact(&rho0, &hs.total, &times, model.hbar).unwrap();
    // tr(rho^2) and tr(rho H) as elementwise sums, both operands Hermitian
    let h_t = hs.total.matrix().transpose();
    let purity = |s: &CMatrix| s.norm_squared();
    let energy = |s: &CMatrix| s.component_mul(&h_t).sum().re;
    let (purity0, energy0) = (purity(rho0.matrix()), energy(rho0.matrix()));
    let purity_drift = max_of(exact.states.iter().map(|s| (purity(s) - purity0).abs()));
    let energy_drift = max_of(exact.states.iter().map(|s| (energy(s) - energy0).abs()));
    (
        trace_err <= 1e-9 && herm <= 1e-10 && min_eig >= -1e-9 && purity_drift <= 1e-10 && energy_drift <= 1e-10,
        format!(
            "trace {trace_err:.1e}, hermiticity {herm:.1e}, recoilless min eigenvalue {min_eig:.1e}, purity drift {purity_drift:.1e}, energy drift {energy_drift:.1e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 8

fn criterion_split_correlations() -> (bool, String) {
    let mut model = QbmModel::uniform(2, 2);
    model.system_cutoff = 3;
    model.bath_cutoff = 3;
    let mut rng = sample_rng(808, 0);
    let q = CompositeSpace::new(vec![3]).unwrap();
    let weights = random_probabilities(3, &mut rng);
    let terms = weights
        .iter()
        .map(|&w| (w, random_density(&q, &mut rng), random_density(&q, &mut rng)))
        .collect();
    let rho = initial_state(&model, 1.0, &InitialCondition::SplitSystemMixture { terms }).unwrap();
    let hs = build_hamiltonians(&model).unwrap();
    let original = mutual_information(&rho, &hs.original.cut).unwrap();
    let absorbed = mutual_information(&rho, &hs.absorbed.as_ref().unwrap().cut).unwrap();
    let moved = mutual_information(&rho, &hs.moved.as_ref().unwrap().cut).unwrap();
    (
        original.abs() <= 1e-10 && absorbed.abs() <= 1e-10 && moved > 1e-4,
        format!("original {original:.1e}, absorbed {absorbed:.1e}, moved {moved:.3e}"),
    )
}

// ---------------------------------------------------------------------------
// 9

fn criterion_projection_comparison() -> (bool, String) {
    let config = default_qbm_config();
    assert_eq!(config.total_dim(), 384);
    let record = entrel_cli::run(&config).unwrap();
    let series = record.column("state_distance").unwrap();
    let start = series[0];
    let later = max_of(series[1..].iter().copied());
    let decoupled = ExperimentConfig::parse(&shipped("qbm-compare-decoupled.conf")).unwrap();
    assert_eq!(decoupled.total_dim(), 384);
    let flat = max_of(entrel_cli::run(&decoupled).unwrap().column("state_distance").unwrap());
    (
        start <= 1e-10 && later > 1e-4 && flat <= 1e-8,
        format!("t=0 {start:.1e}, later max {later:.3e}, decoupled max {flat:.1e}"),
    )
}

// ---------------------------------------------------------------------------
// 10

/// Every shipped config, shrunk to keep the double run short.
fn determinism_configs() -> Vec<(String, ExperimentConfig)> {
    let mut names: Vec<String> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".conf"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let text = shipped(&name);
            let text = if text.contains("qbm-compare") {
                with_overrides(&text, &[("t_max", "0.5"), ("steps", "6")])
            } else {
                with_overrides(&text, &[("samples", "200")])
            };
            let config = ExperimentConfig::parse(&text).unwrap();
            (name, config)
        })
        .collect()
}

fn render_both(config: &ExperimentConfig, threads: usize) -> (String, String) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let record = pool.install(|| entrel_cli::run(config)).unwrap();
    (record.render(Format::Csv), record.render(Format::Json))
}

fn criterion_determinism() -> (bool, String) {
    let mut mismatched = vec![];
    let configs = determinism_configs();
    let mut experiments: Vec<&str> = configs.iter().map(|(_, c)| c.experiment.id()).collect();
    experiments.sort();
    experiments.dedup();
    for (name, config) in &configs {
        let first = render_both(config, 1);
        let second = render_both(config, 4);
        if first != second {
            mismatched.push(name.clone());
        }
    }
    (
        mismatched.is_empty() && experiments.len() == entrel_cli::Experiment::ALL.len(),
        format!(
            "{} configs covering {} experiments, 1 vs 4 workers, CSV and JSON; mismatched: {:?}",
            configs.len(),
            experiments.len(),
            mismatched
        ),
    )
}

fn main() {
    let outcomes: Vec<Outcome> = vec![
        run_check(1, "projection identities", 30, criterion_projection_identities),
        run_check(2, "leakage across a grown system", 60, criterion_leakage),
        run_check(3, "commutation of regrouped mixed references", 60, criterion_commutation),
        run_check(4, "coefficient-level conditions", 120, criterion_condition_matrices),
        run_check(5, "entanglement under refactorization", 30, criterion_entanglement_relativity),
        run_check(6, "dephasing closed form", 10, criterion_dephasing),
        run_check(7, "conservation over the default run", 60, criterion_conservation),
        run_check(8, "split-dependent initial correlations", 10, criterion_split_correlations),
        run_check(9, "projection comparison, default composite", 300, criterion_projection_comparison),
        run_check(10, "byte-identical reruns", 300, criterion_determinism),
    ];
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("acceptance: {} of {} passed", outcomes.len() - failed.len(), outcomes.len());
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
