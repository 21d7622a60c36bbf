use entrel_core::hilbert::{kron, max_abs, partial_trace_operator, trace_norm};
use entrel_core::projections::{
    projection_commutator, pure_state_condition_matrix, separable_condition_matrix,
    SeparableDecomposition, SeparableTerm,
};
use entrel_core::sampling::{
    haar_state, haar_unitary, random_density, random_probabilities, sample_rng, SampleRng,
};
use entrel_core::{
    commutation_residual, leakage_residual, project, refactor_coefficients, Bipartition, CMatrix,
    CompositeSpace, DensityMatrix, Direction, ProjectionScheme, Structure, StructureMap, C64,
};
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `V diag(w) V^dagger` with `w` supported on `range`.
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

/// One scheme of each variant on the cut `{0} | rest`.
fn schemes(space: &CompositeSpace, rng: &mut SampleRng) -> Vec<ProjectionScheme> {
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

fn spaces() -> impl Strategy<Value = CompositeSpace> {
    prop_oneof![
        Just(CompositeSpace::new(vec![2, 2, 2]).unwrap()),
        Just(CompositeSpace::new(vec![2, 3, 2]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn projections_are_idempotent_linear_and_trace_preserving(space in spaces(), seed in any::<u64>(), a in 0.0f64..1.0) {
        let mut rng = sample_rng(seed, 0);
        let rho1 = random_density(&space, &mut rng);
        let rho2 = random_density(&space, &mut rng);
        let mix = DensityMatrix::new(space.clone(), rho1.matrix() * c(a) + rho2.matrix() * c(1.0 - a)).unwrap();
        for (k, scheme) in schemes(&space, &mut rng).iter().enumerate() {
            let p1 = scheme.apply(rho1.matrix()).unwrap();
            let p2 = scheme.apply(rho2.matrix()).unwrap();
            let pp = scheme.apply(&p1).unwrap();
            prop_assert!(max_abs(&(&pp - &p1)) < 1e-12, "variant {k} not idempotent");
            let q1 = rho1.matrix() - &p1;
            let qq = &q1 - scheme.apply(&q1).unwrap();
            prop_assert!(max_abs(&(&qq - &q1)) < 1e-12);
            let lin = scheme.apply(mix.matrix()).unwrap() - (&p1 * c(a) + &p2 * c(1.0 - a));
            prop_assert!(max_abs(&lin) < 1e-12);
            prop_assert!(q1.trace().norm() < 1e-12);
            if k != 1 {
                // the conditional variant dephases the system marginal
                let red = partial_trace_operator(&q1, space.dims(), &[0]);
                prop_assert!(max_abs(&red) < 1e-12, "variant {k}");
            }
        }
    }

    /// A product whose environment factor is the reference state is left
    /// unchanged, so nothing leaks into any other split.
    #[test]
    fn matched_product_has_zero_leakage(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 1);
        let q = CompositeSpace::qubits(1).unwrap();
        let (r1, r2, r3) = (random_density(&q, &mut rng), random_density(&q, &mut rng), random_density(&q, &mut rng));
        let rho = DensityMatrix::new(
            CompositeSpace::qubits(3).unwrap(),
            kron(&kron(r1.matrix(), r2.matrix()), r3.matrix()),
        ).unwrap();
        let cut = Bipartition::new(rho.space().clone(), vec![0], vec![1, 2]).unwrap();
        let env = DensityMatrix::new(cut.e_space(), kron(r2.matrix(), r3.matrix())).unwrap();
        let scheme = ProjectionScheme::reference(cut.clone(), env).unwrap();
        let alt = Bipartition::new(rho.space().clone(), vec![0, 1], vec![2]).unwrap();
        prop_assert!(leakage_residual(&rho, &scheme, &Structure::from(alt.clone())).unwrap().residual <= 1e-12);
        let alt_scheme = ProjectionScheme::reference(
            alt,
            DensityMatrix::new(CompositeSpace::qubits(1).unwrap(), r3.matrix().clone()).unwrap(),
        ).unwrap();
        prop_assert!(commutation_residual(&rho, &scheme, &alt_scheme).unwrap() <= 1e-12);
    }
}

/// With `E ⊂ E'` the leaked operator is a further partial trace of
/// `tr_E Q rho = 0`.
#[test]
fn nested_leakage_vanishes_identically() {
    let space = CompositeSpace::qubits(3).unwrap();
    let scheme = ProjectionScheme::maximally_mixed(Bipartition::new(space.clone(), vec![0, 1], vec![2]).unwrap());
    let alt = Structure::from(Bipartition::new(space.clone(), vec![0], vec![1, 2]).unwrap());
    for k in 0..50 {
        let rho = haar_state(&space, &mut sample_rng(3, k)).to_density();
        assert!(leakage_residual(&rho, &scheme, &alt).unwrap().residual < 1e-13);
    }
}

#[test]
fn grown_system_sees_leakage_generically() {
    let space = CompositeSpace::qubits(3).unwrap();
    let scheme = ProjectionScheme::maximally_mixed(Bipartition::new(space.clone(), vec![0], vec![1, 2]).unwrap());
    let alt = Structure::from(Bipartition::new(space.clone(), vec![0, 1], vec![2]).unwrap());
    let hits = (0..500)
        .filter(|&k| {
            let rho = haar_state(&space, &mut sample_rng(4, k)).to_density();
            leakage_residual(&rho, &scheme, &alt).unwrap().exceeds_tolerance()
        })
        .count();
    assert_eq!(hits, 500);
}

/// Reference schemes on particle regroupings whose references factorize
/// compatibly commute on every state; `[P, P'] rho` then does not depend on
/// `rho`.
#[test]
fn regrouped_mixed_references_commute() {
    let space = CompositeSpace::qubits(3).unwrap();
    let p = ProjectionScheme::maximally_mixed(Bipartition::new(space.clone(), vec![0, 1], vec![2]).unwrap());
    let p2 = ProjectionScheme::maximally_mixed(Bipartition::new(space.clone(), vec![0], vec![1, 2]).unwrap());
    for k in 0..50 {
        let rho = haar_state(&space, &mut sample_rng(5, k)).to_density();
        assert!(commutation_residual(&rho, &p, &p2).unwrap() < 1e-13);
    }
}

#[test]
fn unitary_refactorization_breaks_commutation() {
    let space = CompositeSpace::qubits(3).unwrap();
    let cut = Bipartition::new(space.clone(), vec![0], vec![1, 2]).unwrap();
    let p = ProjectionScheme::maximally_mixed(cut.clone());
    let mut hits = 0;
    for k in 0..200 {
        let mut rng = sample_rng(6, k);
        let u = haar_unitary(8, &mut rng);
        let alt = StructureMap::unitary(u, (2, 4)).unwrap().target(&cut).unwrap();
        let p2 = ProjectionScheme::maximally_mixed(alt);
        let rho = haar_state(&space, &mut rng).to_density();
        let comm = projection_commutator(&rho, &p, &p2).unwrap();
        assert!(comm.trace().norm() < 1e-12);
        if trace_norm(&comm) > 1e-6 {
            hits += 1;
        }
    }
    assert_eq!(hits, 200);
}

fn structure_maps(cut: &Bipartition, rng: &mut SampleRng) -> Vec<StructureMap> {
    let mut maps = vec![];
    if cut.s_particles().len() > 1 {
        maps.push(StructureMap::regrouping(cut.s_particles()[1], Direction::SystemToEnvironment));
    }
    if cut.e_particles().len() > 1 {
        maps.push(StructureMap::regrouping(cut.e_particles()[0], Direction::EnvironmentToSystem));
    }
    let n = cut.space().total_dim();
    maps.push(StructureMap::unitary(haar_unitary(n, rng), (2, n / 2)).unwrap());
    maps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pure_condition_matches_operator_residual(seed in any::<u64>(), s_first in any::<bool>()) {
        let mut rng = sample_rng(seed, 7);
        let space = CompositeSpace::new(vec![2, 3, 2]).unwrap();
        let s = if s_first { vec![0, 1] } else { vec![2] };
        let cut = Bipartition::with_system(space.clone(), s).unwrap();
        let scheme = ProjectionScheme::reference(cut.clone(), random_density(&cut.e_space(), &mut rng)).unwrap();
        let psi = haar_state(&space, &mut rng);
        let rho = psi.to_density();
        for map in structure_maps(&cut, &mut rng) {
            let coeffs = refactor_coefficients(&cut, &map).unwrap();
            let a = pure_state_condition_matrix(&psi, &scheme, &coeffs).unwrap();
            let alt = map.target(&cut).unwrap();
            let q = rho.matrix() - scheme.apply(rho.matrix()).unwrap();
            prop_assert!(max_abs(&(&a - alt.reduce(&q))) < 1e-10);
            prop_assert!(a.trace().norm() < 1e-10);
        }
    }

    #[test]
    fn separable_condition_matches_operator_residual(seed in any::<u64>(), terms in 1usize..4) {
        let mut rng = sample_rng(seed, 8);
        let space = CompositeSpace::qubits(3).unwrap();
        let cut = Bipartition::new(space.clone(), vec![0], vec![1, 2]).unwrap();
        let weights = random_probabilities(terms, &mut rng);
        let terms = weights
            .iter()
            .map(|&weight| SeparableTerm {
                weight,
                rho_s: random_density(&cut.s_space(), &mut rng),
                rho_e: random_density(&cut.e_space(), &mut rng),
            })
            .collect();
        let dec = SeparableDecomposition::new(cut.clone(), terms).unwrap();
        let rho = dec.density();
        let scheme = ProjectionScheme::reference(cut.clone(), random_density(&cut.e_space(), &mut rng)).unwrap();
        for map in structure_maps(&cut, &mut rng) {
            let coeffs = refactor_coefficients(&cut, &map).unwrap();
            let lambda = separable_condition_matrix(&dec, &scheme, &coeffs).unwrap();
            let q = rho.matrix() - scheme.apply(rho.matrix()).unwrap();
            prop_assert!(max_abs(&(&lambda - map.target(&cut).unwrap().reduce(&q))) < 1e-10);
            prop_assert!(lambda.trace().norm() < 1e-10);
        }
    }
}

#[test]
fn single_matched_term_gives_zero_condition() {
    let mut rng = sample_rng(9, 0);
    let space = CompositeSpace::qubits(3).unwrap();
    let cut = Bipartition::new(space, vec![0], vec![1, 2]).unwrap();
    let rho_e = random_density(&cut.e_space(), &mut rng);
    let dec = SeparableDecomposition::new(
        cut.clone(),
        vec![SeparableTerm {
            weight: 1.0,
            rho_s: random_density(&cut.s_space(), &mut rng),
            rho_e: rho_e.clone(),
        }],
    )
    .unwrap();
    let scheme = ProjectionScheme::reference(cut.clone(), rho_e).unwrap();
    let coeffs = refactor_coefficients(&cut, &StructureMap::regrouping(1, Direction::EnvironmentToSystem)).unwrap();
    assert!(max_abs(&separable_condition_matrix(&dec, &scheme, &coeffs).unwrap()) < 1e-12);
}

/// Two terms sharing the system state, with environment states that differ on
/// the particle that later joins the system. The reference is tuned to the
/// nominal weights, so only a weight change exposes a nonzero condition.
#[test]
fn weight_perturbation_breaks_zero_condition() {
    let mut rng = sample_rng(10, 0);
    let q = CompositeSpace::qubits(1).unwrap();
    let space = CompositeSpace::qubits(3).unwrap();
    let cut = Bipartition::new(space, vec![0], vec![1, 2]).unwrap();
    let sigma = random_density(&q, &mut rng);
    let a1 = DensityMatrix::diagonal(q.clone(), &[0.9, 0.1]).unwrap();
    let a2 = DensityMatrix::diagonal(q.clone(), &[0.2, 0.8]).unwrap();
    let r3 = random_density(&q, &mut rng);
    let env = |a: &DensityMatrix| DensityMatrix::new(cut.e_space(), kron(a.matrix(), r3.matrix())).unwrap();
    let decomposition = |l1: f64| {
        SeparableDecomposition::new(
            cut.clone(),
            vec![
                SeparableTerm { weight: l1, rho_s: sigma.clone(), rho_e: env(&a1) },
                SeparableTerm { weight: 1.0 - l1, rho_s: sigma.clone(), rho_e: env(&a2) },
            ],
        )
        .unwrap()
    };
    let l1 = 0.35;
    let reference = DensityMatrix::new(
        cut.e_space(),
        kron(&(a1.matrix() * c(l1) + a2.matrix() * c(1.0 - l1)), r3.matrix()),
    )
    .unwrap();
    let scheme = ProjectionScheme::reference(cut.clone(), reference).unwrap();
    let coeffs = refactor_coefficients(&cut, &StructureMap::regrouping(1, Direction::EnvironmentToSystem)).unwrap();

    let nominal = separable_condition_matrix(&decomposition(l1), &scheme, &coeffs).unwrap();
    assert!(trace_norm(&nominal) < 1e-12);
    let rho = decomposition(l1).density();
    let alt = Structure::from(cut.regroup(1, Direction::EnvironmentToSystem).unwrap());
    assert!(leakage_residual(&rho, &scheme, &alt).unwrap().residual < 1e-12);

    // (l1 + 1e-3, l2) renormalized
    let perturbed = (l1 + 1e-3) / (1.0 + 1e-3);
    let lambda = separable_condition_matrix(&decomposition(perturbed), &scheme, &coeffs).unwrap();
    assert!(trace_norm(&lambda) > 1e-8, "{}", trace_norm(&lambda));
}

#[test]
fn projected_state_is_valid() {
    let space = CompositeSpace::new(vec![2, 3, 2]).unwrap();
    let mut rng = sample_rng(11, 0);
    for scheme in schemes(&space, &mut rng) {
        let rho = random_density(&space, &mut rng);
        let p = project(&rho, &scheme).unwrap();
        assert!(p.eigenvalues()[0] > -1e-12);
    }
}
