use qrobust::dynamics::evolve_free;
use qrobust::optimizers::seeded_rng;
use qrobust::problems::{
    check_consensus, free_drift_analysis, ConsensusBackend, ConsensusParams, ConsensusProblem, RobustProblem,
    EXACT_CONSENSUS_TOL,
};
use qrobust::quantum_state::{partial_trace, ComplexMatrix, DensityOperator};
use rand::Rng;

fn problem(backend: ConsensusBackend) -> ConsensusProblem {
    ConsensusProblem::new(ConsensusParams {
        backend,
        ..ConsensusParams::default()
    })
    .unwrap()
}

fn random_genome(rng: &mut impl Rng) -> Vec<f64> {
    (0..600).map(|_| rng.random_range(0.0..=1.0)).collect()
}

#[test]
fn target_reduces_to_equal_plus_states() {
    let target = DensityOperator::uniform_superposition(8);
    let plus = DensityOperator::uniform_superposition(2);
    for k in 0..3 {
        let r = partial_trace(&target, &[2, 2, 2], k).unwrap();
        assert!((r.matrix() - plus.matrix()).max_abs() < 1e-12);
    }
    let check = check_consensus(&target, &[2, 2, 2], EXACT_CONSENSUS_TOL).unwrap();
    assert!(check.is_consensus);
}

#[test]
fn target_commutes_with_free_hamiltonian_and_is_stationary() {
    let h0 = ConsensusParams::default().free_hamiltonian();
    let target = DensityOperator::uniform_superposition(8);
    assert!(ComplexMatrix::commutator(&h0, target.matrix()).max_abs() < 1e-12);
    let later = evolve_free(&h0, &target, 20.0);
    assert!((later.matrix() - target.matrix()).max_abs() < 1e-9);
    let drift = free_drift_analysis(&target, &h0, 20.0, 0.2).unwrap();
    assert!(drift.max_pairwise().iter().all(|d| *d < 1e-9));
}

#[test]
fn non_consensus_states_drift_apart() {
    let p = problem(ConsensusBackend::StateVector);
    let h0 = p.params().free_hamiltonian();
    let drift = free_drift_analysis(p.initial_state(), &h0, 20.0, 0.2).unwrap();
    assert!((drift.pairwise[1][0] - 1.0).abs() < 1e-12);
    assert!(drift.max_pairwise().iter().any(|d| *d > 0.1));
}

#[test]
fn closed_evolution_preserves_purity_and_backends_agree() {
    let sv = problem(ConsensusBackend::StateVector);
    let dm = problem(ConsensusBackend::Density);
    let mut rng = seeded_rng(21);
    for _ in 0..100 {
        let g = random_genome(&mut rng);
        let theta = [rng.random_range(0.98..=1.02), rng.random_range(0.98..=1.02)];
        let a = sv.final_state(&g, &theta).unwrap();
        let b = dm.final_state(&g, &theta).unwrap();
        let (herm, trace, min_eig) = DensityOperator::invariant_residuals(b.matrix());
        assert!(herm < 1e-9 && trace < 1e-9 && min_eig > -1e-8);
        assert!((b.purity() - 1.0).abs() < 1e-9);
        assert!((a.matrix() - b.matrix()).max_abs() < 1e-9);
        let fa = sv.fitness(&g, &theta).unwrap();
        let fb = dm.fitness(&g, &theta).unwrap();
        assert!((fa - fb).abs() < 1e-9);
        assert!((0.0..=1.0 + 1e-12).contains(&fa));
    }
}

#[test]
fn genome_layout_and_bounds() {
    let p = problem(ConsensusBackend::StateVector);
    assert_eq!(p.dim(), 600);
    assert_eq!(p.channels(), 6);
    let mut g = vec![0.5; 600];
    g[599] = 1.5;
    assert!(p.control(&g).is_err());
    assert!(p.fitness(&vec![0.5; 599], &[1.0, 1.0]).is_err());
}
