//! Brute-force oracle self-tests and solver/oracle cross-agreement.

use rand_core::{RngCore, SeedableRng};

use sparsepr_core::coefficients::UniquenessVerdict;
use sparsepr_core::multidim::{
    evaluate_direction, recover_multidim, DirectionOutcome, ProjectionDirection, RecoverOptions,
};
use sparsepr_core::oracle::{
    exhaustive_association, exhaustive_turnpike, homometry_check, sweep_agreement,
};
use sparsepr_core::scalar::{Rational, Scalar, Tolerance};
use sparsepr_core::signal::{canonicalize, compute_acf, DeltaAcf, Spike, SpikeSignal};
use sparsepr_core::Error;

const BLOOM_X: [i64; 6] = [0, 1, 4, 10, 12, 17];
const BLOOM_Y: [i64; 6] = [0, 1, 8, 11, 13, 17];

fn rat(v: i64) -> Rational {
    Rational::from_int(v)
}

fn int_diffs(support: &[i64]) -> Vec<i64> {
    let mut out = Vec::new();
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            out.push(support[j] - support[i]);
        }
    }
    out.sort_unstable();
    out
}

fn class_of(support: &[i64]) -> sparsepr_core::EquivalenceClass<Rational> {
    let signal = SpikeSignal::<Rational>::from_int_support(support).unwrap();
    canonicalize(&signal, Tolerance::exact())
}

#[test]
fn bloom_enumeration_finds_both_classes() {
    let classes = exhaustive_turnpike(&int_diffs(&BLOOM_X), 17).unwrap();
    let mut expected = vec![class_of(&BLOOM_X), class_of(&BLOOM_Y)];
    expected.sort_by(|a, b| a.cmp_canonical(b));
    assert_eq!(classes, expected);
}

#[test]
fn small_enumerations() {
    assert_eq!(
        exhaustive_turnpike(&[1, 2, 3], 3).unwrap(),
        vec![class_of(&[0, 1, 3])]
    );
    // Collision case is still enumerable.
    assert_eq!(
        exhaustive_turnpike(&[1, 1, 2], 5).unwrap(),
        vec![class_of(&[0, 1, 2])]
    );
}

#[test]
fn bound_too_small_is_rejected() {
    assert_eq!(
        exhaustive_turnpike(&[1, 2, 3], 2).unwrap_err(),
        Error::InvalidBound
    );
}

#[test]
fn homometry_fixtures() {
    assert!(homometry_check(&BLOOM_X, &BLOOM_Y));
    let translated: Vec<i64> = BLOOM_X.iter().map(|&v| v + 100).collect();
    assert!(homometry_check(&BLOOM_X, &translated));
    assert!(homometry_check(&[0, 1, 3], &[0, 2, 3]));
    assert!(!homometry_check(&[0, 1, 3], &[0, 1, 4]));
}

#[test]
fn homometry_matches_unit_acf_equality() {
    let tol = Tolerance::exact();
    for (x, y) in [
        (&BLOOM_X[..], &BLOOM_Y[..]),
        (&[0, 1, 3][..], &[0, 2, 3][..]),
        (&[0, 1, 3][..], &[0, 1, 4][..]),
    ] {
        let acf_x = compute_acf(&SpikeSignal::<Rational>::from_int_support(x).unwrap(), tol);
        let acf_y = compute_acf(&SpikeSignal::<Rational>::from_int_support(y).unwrap(), tol);
        assert_eq!(homometry_check(x, y), acf_x == acf_y);
    }
}

#[test]
fn sweep_small_range_agrees() {
    let report = sweep_agreement(4, 9).unwrap();
    assert!(report.examined > 0);
    assert!(report.all_agree(), "disagreements: {:?}", report.disagreements);
}

#[test]
fn sweep_covers_two_solution_instances() {
    // Six-point supports up to 17 include the counterexample pairs; both
    // sides must return the same two-class lists there as well.
    let report = sweep_agreement(6, 17).unwrap();
    assert!(report.collision_free >= 8);
    assert!(report.all_agree(), "disagreements: {:?}", report.disagreements);
}

fn sig2d(points: &[(i64, i64)], coefs: &[i64]) -> SpikeSignal<Rational> {
    let spikes = points
        .iter()
        .zip(coefs.iter())
        .map(|(&(x, y), &c)| Spike { pos: vec![rat(x), rat(y)], coef: rat(c) })
        .collect();
    SpikeSignal::new(2, spikes, Tolerance::exact()).unwrap()
}

/// Scans a fixed grid of integer directions and returns the first `count`
/// whose projections are usable, together with their 1-D solutions.
fn usable_directions(
    acf: &DeltaAcf<Rational>,
    count: usize,
) -> Option<(Vec<ProjectionDirection<Rational>>, Vec<SpikeSignal<Rational>>)> {
    let tol = Tolerance::exact();
    let mut dirs = Vec::new();
    let mut sols = Vec::new();
    for a in 1i64..8 {
        for b in -7i64..8 {
            if num_integer::gcd(a, b) != 1 {
                continue;
            }
            let dir = ProjectionDirection::new(vec![rat(a), rat(b)]).unwrap();
            if dirs
                .iter()
                .any(|d: &ProjectionDirection<Rational>| {
                    // Keep the first two linearly independent.
                    dirs.len() < 2
                        && d.components()[0].clone() * rat(b)
                            == d.components()[1].clone() * rat(a)
                })
            {
                continue;
            }
            if let Ok(DirectionOutcome::Usable(class)) = evaluate_direction(acf, &dir, tol) {
                dirs.push(dir);
                sols.push(class.into_representative());
                if dirs.len() == count {
                    return Some((dirs, sols));
                }
            }
        }
    }
    None
}

#[test]
fn association_oracle_matches_recovery() {
    let tol = Tolerance::exact();
    let signal = sig2d(&[(0, 0), (1, 0), (0, 1)], &[1, 2, 3]);
    let acf = compute_acf(&signal, tol);
    let (dirs, sols) = usable_directions(&acf, 2).unwrap();
    let oracle_classes = exhaustive_association(&acf, &sols, &dirs, tol).unwrap();
    assert_eq!(oracle_classes, vec![canonicalize(&signal, tol)]);

    let recovery = recover_multidim(&acf, 5, &RecoverOptions::default(), tol).unwrap();
    match recovery.verdict {
        UniquenessVerdict::Unique(class) => assert_eq!(vec![class], oracle_classes),
        other => panic!("expected unique, got {other:?}"),
    }
}

#[test]
fn association_oracle_handles_equal_coefficients() {
    let tol = Tolerance::exact();
    let signal = sig2d(&[(0, 0), (2, 1), (3, 4), (7, 2)], &[1, 1, 1, 1]);
    let acf = compute_acf(&signal, tol);
    let (dirs, sols) = usable_directions(&acf, 2).unwrap();
    let oracle_classes = exhaustive_association(&acf, &sols, &dirs, tol).unwrap();
    assert_eq!(oracle_classes, vec![canonicalize(&signal, tol)]);
}

#[test]
fn association_oracle_rejects_tampered_inputs() {
    let tol = Tolerance::exact();
    let signal = sig2d(&[(0, 0), (1, 0), (0, 1)], &[1, 2, 3]);
    let acf = compute_acf(&signal, tol);
    let (dirs, mut sols) = usable_directions(&acf, 2).unwrap();
    // Tamper with one projected solution: no association can validate.
    sols[0] = SpikeSignal::new_1d(
        vec![(rat(0), rat(1)), (rat(50), rat(2)), (rat(90), rat(3))],
        tol,
    )
    .unwrap();
    let classes = exhaustive_association(&acf, &sols, &dirs, tol).unwrap();
    assert!(classes.is_empty());
}

#[test]
fn association_oracle_rejects_large_instances() {
    let tol = Tolerance::exact();
    let points: Vec<(i64, i64)> = (0..7).map(|k| (k * k + k, 3 * k + 1)).collect();
    let coefs = vec![1i64; 7];
    let signal = sig2d(&points, &coefs);
    let acf = compute_acf(&signal, tol);
    let dir_a = ProjectionDirection::new(vec![rat(1), rat(0)]).unwrap();
    let dir_b = ProjectionDirection::new(vec![rat(0), rat(1)]).unwrap();
    let sols = vec![signal.clone(), signal.clone()];
    assert_eq!(
        exhaustive_association(&acf, &sols, &[dir_a, dir_b], tol).unwrap_err(),
        Error::TooLarge
    );
}

#[test]
fn random_agreement_between_recovery_and_oracle() {
    let tol = Tolerance::exact();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
    let mut done = 0;
    while done < 20 {
        let n = 3 + (rng.next_u64() % 3) as usize;
        let mut points = std::collections::BTreeSet::new();
        while points.len() < n {
            points.insert((
                (rng.next_u64() % 12) as i64,
                (rng.next_u64() % 12) as i64,
            ));
        }
        let points: Vec<(i64, i64)> = points.into_iter().collect();
        let coefs: Vec<i64> = (0..n).map(|k| 1 + ((k as i64 * 7 + 3) % 5)).collect();
        let signal = sig2d(&points, &coefs);
        let acf = compute_acf(&signal, tol);
        if acf.nonzero_lags().len() != n * n - n {
            continue;
        }
        let Some((dirs, sols)) = usable_directions(&acf, 2) else {
            continue;
        };
        let oracle_classes = exhaustive_association(&acf, &sols, &dirs, tol).unwrap();
        let recovery =
            recover_multidim(&acf, done as u64, &RecoverOptions::default(), tol).unwrap();
        match recovery.verdict {
            UniquenessVerdict::Unique(class) => {
                assert_eq!(oracle_classes, vec![class], "points {points:?}")
            }
            other => panic!("expected unique, got {other:?}"),
        }
        done += 1;
    }
}
