use std::sync::Arc;

use fbk_core::framedlink::AmbientPresentation;
use fbk_core::scenarios::{
    hopf_j_seed, quadric_spec, suspended_hopf, suspended_hopf_spec, QUADRIC_SEED,
};
use fbk_core::tracer::{kappa_of_map, Domain, MapSpec, Target, TraceOptions};
use fbk_core::{Error, Vector, Z2};

/// ((r² − 1)(r² − 4), x₃, x₄): two concentric circles in the plane x₃ = x₄ = 0.
fn two_circles() -> MapSpec {
    MapSpec::new(
        4,
        Domain::Euclidean,
        Target::Euclidean {
            value: Vector::zeros(3),
        },
        Arc::new(|x: &Vector| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            Ok(Vector::from_row_slice(&[
                (r2 - 1.0) * (r2 - 4.0),
                x[2],
                x[3],
            ]))
        }),
    )
}

#[test]
fn two_components_each_of_index_zero() {
    let opts =
        TraceOptions::with_seeds(vec![vec![1.05, 0.0, 0.0, 0.0], vec![0.0, -2.1, 0.01, 0.0]]);
    let r = kappa_of_map(&two_circles(), &opts, &AmbientPresentation::euclidean(4)).unwrap();
    assert_eq!(r.curves.len(), 2);
    for (c, radius) in r.curves.iter().zip([1.0, 2.0]) {
        for p in c.loop_.points() {
            assert!((p[0].hypot(p[1]) - radius).abs() < 1e-8);
        }
        assert!((c.loop_.length() - std::f64::consts::TAU * radius).abs() < 1e-2 * radius);
    }
    assert_eq!(r.report.indices(), vec![Z2::ZERO, Z2::ZERO]);
    assert_eq!(r.report.kappa, Z2::ZERO);
    assert_eq!(r.report.delta, Some(Z2::ZERO));
}

#[test]
fn two_seeds_on_one_circle_are_flagged() {
    let opts = TraceOptions::with_seeds(vec![QUADRIC_SEED.to_vec(), vec![0.0, 0.95, 0.0, 0.0]]);
    let e = kappa_of_map(&quadric_spec(), &opts, &AmbientPresentation::euclidean(4)).unwrap_err();
    assert!(
        matches!(
            e,
            Error::DuplicateComponent {
                first: 0,
                second: 1
            }
        ),
        "{e:?}"
    );
}

#[test]
fn seed_without_solution_is_reported() {
    // Far from the preimage, the first correction leaves the seed radius.
    let opts = TraceOptions::with_seeds(vec![vec![40.0, 0.0, 30.0, 0.0], QUADRIC_SEED.to_vec()]);
    let r = kappa_of_map(&quadric_spec(), &opts, &AmbientPresentation::euclidean(4)).unwrap();
    assert_eq!(r.report.diagnostics.seeds_without_solution, vec![0]);
    assert_eq!(r.curves.len(), 1);
}

#[test]
fn hopf_fibre_over_j() {
    let value = Vector::from_row_slice(&[0.0, 0.0, 1.0, 0.0]);
    let seed = hopf_j_seed();
    assert!((suspended_hopf(&Vector::from_vec(seed.clone())).unwrap() - &value).norm() < 1e-15);
    let r = kappa_of_map(
        &suspended_hopf_spec(value.clone()),
        &TraceOptions::with_seeds(vec![seed]),
        &AmbientPresentation::sphere(5),
    )
    .unwrap();
    assert_eq!(r.report.kappa, Z2::ONE);
    // The fibre is a great circle in the equatorial S³.
    let c = &r.curves[0];
    assert!((c.loop_.length() - std::f64::consts::TAU).abs() < 1e-2);
    for p in c.loop_.points() {
        assert!(p[0].abs() < 1e-9);
        assert!((suspended_hopf(p).unwrap() - &value).norm() < 1e-8);
    }
}

#[test]
fn wrong_dimension_seed_is_rejected() {
    let opts = TraceOptions::with_seeds(vec![vec![1.0, 0.0, 0.0]]);
    assert!(kappa_of_map(&quadric_spec(), &opts, &AmbientPresentation::euclidean(4)).is_err());
    let opts = TraceOptions::with_seeds(vec![QUADRIC_SEED.to_vec()]);
    assert!(matches!(
        kappa_of_map(&quadric_spec(), &opts, &AmbientPresentation::sphere(5)),
        Err(Error::AmbientMismatch(_))
    ));
}
