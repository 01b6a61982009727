use nalgebra::DMatrix;
use nalgebra::DVector;
use spraylab::jets::TangentSample;
use spraylab::metrics::*;
use spraylab::metrics::{family_metric, klein_metric};
use spraylab::oneform::OneFormCoefficients;

#[test]
fn identity_pullback() {
    let cf = affine_pullback_klein(&AffineMap::identity(2));
    assert_eq!(cf.c_matrix(), &(DMatrix::identity(2, 2) * 0.5));
    assert_eq!(cf.c_scalar(), 0.5);
    match affine_realizability(&cf) {
        Realizability::Realizable { map, scale } => {
            assert!((map.a() - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-14);
            assert!(map.b().norm() < 1e-14);
            assert!((scale - 1.0).abs() < 1e-14);
        }
        other => panic!("{other:?}"),
    }
    let p = TangentSample::new(vec![0.3, -0.2], vec![1.0, 0.5]).unwrap();
    let (a, b) = (
        family_metric(&cf).value(&p).unwrap(),
        klein_metric(2, 1.0).value(&p).unwrap(),
    );
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn planar_example_is_not_realizable() {
    let cf = OneFormCoefficients::new(&[0.0, 1.0, 1.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
    assert!(matches!(
        affine_realizability(&cf),
        Realizability::NotRealizable {
            witness: RealizabilityWitness::CIndefinite { .. }
        }
    ));
}

#[test]
fn singular_and_sign_witnesses() {
    let sing = OneFormCoefficients::new(&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0], 1.0).unwrap();
    assert!(matches!(
        affine_realizability(&sing),
        Realizability::NotRealizable {
            witness: RealizabilityWitness::CSingular { .. }
        }
    ));
    // 2c - ½|c'|² < 0 with C = δ forces t < 0.
    let sign = OneFormCoefficients::new(&[1.0, 0.0, 0.0, 1.0], &[2.0, 2.0], 0.5).unwrap();
    assert!(matches!(
        affine_realizability(&sign),
        Realizability::NotRealizable {
            witness: RealizabilityWitness::ScaleSign { .. }
        }
    ));
}

#[test]
fn rescaled_klein_is_realizable() {
    let cf = OneFormCoefficients::klein(3, 1.0).unwrap();
    match affine_realizability(&cf) {
        Realizability::Realizable { scale, .. } => assert!((scale - 0.5).abs() < 1e-14),
        other => panic!("{other:?}"),
    }
}

#[test]
fn singular_map_rejected() {
    assert!(AffineMap::new(DMatrix::zeros(2, 2), DVector::zeros(2)).is_err());
}
