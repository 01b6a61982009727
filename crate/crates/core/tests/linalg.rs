use nalgebra::DMatrix;
use nalgebra::DVector;
use spraylab::linalg::*;

#[test]
fn rank_of_outer_product_is_one() {
    let c = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let m = &c * c.transpose();
    assert_eq!(numerical_rank(&m, 1e-8).rank, 1);
    assert_eq!(numerical_rank(&DMatrix::zeros(3, 3), 1e-8).rank, 0);
    assert_eq!(numerical_rank(&DMatrix::identity(4, 4), 1e-8).rank, 4);
}

#[test]
fn span_residual_detects_membership() {
    let basis = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let inside = DVector::from_vec(vec![2.0, -1.0, 0.0]);
    let outside = DVector::from_vec(vec![0.0, 0.0, 3.0]);
    assert!(span_residual(&basis, &inside, 1e-8) < 1e-12);
    assert!((span_residual(&basis, &outside, 1e-8) - 3.0).abs() < 1e-12);
}

#[test]
fn least_squares_recovers_exact_solution() {
    let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let z = DVector::from_vec(vec![0.3, -0.7]);
    let b = &a * &z;
    let sol = least_squares(&a, &b);
    assert!((sol - z).norm() < 1e-12);
}
