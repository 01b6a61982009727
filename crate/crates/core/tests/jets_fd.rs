use spraylab::jets::*;
use spraylab::jets::{Field, Var};

#[test]
fn quadratic_second_derivative() {
    let f = Field::from_fn(2, |v| Ok(v.y[0].square()));
    for p in [
        TangentSample::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(),
        TangentSample::new(vec![3.0, -2.0], vec![-4.0, 0.5]).unwrap(),
    ] {
        let d = fd_oracle(&f, &p, &[Var::Y(0).index(2), Var::Y(0).index(2)]).unwrap();
        assert!((d - 2.0).abs() < 1e-6, "{d}");
    }
}

#[test]
fn value_for_empty_multi_index() {
    let f = Field::from_fn(2, |v| Ok(&v.x[0] + &v.y[1]));
    let p = TangentSample::new(vec![1.5, 0.0], vec![1.0, 2.0]).unwrap();
    assert_eq!(fd_oracle(&f, &p, &[]).unwrap(), 3.5);
}

#[test]
fn steps_are_documented_roots_of_epsilon() {
    assert!((fd_step(1) - f64::EPSILON.cbrt()).abs() < 1e-20);
    assert!((fd_step(2) - f64::EPSILON.powf(0.25)).abs() < 1e-20);
}
