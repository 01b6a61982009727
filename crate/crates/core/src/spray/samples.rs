//! Built-in sprays used by the non-metrizability examples.

use super::{flat_spray, projective_deform, Spray};
use crate::error::GeomError;
use crate::jets::{Field, Jet};

/// `β = y^1 + y^2` on `R^2`.
pub fn sum_one_form() -> Field {
    Field::from_fn(2, |v| Ok(&v.y[0] + &v.y[1]))
}

/// Base spray of the first example: `G^1 = (y^1)^2 / (2 x^2)`, `G^2 = 0`,
/// defined on `x^2 > 2`.
pub fn example1_base() -> Spray {
    let g1 = Field::from_fn(2, |v| {
        if v.x[1].value() <= 2.0 {
            return Err(GeomError::domain("this spray lives on x^2 > 2"));
        }
        let denom: Jet = v.x[1].scale(2.0);
        v.y[0].square().div(&denom)
    });
    let g2 = Field::from_fn(2, |v| {
        if v.x[1].value() <= 2.0 {
            return Err(GeomError::domain("this spray lives on x^2 > 2"));
        }
        Ok(v.constant(0.0))
    });
    Spray::from_coefficients(vec![g1, g2]).expect("two coefficients in dimension 2")
}

/// `S = S_0 - 2βC` for the non-flat base of the first example and
/// `β = y^1 + y^2`.
pub fn example1() -> Spray {
    projective_deform(&example1_base(), &sum_one_form()).expect("β is 1-homogeneous")
}

/// The flat spray on `x^2 > 0` deformed by `β = y^1 + y^2`.
pub fn example2() -> Spray {
    let beta = Field::from_fn(2, |v| {
        if v.x[1].value() <= 0.0 {
            return Err(GeomError::domain("this spray lives on x^2 > 0"));
        }
        Ok(&v.y[0] + &v.y[1])
    });
    let flat = flat_spray(2).expect("dimension 2");
    projective_deform(&flat, &beta).expect("β is 1-homogeneous")
}

/// The candidate energy `E = e^{4(x^1+x^2)} (y^1+y^2)^2` of the second example.
pub fn example2_energy() -> Field {
    Field::from_fn(2, |v| {
        let s = &v.y[0] + &v.y[1];
        Ok((&v.x[0] + &v.x[1]).scale(4.0).exp() * s.square())
    })
}
