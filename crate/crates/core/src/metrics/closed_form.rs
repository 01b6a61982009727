//! Printed closed forms for the family and its special cases, transcribed
//! term by term in plain `f64` arithmetic. They share no code with the jet
//! path so that agreement between the two is a genuine cross-check.
//!
//! Notation: `h = c_{ij}x^ix^j + <c',x> + c`, `u = 2c_{rs}x^ry^s + <c',y>`,
//! `v_j = 2c_{rj}x^r + c_j`, `Y = c_{rs}y^ry^s`.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::jets::TangentSample;
use crate::oneform::OneFormCoefficients;

use super::LambdaParams;

struct Terms {
    n: usize,
    h: f64,
    u: f64,
    /// `c_{ij} x^i y^j`
    xcy: f64,
    /// `<c', y>`
    cy: f64,
    /// `c_{rs} y^r y^s`
    ycy: f64,
    /// `v_j = 2c_{rj}x^r + c_j`
    v: Vec<f64>,
    /// `c_{rj} y^r`
    cyv: Vec<f64>,
    /// `c_{rj} x^r`
    cxv: Vec<f64>,
}

fn terms(cf: &OneFormCoefficients, p: &TangentSample) -> Result<Terms> {
    let n = cf.dim();
    if p.dim() != n {
        return Err(GeomError::Dimension {
            expected: n,
            got: p.dim(),
        });
    }
    let (x, y) = (p.x(), p.y());
    let c = cf.c_matrix();
    let cv = cf.c_vector();
    let mut xcx = 0.0;
    let mut xcy = 0.0;
    let mut ycy = 0.0;
    for i in 0..n {
        for j in 0..n {
            xcx += c[(i, j)] * x[i] * x[j];
            xcy += c[(i, j)] * x[i] * y[j];
            ycy += c[(i, j)] * y[i] * y[j];
        }
    }
    let cx: f64 = (0..n).map(|i| cv[i] * x[i]).sum();
    let cy: f64 = (0..n).map(|i| cv[i] * y[i]).sum();
    let h = xcx + cx + cf.c_scalar();
    if h == 0.0 {
        return Err(GeomError::domain("h(x) = 0"));
    }
    let cxv: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|r| c[(r, j)] * x[r]).sum())
        .collect();
    let cyv: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|r| c[(r, j)] * y[r]).sum())
        .collect();
    let v = (0..n).map(|j| 2.0 * cxv[j] + cv[j]).collect();
    Ok(Terms {
        n,
        h,
        u: 2.0 * xcy + cy,
        xcy,
        cy,
        ycy,
        v,
        cyv,
        cxv,
    })
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `P = -(2c_{ij}x^iy^j + <c',y>) / (2h)`.
pub fn family_projective_factor(cf: &OneFormCoefficients, p: &TangentSample) -> Result<f64> {
    let t = terms(cf, p)?;
    Ok(-t.u / (2.0 * t.h))
}

/// `F = sqrt((4hY - 4(c_{ij}x^iy^j)² - 4<c',y>c_{ij}x^iy^j - <c',y>²) / (2h)²)`.
pub fn family_f(cf: &OneFormCoefficients, p: &TangentSample) -> Result<f64> {
    let r = rho(cf, p)?;
    if r <= 0.0 {
        return Err(GeomError::domain("radicand is not positive"));
    }
    Ok(r.sqrt())
}

/// `ρ = (4hY - 4(c_{ij}x^iy^j)² - 4<c',y>c_{ij}x^iy^j - <c',y>²) / (2h)²`.
pub fn rho(cf: &OneFormCoefficients, p: &TangentSample) -> Result<f64> {
    let t = terms(cf, p)?;
    let num = 4.0 * t.h * t.ycy - 4.0 * t.xcy * t.xcy - 4.0 * t.cy * t.xcy - t.cy * t.cy;
    Ok(num / (2.0 * t.h).powi(2))
}

/// `S_0 β = -(2hY - u²) / (2h²)`.
pub fn s0_beta(cf: &OneFormCoefficients, p: &TangentSample) -> Result<f64> {
    let t = terms(cf, p)?;
    Ok(-(2.0 * t.h * t.ycy - t.u * t.u) / (2.0 * t.h * t.h))
}

/// `∂_k ρ` from the hand-derived formula.
pub fn d_rho_dx(cf: &OneFormCoefficients, p: &TangentSample) -> Result<Vec<f64>> {
    let t = terms(cf, p)?;
    let h2 = (2.0 * t.h).powi(2);
    let h3 = (2.0 * t.h).powi(3);
    let num_rho = 4.0 * t.h * t.ycy - 4.0 * t.xcy * t.xcy - 4.0 * t.cy * t.xcy - t.cy * t.cy;
    Ok((0..t.n)
        .map(|k| {
            let first = 4.0 * t.ycy * t.v[k] - 8.0 * t.xcy * t.cyv[k] - 4.0 * t.cy * t.cyv[k];
            first / h2 - 4.0 * t.v[k] * num_rho / h3
        })
        .collect())
}

/// `∂̇_k ρ` from the hand-derived formula.
pub fn d_rho_dy(cf: &OneFormCoefficients, p: &TangentSample) -> Result<Vec<f64>> {
    let t = terms(cf, p)?;
    let cv = cf.c_vector();
    let h2 = (2.0 * t.h).powi(2);
    Ok((0..t.n)
        .map(|k| {
            (8.0 * t.h * t.cyv[k]
                - 8.0 * t.xcy * t.cxv[k]
                - 4.0 * cv[k] * t.xcy
                - 4.0 * t.cy * t.cxv[k]
                - 2.0 * t.cy * cv[k])
                / h2
        })
        .collect())
}

/// Reference form of `ρ_{ij}`, which is half the `y`-Hessian of `ρ`: `(4c_{ij}h - 4(c_{ir}x^r)(c_{jk}x^k) - 2c_ic_{jk}x^k - 2c_jc_{ik}x^k - c_ic_j) / (2h)²`.
pub fn rho_hessian_reference(cf: &OneFormCoefficients, p: &TangentSample) -> Result<DMatrix<f64>> {
    let t = terms(cf, p)?;
    let c = cf.c_matrix();
    let cv = cf.c_vector();
    let h2 = (2.0 * t.h).powi(2);
    Ok(DMatrix::from_fn(t.n, t.n, |i, j| {
        (4.0 * c[(i, j)] * t.h
            - 4.0 * t.cxv[i] * t.cxv[j]
            - 2.0 * cv[i] * t.cxv[j]
            - 2.0 * cv[j] * t.cxv[i]
            - cv[i] * cv[j])
            / h2
    }))
}

/// `G^i = -(2c_{ij}x^iy^j + <c',y>) / (2h) y^i`.
pub fn spray_g(cf: &OneFormCoefficients, p: &TangentSample) -> Result<Vec<f64>> {
    let t = terms(cf, p)?;
    Ok(p.y().iter().map(|yi| -t.u / (2.0 * t.h) * yi).collect())
}

/// `N^i_j = -(v_j y^i + u δ^i_j) / (2h)`, row `i`, column `j`.
pub fn connection_n(cf: &OneFormCoefficients, p: &TangentSample) -> Result<DMatrix<f64>> {
    let t = terms(cf, p)?;
    let y = p.y();
    Ok(DMatrix::from_fn(t.n, t.n, |i, j| {
        -(t.v[j] * y[i] + t.u * delta(i, j)) / (2.0 * t.h)
    }))
}

/// `G^i_{jk} = -(v_j δ^i_k + v_k δ^i_j) / (2h)`, as `out[i][(j, k)]`.
pub fn christoffel(cf: &OneFormCoefficients, p: &TangentSample) -> Result<Vec<DMatrix<f64>>> {
    let t = terms(cf, p)?;
    Ok((0..t.n)
        .map(|i| {
            DMatrix::from_fn(t.n, t.n, |j, k| {
                -(t.v[j] * delta(i, k) + t.v[k] * delta(i, j)) / (2.0 * t.h)
            })
        })
        .collect())
}

/// `R^i_j = (4hY - u²)/(2h)² δ^i_j - (4h c_{rj}y^r - (2c_{rs}x^ry^s + k<c',y>) v_j)/(2h)² y^i`.
///
/// The reference form uses `k = 4`, but only `k = 1` agrees with the jet
/// computation; the parameter lets tests compare the two.
pub fn jacobi_r(cf: &OneFormCoefficients, p: &TangentSample, k: f64) -> Result<DMatrix<f64>> {
    let t = terms(cf, p)?;
    let y = p.y();
    let h2 = (2.0 * t.h).powi(2);
    let diag = (4.0 * t.h * t.ycy - t.u * t.u) / h2;
    Ok(DMatrix::from_fn(t.n, t.n, |i, j| {
        let off = (4.0 * t.h * t.cyv[j] - (2.0 * t.xcy + k * t.cy) * t.v[j]) / h2;
        diag * delta(i, j) - off * y[i]
    }))
}

/// `R^i_i = (n - 1)(4hY - u²)/(2h)²`.
pub fn ricci(cf: &OneFormCoefficients, p: &TangentSample) -> Result<f64> {
    let t = terms(cf, p)?;
    Ok((t.n as f64 - 1.0) * (4.0 * t.h * t.ycy - t.u * t.u) / (2.0 * t.h).powi(2))
}

/// `Ric = -(n - 1)<c',y>² / (4(<c',x> + c)²)` for the family with `c_{ij} = 0`.
pub fn ricci_linear_family(c_vector: &[f64], c_scalar: f64, p: &TangentSample) -> Result<f64> {
    let n = p.dim();
    let cx: f64 = c_vector.iter().zip(p.x()).map(|(a, b)| a * b).sum();
    let cy: f64 = c_vector.iter().zip(p.y()).map(|(a, b)| a * b).sum();
    let l = cx + c_scalar;
    if l == 0.0 {
        return Err(GeomError::domain("<c',x> + c = 0"));
    }
    Ok(-(n as f64 - 1.0) * cy * cy / (4.0 * l * l))
}

/// The two-dimensional member with `c_{11} = c_{22} = 0`, `c_{12} = 1`,
/// `c_1 = c_2 = 1`, `c = 1`, expanded by hand.
pub fn planar_example_f(p: &TangentSample) -> Result<f64> {
    let (x1, x2) = (p.x()[0], p.x()[1]);
    let (y1, y2) = (p.y()[0], p.y()[1]);
    let num = 8.0 * x1 * x2 * y1 * y2 - 4.0 * x1 * x1 * y2 * y2 - 4.0 * x2 * x2 * y1 * y1
        + 4.0 * x1 * y1 * y2
        - 4.0 * x1 * y2 * y2
        - 4.0 * x2 * y1 * y1
        + 4.0 * x2 * y1 * y2
        - y1 * y1
        + 6.0 * y1 * y2
        - y2 * y2;
    let den = 4.0 * (2.0 * x1 * x2 + x1 + x2 + 1.0).powi(2);
    let q = num / den;
    if q <= 0.0 || !q.is_finite() {
        return Err(GeomError::domain("radicand is not positive"));
    }
    Ok(q.sqrt())
}

/// Klein `F_μ` in the form with `μ` under the root,
/// `sqrt(μ ((1+μ|x|²)|y|² - μ<x,y>²) / (1+μ|x|²)²)`; flag curvature 1.
pub fn klein_scaled_f(mu: f64, p: &TangentSample) -> Result<f64> {
    let (x2, y2, xy) = dots(p);
    let w = 1.0 + mu * x2;
    let q = mu * (w * y2 - mu * xy * xy) / (w * w);
    if q <= 0.0 || !q.is_finite() {
        return Err(GeomError::domain("radicand is not positive"));
    }
    Ok(q.sqrt())
}

/// `R^i_j` of the Klein spray `G^i = -μ<x,y>/(1+μ|x|²) y^i`, in closed form.
pub fn klein_jacobi_r(mu: f64, p: &TangentSample) -> DMatrix<f64> {
    let (x2, y2, xy) = dots(p);
    let (x, y) = (p.x(), p.y());
    let n = p.dim();
    let w = 1.0 + mu * x2;
    let diag = (w * y2 - mu * xy * xy) / (w * w);
    DMatrix::from_fn(n, n, |i, j| {
        mu * (diag * delta(i, j) - (w * y[j] - mu * xy * x[j]) / (w * w) * y[i])
    })
}

fn dots(p: &TangentSample) -> (f64, f64, f64) {
    let (x, y) = (p.x(), p.y());
    (
        x.iter().map(|a| a * a).sum(),
        y.iter().map(|a| a * a).sum(),
        x.iter().zip(y).map(|(a, b)| a * b).sum(),
    )
}

/// Reference form of the projective factor of the Randers-type example,
/// `-(2λ<x,y> + <c',y>)/(2H) + (F - λ|y|²/(2F H))`, with `F` the
/// `c_{ij} = λδ_{ij}` family member and `H = λ|x|² + <c',x> + c`.
/// It does not match the true factor; compare [`super::projective_factor_field`].
pub fn randers_reference_factor(params: &LambdaParams, p: &TangentSample) -> Result<f64> {
    let (x2, y2, xy) = dots(p);
    let l = params.lambda;
    let cx: f64 = params.c_vector.iter().zip(p.x()).map(|(a, b)| a * b).sum();
    let cy: f64 = params.c_vector.iter().zip(p.y()).map(|(a, b)| a * b).sum();
    let hh = l * x2 + cx + params.c_scalar;
    let rad = 4.0 * l * hh * y2 - 4.0 * l * l * xy * xy - 4.0 * l * cy * xy - cy * cy;
    if hh == 0.0 || rad <= 0.0 {
        return Err(GeomError::domain("outside the Randers example's domain"));
    }
    let f = (rad / (4.0 * hh * hh)).sqrt();
    Ok(-(2.0 * l * xy + cy) / (2.0 * hh) + (f - l * y2 / (2.0 * f * hh)))
}

/// Reference closed form of the Funk metric. It does not solve the defining
/// equation at `λ`; [`super::funk_metric`] solves that equation directly.
pub fn funk_reference(params: &LambdaParams, p: &TangentSample) -> Result<f64> {
    let (x2, y2, xy) = dots(p);
    let (l, c) = (params.lambda, params.c_scalar);
    let cx: f64 = params.c_vector.iter().zip(p.x()).map(|(a, b)| a * b).sum();
    let cy: f64 = params.c_vector.iter().zip(p.y()).map(|(a, b)| a * b).sum();
    let den = 4.0 * c * l * x2 - c * c;
    let rad = 16.0 * l * l * c * c * (xy * xy - x2 * y2)
        + cy * cy * (cx * cx + 4.0 * l * x2 - c * c)
        - 8.0 * l * c * cy * cx * xy
        + 4.0 * l * c.powi(3) * y2;
    if den == 0.0 || rad < 0.0 {
        return Err(GeomError::domain("reference Funk form undefined here"));
    }
    Ok((cy * cx - 4.0 * l * xy) / den + rad.sqrt() / den)
}
