use std::fmt;
use std::sync::Arc;

use super::jet::{Jet, MAX_ORDER};
use super::sample::TangentSample;
use crate::error::{GeomError, Result};

/// A scalar function on (an open subset of) the slit tangent bundle that can
/// report its Taylor jet at a sample.
///
/// Variables are ordered `x^1..x^n, y^1..y^n`; use [`Var`] to index them.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    /// Jet of the field at `p` up to total order `order`.
    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet>;
}

/// Coordinate selector on `TM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl Var {
    pub fn index(self, n: usize) -> usize {
        match self {
            Var::X(i) => i,
            Var::Y(i) => n + i,
        }
    }
}

/// Index list for [`Jet::derivative`] from a slice of [`Var`]s.
pub fn multi_index(n: usize, vars: &[Var]) -> Vec<usize> {
    vars.iter().map(|v| v.index(n)).collect()
}

/// Shared handle to a scalar field.
#[derive(Clone)]
pub struct Field(Arc<dyn ScalarField>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(dim = {})", self.0.dim())
    }
}

impl Field {
    pub fn new(f: impl ScalarField + 'static) -> Self {
        Field(Arc::new(f))
    }

    /// A field given by jet arithmetic on the coordinate jets.
    pub fn from_fn(n: usize, f: impl Fn(&JetVars) -> Result<Jet> + Send + Sync + 'static) -> Self {
        Field::new(FnField { n, f: Box::new(f) })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Field::from_fn(n, move |v| Ok(v.constant(value)))
    }

    pub fn zero(n: usize) -> Self {
        Field::constant(n, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        self.0.jet(p, order)
    }

    pub fn value(&self, p: &TangentSample) -> Result<f64> {
        Ok(self.0.jet(p, 0)?.value())
    }

    pub fn in_domain(&self, p: &TangentSample) -> bool {
        self.value(p).map(f64::is_finite).unwrap_or(false)
    }
}

impl ScalarField for Field {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        self.0.jet(p, order)
    }
}

type JetFn = Box<dyn Fn(&JetVars) -> Result<Jet> + Send + Sync>;

struct FnField {
    n: usize,
    f: JetFn,
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        let vars = JetVars::new(p, order)?;
        (self.f)(&vars)
    }
}

/// Coordinate jets at a sample, the seed of every closed-form field.
pub struct JetVars {
    pub x: Vec<Jet>,
    pub y: Vec<Jet>,
    order: usize,
}

impl JetVars {
    pub fn new(p: &TangentSample, order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(GeomError::Order {
                requested: order,
                max: MAX_ORDER,
            });
        }
        let n = p.dim();
        let m = 2 * n;
        let x = (0..n)
            .map(|i| Jet::variable(p.x()[i], i, m, order))
            .collect::<Result<Vec<_>>>()?;
        let y = (0..n)
            .map(|i| Jet::variable(p.y()[i], n + i, m, order))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetVars { x, y, order })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn constant(&self, value: f64) -> Jet {
        self.x[0].lift(value)
    }

    /// `Σ w_i x^i`.
    pub fn dot_x(&self, w: &[f64]) -> Jet {
        linear(&self.x, w, self.constant(0.0))
    }

    /// `Σ w_i y^i`.
    pub fn dot_y(&self, w: &[f64]) -> Jet {
        linear(&self.y, w, self.constant(0.0))
    }

    /// `Σ_ij m_ij a^i b^j` for a row-major `n x n` matrix.
    pub fn bilinear(&self, m: &[f64], a: &[Jet], b: &[Jet]) -> Jet {
        let n = self.dim();
        let mut acc = self.constant(0.0);
        for i in 0..n {
            let row = linear(b, &m[i * n..(i + 1) * n], self.constant(0.0));
            acc += &a[i] * &row;
        }
        acc
    }
}

fn linear(v: &[Jet], w: &[f64], zero: Jet) -> Jet {
    let mut acc = zero;
    for (vi, &wi) in v.iter().zip(w) {
        if wi != 0.0 {
            acc += vi.scale(wi);
        }
    }
    acc
}

/// Public entry point: the jet of `f` at `p`, with order and dimension checks.
pub fn jet_eval(f: &dyn ScalarField, p: &TangentSample, order: usize) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(GeomError::Order {
            requested: order,
            max: MAX_ORDER,
        });
    }
    if f.dim() != p.dim() {
        return Err(GeomError::Dimension {
            expected: f.dim(),
            got: p.dim(),
        });
    }
    f.jet(p, order)
}

/// Euler relation `y^i ∂f/∂y^i - k f` at `p`, the degree-`k` homogeneity defect.
pub fn euler_defect(f: &dyn ScalarField, p: &TangentSample, degree: f64) -> Result<f64> {
    let n = p.dim();
    let jet = f.jet(p, 1)?;
    let euler: f64 = (0..n)
        .map(|i| p.y()[i] * jet.derivative(&[Var::Y(i).index(n)]))
        .sum();
    Ok(euler - degree * jet.value())
}
