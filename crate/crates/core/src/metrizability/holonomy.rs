//! Vector fields on `TM`, Lie brackets and the holonomy distribution of a
//! spray: the span of the horizontal frame and its iterated brackets.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::jets::{Jet, TangentSample, Var, MAX_ORDER};
use crate::linalg::{numerical_rank, span_residual};
use crate::spray::Spray;

pub const DEFAULT_HOLONOMY_DEPTH: usize = 3;

/// Relative residual below which the Liouville field counts as inside the span.
const LIOUVILLE_REL_TOL: f64 = 1e-7;

/// A vector field on `TM`, reported as jets of its `2n` components in the
/// coordinate frame `(∂/∂x, ∂/∂y)`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn components(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>>;
}

pub type VectorFieldRef = Arc<dyn VectorField>;

type ComponentFn = Box<dyn Fn(&TangentSample, usize) -> Result<Vec<Jet>> + Send + Sync>;

/// Vector field from a closure.
pub struct FnVectorField {
    n: usize,
    f: ComponentFn,
}

impl FnVectorField {
    pub fn new(
        n: usize,
        f: impl Fn(&TangentSample, usize) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        FnVectorField { n, f: Box::new(f) }
    }
}

impl VectorField for FnVectorField {
    fn dim(&self) -> usize {
        self.n
    }

    fn components(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        (self.f)(p, order)
    }
}

/// The coordinate field `∂/∂z^a`, `a` indexing `x` then `y`.
pub fn coordinate_field(n: usize, a: usize) -> VectorFieldRef {
    Arc::new(FnVectorField::new(n, move |_, order| {
        (0..2 * n)
            .map(|b| Jet::constant(if a == b { 1.0 } else { 0.0 }, 2 * n, order))
            .collect()
    }))
}

/// The Liouville field `𝒞 = y^i ∂/∂y^i`.
pub fn liouville_field(n: usize) -> VectorFieldRef {
    Arc::new(FnVectorField::new(n, move |p, order| {
        (0..2 * n)
            .map(|b| {
                if b < n {
                    Jet::constant(0.0, 2 * n, order)
                } else {
                    Jet::variable(p.y()[b - n], b, 2 * n, order)
                }
            })
            .collect()
    }))
}

/// `δ/δx^i = ∂/∂x^i - N^j_i ∂/∂y^j`. Jets of order `r` need the spray at `r + 1`.
pub fn horizontal_field(spray: &Spray, i: usize) -> VectorFieldRef {
    let spray = spray.clone();
    let n = spray.dim();
    Arc::new(FnVectorField::new(n, move |p, order| {
        let g = spray.coefficients(p, order + 1)?;
        let mut out = Vec::with_capacity(2 * n);
        for b in 0..n {
            out.push(Jet::constant(if b == i { 1.0 } else { 0.0 }, 2 * n, order)?);
        }
        for gj in &g {
            out.push(-gj.partial(Var::Y(i).index(n))?);
        }
        Ok(out)
    }))
}

/// `[V, W]`; jets of order `r` need both fields at order `r + 1`.
pub struct BracketField {
    v: VectorFieldRef,
    w: VectorFieldRef,
}

impl BracketField {
    pub fn new(v: VectorFieldRef, w: VectorFieldRef) -> Self {
        BracketField { v, w }
    }
}

impl VectorField for BracketField {
    fn dim(&self) -> usize {
        self.v.dim()
    }

    fn components(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        let vj = self.v.components(p, order + 1)?;
        let wj = self.w.components(p, order + 1)?;
        let m = vj.len();
        let vt: Vec<Jet> = vj.iter().map(|c| c.truncate(order)).collect();
        let wt: Vec<Jet> = wj.iter().map(|c| c.truncate(order)).collect();
        (0..m)
            .map(|a| {
                let mut acc = Jet::constant(0.0, m, order)?;
                for b in 0..m {
                    acc += &vt[b] * &wj[a].partial(b)?;
                    acc += -(&wt[b] * &vj[a].partial(b)?);
                }
                Ok(acc)
            })
            .collect()
    }
}

/// `[V, W]^a = V^b ∂_b W^a - W^b ∂_b V^a` at `p`.
pub fn lie_bracket(
    v: &dyn VectorField,
    w: &dyn VectorField,
    p: &TangentSample,
) -> Result<DVector<f64>> {
    let vj = v.components(p, 1)?;
    let wj = w.components(p, 1)?;
    let m = vj.len();
    if wj.len() != m || m != 2 * p.dim() {
        return Err(GeomError::Dimension {
            expected: 2 * p.dim(),
            got: wj.len(),
        });
    }
    Ok(DVector::from_fn(m, |a, _| {
        (0..m)
            .map(|b| {
                vj[b].value() * wj[a].derivative(&[b]) - wj[b].value() * vj[a].derivative(&[b])
            })
            .sum()
    }))
}

fn values(f: &dyn VectorField, p: &TangentSample) -> Result<DVector<f64>> {
    let c = f.components(p, 0)?;
    Ok(DVector::from_iterator(c.len(), c.iter().map(Jet::value)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolonomyReport {
    /// Deepest bracket level actually evaluated.
    pub depth: usize,
    pub requested_depth: usize,
    pub span_rank: usize,
    /// Cumulative span rank after each level `0..=depth`.
    pub rank_by_depth: Vec<usize>,
    pub singular_values: Vec<f64>,
    pub liouville_in_span: bool,
    pub liouville_residual: f64,
    /// For each generated vector in order, its distance to the span of the
    /// vectors generated before it.
    pub basis_residuals: Vec<f64>,
}

/// Span of the horizontal frame and its left-normed brackets
/// `[..[[h_i, h_j], h_k]..]` up to `depth` bracket levels.
///
/// Stops early once the span is all of `T_p TM` or the rank did not grow at
/// the last level. Level `k` needs jets of the spray at order `k + 1`, so a
/// level beyond 2 that would actually be evaluated is an order error.
pub fn holonomy_span(
    spray: &Spray,
    p: &TangentSample,
    depth: usize,
    rank_rel_tol: f64,
) -> Result<HolonomyReport> {
    let n = spray.dim();
    if p.dim() != n {
        return Err(GeomError::Dimension {
            expected: n,
            got: p.dim(),
        });
    }
    if !spray.in_domain(p) {
        return Err(GeomError::domain("sample outside the spray's domain"));
    }
    let frame: Vec<VectorFieldRef> = (0..n).map(|i| horizontal_field(spray, i)).collect();
    let mut vectors: Vec<DVector<f64>> = Vec::new();
    let mut basis_residuals = Vec::new();
    let push = |v: DVector<f64>, vectors: &mut Vec<DVector<f64>>, res: &mut Vec<f64>| {
        let basis = as_matrix(vectors, 2 * n);
        res.push(span_residual(&basis, &v, rank_rel_tol));
        vectors.push(v);
    };
    for h in &frame {
        push(values(h.as_ref(), p)?, &mut vectors, &mut basis_residuals);
    }
    let mut rank_by_depth = vec![numerical_rank(&as_matrix(&vectors, 2 * n), rank_rel_tol).rank];
    let mut level: Vec<VectorFieldRef> = frame.clone();
    let mut reached = 0;
    for d in 1..=depth {
        let last = *rank_by_depth.last().expect("level 0 recorded");
        if last == 2 * n || (d >= 2 && last == rank_by_depth[d - 2]) {
            break;
        }
        if d + 1 > MAX_ORDER {
            return Err(GeomError::Order {
                requested: d + 1,
                max: MAX_ORDER,
            });
        }
        let mut next: Vec<VectorFieldRef> = Vec::new();
        for (a, v) in level.iter().enumerate() {
            for (i, h) in frame.iter().enumerate() {
                // At level 1 skip [h_i, h_i] and the antisymmetric duplicate.
                if d == 1 && i <= a {
                    continue;
                }
                next.push(Arc::new(BracketField::new(v.clone(), h.clone())));
            }
        }
        for f in &next {
            push(values(f.as_ref(), p)?, &mut vectors, &mut basis_residuals);
        }
        rank_by_depth.push(numerical_rank(&as_matrix(&vectors, 2 * n), rank_rel_tol).rank);
        level = next;
        reached = d;
    }
    let basis = as_matrix(&vectors, 2 * n);
    let info = numerical_rank(&basis, rank_rel_tol);
    let liouville = values(liouville_field(n).as_ref(), p)?;
    let liouville_residual = span_residual(&basis, &liouville, rank_rel_tol);
    Ok(HolonomyReport {
        depth: reached,
        requested_depth: depth,
        span_rank: info.rank,
        rank_by_depth,
        singular_values: info.singular_values,
        liouville_in_span: liouville_residual <= LIOUVILLE_REL_TOL * liouville.norm(),
        liouville_residual,
        basis_residuals,
    })
}

fn as_matrix(vectors: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(rows, 0);
    }
    DMatrix::from_columns(vectors)
}
