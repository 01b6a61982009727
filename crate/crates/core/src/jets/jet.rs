//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] stores the Taylor coefficients `f_α / α!` of a scalar function
//! around an expansion point, for every multi-index `α` of total degree at
//! most the jet's order. Monomials are laid out in graded order, so a jet of
//! order `k` is a prefix of the coefficient vector of a jet of order `k + 1`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{GeomError, Result};

/// Highest total derivative order carried by a jet.
pub const MAX_ORDER: usize = 3;

/// A monomial of degree at most [`MAX_ORDER`], stored as a sorted list of
/// variable indices with repetition. Unused slots hold `u16::MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Mono {
    degree: u8,
    vars: [u16; MAX_ORDER],
}

impl Mono {
    fn from_vars(vars: &[usize]) -> Self {
        assert!(vars.len() <= MAX_ORDER, "monomial degree above MAX_ORDER");
        let mut sorted = [u16::MAX; MAX_ORDER];
        for (slot, &v) in sorted.iter_mut().zip(vars) {
            *slot = v as u16;
        }
        sorted[..vars.len()].sort_unstable();
        Mono {
            degree: vars.len() as u8,
            vars: sorted,
        }
    }

    fn vars(&self) -> &[u16] {
        &self.vars[..self.degree as usize]
    }

    /// Product of factorials of the exponents.
    fn factorial(&self) -> f64 {
        let vars = self.vars();
        let mut out = 1.0;
        let mut run = 1;
        for w in 1..=vars.len() {
            if w < vars.len() && vars[w] == vars[w - 1] {
                run += 1;
            } else {
                for k in 2..=run {
                    out *= k as f64;
                }
                run = 1;
            }
        }
        out
    }
}

/// Coefficient layout shared by all jets over the same number of variables.
#[derive(Debug)]
pub(crate) struct Layout {
    nvars: usize,
    monos: Vec<Mono>,
    /// `len_upto[k]` is the number of monomials of degree `<= k`.
    len_upto: [usize; MAX_ORDER + 1],
    index: HashMap<Mono, usize>,
    /// Unordered factor pairs `(a, b, c)` with `a <= b` and `m_a * m_b = m_c`,
    /// sorted by the degree of `m_c`.
    products: Vec<(u32, u32, u32)>,
    products_upto: [usize; MAX_ORDER + 1],
    /// Per variable: `(src, dst, factor)` so that `d/dv` maps `coef[src] * factor`
    /// into `dst`, sorted by the degree of `src`.
    derivs: Vec<Vec<(u32, u32, f64)>>,
    deriv_upto: Vec<[usize; MAX_ORDER + 1]>,
    factorials: Vec<f64>,
}

impl Layout {
    fn build(nvars: usize) -> Self {
        let mut monos = vec![Mono::from_vars(&[])];
        let mut len_upto = [0; MAX_ORDER + 1];
        len_upto[0] = 1;
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for degree in 1..=MAX_ORDER {
            let mut next = Vec::new();
            for base in &frontier {
                let start = base.last().copied().unwrap_or(0);
                for v in start..nvars {
                    let mut m = base.clone();
                    m.push(v);
                    monos.push(Mono::from_vars(&m));
                    next.push(m);
                }
            }
            frontier = next;
            len_upto[degree] = monos.len();
        }
        let index: HashMap<Mono, usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();

        let mut products = Vec::new();
        let mut products_upto = [0; MAX_ORDER + 1];
        for (c, mono) in monos.iter().enumerate() {
            let vars = mono.vars();
            let d = vars.len();
            let mut seen = Vec::new();
            for mask in 0u32..(1 << d) {
                let (mut left, mut right) = (Vec::new(), Vec::new());
                for (bit, &v) in vars.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        left.push(v as usize);
                    } else {
                        right.push(v as usize);
                    }
                }
                let a = index[&Mono::from_vars(&left)];
                let b = index[&Mono::from_vars(&right)];
                let key = (a.min(b), a.max(b));
                if !seen.contains(&key) {
                    seen.push(key);
                    products.push((key.0 as u32, key.1 as u32, c as u32));
                }
            }
            products_upto[d] = products.len();
        }

        let mut derivs = vec![Vec::new(); nvars];
        let mut deriv_upto = vec![[0; MAX_ORDER + 1]; nvars];
        for (v, table) in derivs.iter_mut().enumerate() {
            for (src, mono) in monos.iter().enumerate() {
                let vars = mono.vars();
                let exponent = vars.iter().filter(|&&w| w as usize == v).count();
                if exponent == 0 {
                    continue;
                }
                let mut rest: Vec<usize> = vars.iter().map(|&w| w as usize).collect();
                let pos = rest.iter().position(|&w| w == v).unwrap();
                rest.remove(pos);
                let dst = index[&Mono::from_vars(&rest)];
                table.push((src as u32, dst as u32, exponent as f64));
                deriv_upto[v][vars.len()] = table.len();
            }
            for k in 1..=MAX_ORDER {
                deriv_upto[v][k] = deriv_upto[v][k].max(deriv_upto[v][k - 1]);
            }
        }

        let factorials = monos.iter().map(Mono::factorial).collect();
        Layout {
            nvars,
            monos,
            len_upto,
            index,
            products,
            products_upto,
            derivs,
            deriv_upto,
            factorials,
        }
    }

    /// Shared layout for `nvars` variables.
    pub(crate) fn get(nvars: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(nvars)
            .or_insert_with(|| Arc::new(Layout::build(nvars)))
            .clone()
    }

    fn mono_index(&self, vars: &[usize]) -> Option<usize> {
        if vars.len() > MAX_ORDER || vars.iter().any(|&v| v >= self.nvars) {
            return None;
        }
        self.index.get(&Mono::from_vars(vars)).copied()
    }
}

/// Truncated Taylor expansion of a scalar field in `nvars` variables.
#[derive(Clone)]
pub struct Jet {
    order: usize,
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("nvars", &self.layout.nvars)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.layout.nvars == other.layout.nvars
            && self.coeffs == other.coeffs
    }
}

impl Jet {
    fn check_order(order: usize) -> Result<()> {
        if order > MAX_ORDER {
            return Err(GeomError::Order {
                requested: order,
                max: MAX_ORDER,
            });
        }
        Ok(())
    }

    pub fn constant(value: f64, nvars: usize, order: usize) -> Result<Self> {
        Self::check_order(order)?;
        let layout = Layout::get(nvars);
        let mut coeffs = vec![0.0; layout.len_upto[order]];
        coeffs[0] = value;
        Ok(Jet {
            order,
            layout,
            coeffs,
        })
    }

    /// The coordinate function `var` expanded around `value`.
    pub fn variable(value: f64, var: usize, nvars: usize, order: usize) -> Result<Self> {
        assert!(
            var < nvars,
            "variable index {var} out of range for {nvars} variables"
        );
        let mut jet = Self::constant(value, nvars, order)?;
        if order >= 1 {
            jet.coeffs[1 + var] = 1.0;
        }
        Ok(jet)
    }

    /// Builds a jet from raw Taylor coefficients in the layout's graded order.
    pub fn from_taylor_coefficients(nvars: usize, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::check_order(order)?;
        let layout = Layout::get(nvars);
        let expected = layout.len_upto[order];
        if coeffs.len() != expected {
            return Err(GeomError::Dimension {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Jet {
            order,
            layout,
            coeffs,
        })
    }

    /// A constant sharing this jet's variables and order.
    pub fn lift(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        Jet {
            order: self.order,
            layout: self.layout.clone(),
            coeffs,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficients in graded monomial order.
    pub fn taylor_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Variable multisets of each coefficient slot, in graded order.
    pub fn multi_indices(&self) -> Vec<Vec<usize>> {
        self.layout.monos[..self.coeffs.len()]
            .iter()
            .map(|m| m.vars().iter().map(|&v| v as usize).collect())
            .collect()
    }

    /// Taylor coefficient of the monomial given as a multiset of variables.
    pub fn coefficient(&self, vars: &[usize]) -> f64 {
        match self.layout.mono_index(vars) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => panic!(
                "multi-index {vars:?} not carried by a jet of order {} in {} variables",
                self.order, self.layout.nvars
            ),
        }
    }

    /// Partial derivative `∂^|α| f / ∂v_1 … ∂v_k` at the expansion point.
    ///
    /// Panics if the multi-index has degree above the jet's order.
    pub fn derivative(&self, vars: &[usize]) -> f64 {
        let i = self
            .layout
            .mono_index(vars)
            .expect("multi-index out of range");
        assert!(
            i < self.coeffs.len(),
            "derivative of degree {} requested from a jet of order {}",
            vars.len(),
            self.order
        );
        self.coeffs[i] * self.layout.factorials[i]
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            order,
            layout: self.layout.clone(),
            coeffs: self.coeffs[..self.layout.len_upto[order]].to_vec(),
        }
    }

    /// The jet of `∂f/∂v`, one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(GeomError::Order {
                requested: 1,
                max: 0,
            });
        }
        assert!(var < self.layout.nvars);
        let order = self.order - 1;
        let mut coeffs = vec![0.0; self.layout.len_upto[order]];
        let table = &self.layout.derivs[var];
        for &(src, dst, factor) in &table[..self.layout.deriv_upto[var][self.order]] {
            coeffs[dst as usize] += factor * self.coeffs[src as usize];
        }
        Ok(Jet {
            order,
            layout: self.layout.clone(),
            coeffs,
        })
    }

    fn check_compatible(&self, other: &Jet) {
        assert_eq!(
            self.layout.nvars, other.layout.nvars,
            "jets over different variable counts"
        );
    }

    fn zip_with(&self, other: &Jet, op: impl Fn(f64, f64) -> f64) -> Jet {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let len = self.layout.len_upto[order];
        let coeffs = (0..len)
            .map(|i| op(self.coeffs[i], other.coeffs[i]))
            .collect();
        Jet {
            order,
            layout: self.layout.clone(),
            coeffs,
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; self.layout.len_upto[order]];
        let (f, g) = (&self.coeffs, &other.coeffs);
        for &(a, b, c) in &self.layout.products[..self.layout.products_upto[order]] {
            let (a, b) = (a as usize, b as usize);
            coeffs[c as usize] += if a == b {
                f[a] * g[a]
            } else {
                f[a] * g[b] + f[b] * g[a]
            };
        }
        Jet {
            order,
            layout: self.layout.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            order: self.order,
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// `φ(self)` given `φ` and its first three derivatives at `self.value()`.
    pub fn compose(&self, derivs: [f64; MAX_ORDER + 1]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        // Horner in the nilpotent part.
        let mut acc = self.lift(derivs[self.order] / factorial(self.order));
        for k in (0..self.order).rev() {
            acc = acc.mul_jet(&delta);
            acc.coeffs[0] += derivs[k] / factorial(k);
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let u = self.value();
        if u == 0.0 || !u.is_finite() {
            return Err(GeomError::domain("division by zero"));
        }
        let r = 1.0 / u;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let u = self.value();
        if u < 0.0 || (u == 0.0 && self.order > 0) || u.is_nan() {
            return Err(GeomError::domain(format!("square root of {u}")));
        }
        let s = u.sqrt();
        Ok(self.compose([s, 0.5 / s, -0.25 / (s * u), 0.375 / (s * u * u)]))
    }

    pub fn ln(&self) -> Result<Jet> {
        let u = self.value();
        if u <= 0.0 || u.is_nan() {
            return Err(GeomError::domain(format!("logarithm of {u}")));
        }
        let r = 1.0 / u;
        Ok(self.compose([u.ln(), r, -r * r, 2.0 * r * r * r]))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e; MAX_ORDER + 1])
    }

    pub fn square(&self) -> Jet {
        self.mul_jet(self)
    }

    pub fn powi(&self, k: u32) -> Jet {
        let mut acc = self.lift(1.0);
        for _ in 0..k {
            acc = acc.mul_jet(self);
        }
        acc
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = &*self + &rhs;
    }
}
