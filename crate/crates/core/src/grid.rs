//! Uniform `(x, t)` grids and the value surfaces that live on them.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AmmoFunction;

/// A uniform grid on `[0, x_max] x [0, t_max]` with `nx * nt` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    x_max: f64,
    t_max: f64,
    nx: usize,
    nt: usize,
}

impl GridSpec {
    pub fn new(x_max: f64, t_max: f64, nx: usize, nt: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) || !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extents must be finite and positive, got {x_max} x {t_max}"
            )));
        }
        if nx < 2 || nt < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes per axis, got {nx} x {nt}")));
        }
        Ok(Self { x_max, t_max, nx, nt })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.x_max / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    /// `e^{t_j}` for every t-node.
    pub fn exp_t(&self) -> Vec<f64> {
        (0..self.nt).map(|j| self.t(j).exp()).collect()
    }

    /// Index of the node sitting at `x` (within a relative `1e-9` of a cell).
    pub fn x_node(&self, x: f64) -> Option<usize> {
        snap(x, self.dx(), self.nx)
    }

    pub fn t_node(&self, t: f64) -> Option<usize> {
        snap(t, self.dt(), self.nt)
    }

    #[inline]
    pub(crate) fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }
}

fn snap(v: f64, h: f64, n: usize) -> Option<usize> {
    let r = v / h;
    let k = r.round();
    if (r - k).abs() > 1e-9 || k < 0.0 || k as usize >= n {
        None
    } else {
        Some(k as usize)
    }
}

/// Which frame a value surface is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `P(x,t)` or `N(x,t)`.
    Raw,
    /// `e^t P(x,t)` or `e^t N(x,t)`.
    ExpRescaled,
}

/// A nonnegative surface over a [`GridSpec`], stored row-major by x.
///
/// Fields are immutable. [`ValueField::rescale`] remembers the values it was
/// derived from, so converting back to the original frame is exact.
#[derive(Clone, Debug)]
pub struct ValueField {
    spec: GridSpec,
    scaling: Scaling,
    values: Arc<Vec<f64>>,
    origin: Option<Arc<Vec<f64>>>,
}

impl PartialEq for ValueField {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.scaling == other.scaling && self.values == other.values
    }
}

impl ValueField {
    pub fn new(spec: GridSpec, scaling: Scaling, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Dimension {
                expected: spec.len(),
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!(
                "field entry ({}, {}) = {} is not finite and nonnegative",
                pos / spec.nt,
                pos % spec.nt,
                values[pos]
            )));
        }
        Ok(Self::from_vec_unchecked(spec, scaling, values))
    }

    pub(crate) fn from_vec_unchecked(spec: GridSpec, scaling: Scaling, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self {
            spec,
            scaling,
            values: Arc::new(values),
            origin: None,
        }
    }

    pub fn from_fn(spec: GridSpec, scaling: Scaling, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for i in 0..spec.nx {
            for j in 0..spec.nt {
                values.push(f(i, j));
            }
        }
        Self::new(spec, scaling, values)
    }

    pub fn constant(spec: GridSpec, scaling: Scaling, value: f64) -> Result<Self> {
        Self::new(spec, scaling, vec![value; spec.len()])
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.idx(i, j)]
    }

    /// All t-values at x-node `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let nt = self.spec.nt;
        &self.values[i * nt..(i + 1) * nt]
    }

    /// All x-values at t-node `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.spec.nx).map(|i| self.get(i, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup-norm distance to a field on the same grid.
    pub fn sup_distance(&self, other: &ValueField) -> Result<f64> {
        if self.spec != other.spec {
            return Err(Error::Dimension {
                expected: self.spec.len(),
                got: other.spec.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Multiplies (to [`Scaling::ExpRescaled`]) or divides (to [`Scaling::Raw`])
    /// column `j` by `e^{t_j}`.
    pub fn rescale(&self, target: Scaling) -> ValueField {
        if target == self.scaling {
            return self.clone();
        }
        let values = match &self.origin {
            Some(orig) => Arc::clone(orig),
            None => {
                let exp_t = self.spec.exp_t();
                let nt = self.spec.nt;
                let v: Vec<f64> = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| match target {
                        Scaling::ExpRescaled => v * exp_t[k % nt],
                        Scaling::Raw => v / exp_t[k % nt],
                    })
                    .collect();
                Arc::new(v)
            }
        };
        ValueField {
            spec: self.spec,
            scaling: target,
            values,
            origin: Some(Arc::clone(&self.values)),
        }
    }

    /// Writes `x,t,value` rows in x-major order with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,t,value")?;
        for i in 0..self.spec.nx {
            let x = self.spec.x(i);
            for j in 0..self.spec.nt {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", x, self.spec.t(j), self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// `a(x_i)` for every x-node of `spec`.
pub fn sample_ammo(f: &AmmoFunction, spec: &GridSpec) -> Vec<f64> {
    (0..spec.nx())
        .map(|i| f.eval(spec.x(i)).expect("grid nodes are nonnegative"))
        .collect()
}
