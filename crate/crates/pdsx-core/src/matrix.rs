//! Square complex matrices over either scalar backend.

use num_complex::Complex64;
use serde_json::Value;

use crate::scalar::{ComplexScalar, GaussRational};
use crate::PdsxError;

/// Row-major square matrix over a single scalar backend.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: ComplexScalar> Matrix<S> {
    pub fn zero(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![S::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.data[i * dim + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, PdsxError> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(PdsxError::Dimension("matrix rows are not square".into()));
        }
        Ok(Matrix {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Matrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.dim + j] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        Matrix::from_fn(n, |i, j| {
            let mut acc = S::zero();
            for k in 0..n {
                acc = acc.add(&self.entry(i, k).mul(other.entry(k, j)));
            }
            acc
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a.mul(c)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.dim, |i, j| self.entry(j, i).conj())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    /// Max-absolute-entry norm.
    pub fn norm_max(&self) -> f64 {
        self.data
            .iter()
            .map(|a| a.abs_sq_f64().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Mode-tagged square complex matrix: exact Gaussian-rational entries or
/// double entries. The two modes never mix inside one computation.
#[derive(Clone, PartialEq, Debug)]
pub enum CMatrix {
    Exact(Matrix<GaussRational>),
    Float(Matrix<Complex64>),
}

impl CMatrix {
    pub fn identity_exact(dim: usize) -> Self {
        CMatrix::Exact(Matrix::identity(dim))
    }

    pub fn identity_float(dim: usize) -> Self {
        CMatrix::Float(Matrix::identity(dim))
    }

    pub fn zero_like(&self) -> Self {
        match self {
            CMatrix::Exact(m) => CMatrix::Exact(Matrix::zero(m.dim())),
            CMatrix::Float(m) => CMatrix::Float(Matrix::zero(m.dim())),
        }
    }

    pub fn identity_like(&self) -> Self {
        match self {
            CMatrix::Exact(m) => CMatrix::Exact(Matrix::identity(m.dim())),
            CMatrix::Float(m) => CMatrix::Float(Matrix::identity(m.dim())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CMatrix::Exact(m) => m.dim(),
            CMatrix::Float(m) => m.dim(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CMatrix::Exact(_))
    }

    fn zip(
        &self,
        other: &Self,
        fe: impl Fn(&Matrix<GaussRational>, &Matrix<GaussRational>) -> Matrix<GaussRational>,
        ff: impl Fn(&Matrix<Complex64>, &Matrix<Complex64>) -> Matrix<Complex64>,
    ) -> Result<Self, PdsxError> {
        if self.dim() != other.dim() {
            return Err(PdsxError::Dimension(format!(
                "matrix dimensions differ: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        match (self, other) {
            (CMatrix::Exact(a), CMatrix::Exact(b)) => Ok(CMatrix::Exact(fe(a, b))),
            (CMatrix::Float(a), CMatrix::Float(b)) => Ok(CMatrix::Float(ff(a, b))),
            _ => Err(PdsxError::MixedMode),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PdsxError> {
        self.zip(other, Matrix::mul, Matrix::mul)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PdsxError> {
        self.zip(other, Matrix::add, Matrix::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PdsxError> {
        self.zip(other, Matrix::sub, Matrix::sub)
    }

    pub fn adjoint(&self) -> Self {
        match self {
            CMatrix::Exact(m) => CMatrix::Exact(m.adjoint()),
            CMatrix::Float(m) => CMatrix::Float(m.adjoint()),
        }
    }

    pub fn scale_i64(&self, c: i64) -> Self {
        match self {
            CMatrix::Exact(m) => CMatrix::Exact(m.scale(&GaussRational::from_int(c))),
            CMatrix::Float(m) => CMatrix::Float(m.scale(&Complex64::new(c as f64, 0.0))),
        }
    }

    pub fn scale_scalar(&self, c: &GaussRational) -> Self {
        match self {
            CMatrix::Exact(m) => CMatrix::Exact(m.scale(c)),
            CMatrix::Float(m) => CMatrix::Float(m.scale(&c.to_complex64())),
        }
    }

    pub fn norm_max(&self) -> f64 {
        match self {
            CMatrix::Exact(m) => m.norm_max(),
            CMatrix::Float(m) => m.norm_max(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CMatrix::Exact(m) => m.is_zero(),
            CMatrix::Float(m) => m.is_zero(),
        }
    }

    /// Zero test at tolerance `tol`: exact matrices with `tol == 0` use the
    /// exact test, everything else compares the max-entry norm.
    pub fn vanishes(&self, tol: f64) -> bool {
        if tol == 0.0 {
            match self {
                CMatrix::Exact(m) => m.is_zero(),
                CMatrix::Float(m) => m.is_zero(),
            }
        } else {
            self.norm_max() <= tol
        }
    }

    pub fn as_float(&self) -> Matrix<Complex64> {
        match self {
            CMatrix::Exact(m) => {
                Matrix::from_fn(m.dim(), |i, j| m.entry(i, j).to_complex64())
            }
            CMatrix::Float(m) => m.clone(),
        }
    }

    /// Operator (spectral) norm approximated by power iteration on M*M.
    pub fn norm_op(&self) -> f64 {
        let m = self.as_float();
        let n = m.dim();
        if n == 0 {
            return 0.0;
        }
        let gram = m.adjoint().mul(&m);
        let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let mut lambda = 0.0f64;
        for _ in 0..200 {
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..n {
                    w[i] += gram.entry(i, j) * v[j];
                }
            }
            let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-300 {
                return 0.0;
            }
            lambda = norm;
            for z in &mut w {
                *z /= norm;
            }
            v = w;
        }
        lambda.sqrt()
    }

    /// Parses one JSON entry: a string holds an exact scalar, a `[re, im]`
    /// pair a double one.
    pub fn entry_from_json(v: &Value) -> Result<EntryValue, PdsxError> {
        match v {
            Value::String(s) => Ok(EntryValue::Exact(GaussRational::parse(s)?)),
            Value::Array(pair) if pair.len() == 2 => {
                let re = pair[0]
                    .as_f64()
                    .ok_or_else(|| PdsxError::Parse("entry component is not a number".into()))?;
                let im = pair[1]
                    .as_f64()
                    .ok_or_else(|| PdsxError::Parse("entry component is not a number".into()))?;
                Ok(EntryValue::Float(Complex64::new(re, im)))
            }
            Value::Number(n) => {
                let re = n
                    .as_f64()
                    .ok_or_else(|| PdsxError::Parse("bad numeric entry".into()))?;
                Ok(EntryValue::Float(Complex64::new(re, 0.0)))
            }
            other => Err(PdsxError::Parse(format!(
                "matrix entry must be a string, number or [re, im] pair, got {other}"
            ))),
        }
    }

    /// Builds a matrix from a JSON row array, enforcing the no-mixing rule.
    pub fn from_json_rows(rows: &Value) -> Result<Self, PdsxError> {
        let rows = rows
            .as_array()
            .ok_or_else(|| PdsxError::Parse("matrix must be an array of rows".into()))?;
        let mut exact_rows: Vec<Vec<GaussRational>> = Vec::new();
        let mut float_rows: Vec<Vec<Complex64>> = Vec::new();
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| PdsxError::Parse("matrix row must be an array".into()))?;
            let mut er = Vec::new();
            let mut fr = Vec::new();
            for v in row {
                match Self::entry_from_json(v)? {
                    EntryValue::Exact(g) => er.push(g),
                    EntryValue::Float(c) => fr.push(c),
                }
            }
            if !er.is_empty() && !fr.is_empty() {
                return Err(PdsxError::MixedMode);
            }
            exact_rows.push(er);
            float_rows.push(fr);
        }
        let any_exact = exact_rows.iter().any(|r| !r.is_empty());
        let any_float = float_rows.iter().any(|r| !r.is_empty());
        if any_exact && any_float {
            return Err(PdsxError::MixedMode);
        }
        if any_exact {
            Ok(CMatrix::Exact(Matrix::from_rows(exact_rows)?))
        } else {
            Ok(CMatrix::Float(Matrix::from_rows(float_rows)?))
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CMatrix::Exact(m) => Value::Array(
                (0..m.dim())
                    .map(|i| {
                        Value::Array(
                            (0..m.dim())
                                .map(|j| Value::String(m.entry(i, j).render()))
                                .collect(),
                        )
                    })
                    .collect(),
            ),
            CMatrix::Float(m) => Value::Array(
                (0..m.dim())
                    .map(|i| {
                        Value::Array(
                            (0..m.dim())
                                .map(|j| {
                                    let z = m.entry(i, j);
                                    serde_json::json!([z.re, z.im])
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            ),
        }
    }
}

pub enum EntryValue {
    Exact(GaussRational),
    Float(Complex64),
}
