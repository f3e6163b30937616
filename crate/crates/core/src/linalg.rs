//! Dense symmetric linear algebra: eigendecomposition, hollowing,
//! double-centering and a few norms.
//!
//! The eigensolver is Householder tridiagonalization followed by the
//! implicit-shift QL iteration (the EISPACK `tred2`/`tql2` pair), computing
//! the full spectrum and truncating afterwards.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_QL_SWEEPS: usize = 64;

/// Square matrix with `a[(i, j)] == a[(j, i)]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Accepts a square, finite matrix that is symmetric up to `1e-10`
    /// (relative to its largest entry) and symmetrizes it exactly.
    pub fn new(mut a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = a.nrows();
        let scale = a.amax().max(1.0);
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        if worst > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(worst));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = m;
                a[(j, i)] = m;
            }
        }
        Ok(Self(a))
    }

    /// Builds from the upper triangle produced by `f(i, j)` for `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        Self::new(a)
    }

    /// `x xᵀ` for an `n × p` matrix.
    pub fn gram(x: &DMatrix<f64>) -> Result<Self> {
        Self::new(x * x.transpose())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

/// Order in which eigenpairs are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenOrdering {
    #[default]
    AlgebraicDescending,
    MagnitudeDescending,
}

/// Leading eigenpairs of a symmetric matrix.
///
/// Each eigenvector is sign-normalized so that its entry of largest
/// magnitude (first one on ties) is nonnegative.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// `n × k`, column `j` pairs with `values[j]`.
    pub vectors: DMatrix<f64>,
    pub ordering: EigenOrdering,
}

impl EigenSystem {
    /// `U · diag(λ)^{1/2}`; fails on the first nonpositive eigenvalue.
    pub fn scaled_vectors(&self) -> Result<DMatrix<f64>> {
        let mut out = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            if !(lambda > 0.0) {
                return Err(Error::NonPositiveEigenvalue {
                    index: j,
                    value: lambda,
                });
            }
            out.column_mut(j).scale_mut(lambda.sqrt());
        }
        Ok(out)
    }
}

/// Top-`k` eigenpairs of `a` under `ordering`.
pub fn sym_eig(a: &SymmetricMatrix, k: usize, ordering: EigenOrdering) -> Result<EigenSystem> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(crate::error::invalid(
            "k",
            format!("need 1 <= k <= n = {n}, got {k}"),
        ));
    }
    let (values, rows) = full_eigen(a.as_matrix())?;

    let mut order: Vec<usize> = (0..n).collect();
    match ordering {
        EigenOrdering::AlgebraicDescending => {
            order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
        }
        EigenOrdering::MagnitudeDescending => {
            order.sort_by(|&x, &y| {
                values[y]
                    .abs()
                    .total_cmp(&values[x].abs())
                    .then(values[y].total_cmp(&values[x]))
            });
        }
    }

    let mut vectors = DMatrix::zeros(n, k);
    let mut out_values = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        out_values.push(values[idx]);
        let v = &rows[idx * n..(idx + 1) * n];
        let mut pivot = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, x) in v.iter().enumerate() {
            vectors[(i, col)] = sign * x;
        }
    }
    Ok(EigenSystem {
        values: out_values,
        vectors,
        ordering,
    })
}

/// All eigenvalues plus eigenvectors stored row-wise (`rows[i*n..(i+1)*n]` is
/// the eigenvector for `values[i]`), unsorted.
fn full_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.nrows();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 1 {
        return Ok((vec![a[(0, 0)]], vec![1.0]));
    }
    // v is row-major: v[i * n + j] == V[i][j].
    let mut v: Vec<f64> = (0..n * n).map(|idx| a[(idx / n, idx % n)]).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    // Transpose so the QL rotations act on contiguous rows.
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[j * n + i] = v[i * n + j];
        }
    }
    tql2(n, &mut w, &mut d, &mut e)?;
    Ok((d, w))
}

fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for x in d.iter().take(i) {
            scale += x.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in d.iter_mut().take(i) {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for x in e.iter_mut().take(i) {
                *x = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// `w` holds Vᵀ row-major, so `w[c * n + k] == V[k][c]`.
fn tql2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in d.iter_mut().skip(l + 2) {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_next = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Zeroes the diagonal.
pub fn hollow(a: &SymmetricMatrix) -> SymmetricMatrix {
    let mut m = a.0.clone();
    m.fill_diagonal(0.0);
    SymmetricMatrix(m)
}

/// `-½ J D J` with `J = I - 11ᵀ/n`, for a matrix of squared dissimilarities.
pub fn double_center(d2: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let m = d2.as_matrix();
    if let Some(v) = m.iter().find(|v| **v < 0.0) {
        return Err(crate::error::invalid(
            "d2",
            format!("squared dissimilarities must be nonnegative, found {v}"),
        ));
    }
    let n = m.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    SymmetricMatrix::from_upper_fn(n, |i, j| {
        -0.5 * (m[(i, j)] - row_means[i] - row_means[j] + grand)
    })
}

/// Matrix of pairwise squared Euclidean distances between the rows of `x`.
pub fn squared_distances(x: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    let n = x.nrows();
    SymmetricMatrix::from_upper_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            (x.row(i) - x.row(j)).norm_squared()
        }
    })
}

/// `max_i ‖x_i‖` over the rows of `x`.
pub fn two_to_inf_norm(x: &DMatrix<f64>) -> f64 {
    x.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Spectral norm of a symmetric matrix, `max |λ|`.
pub fn spectral_norm(a: &SymmetricMatrix) -> Result<f64> {
    let es = sym_eig(a, 1, EigenOrdering::MagnitudeDescending)?;
    Ok(es.values[0].abs())
}

/// Sample covariance of the rows of `x` (denominator `n - 1`).
pub fn sample_covariance(x: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    let n = x.nrows();
    if n < 2 {
        return Err(crate::error::invalid("x", "need at least two rows"));
    }
    let mean = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    SymmetricMatrix::new(cov)
}

/// Writes a matrix as headerless, row-major CSV.
pub fn write_dense_csv<W: Write>(m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headerless, row-major CSV matrix.
pub fn read_dense_csv<R: Read>(input: R) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for rec in r.records() {
        let rec = rec?;
        match ncols {
            None => ncols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(Error::DimensionMismatch(format!(
                    "row {nrows} has {} fields, expected {c}",
                    rec.len()
                )))
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| crate::error::invalid("csv", format!("not a number: {field:?}")))?;
            data.push(v);
        }
        nrows += 1;
    }
    Ok(DMatrix::from_row_slice(nrows, ncols.unwrap_or(0), &data))
}
