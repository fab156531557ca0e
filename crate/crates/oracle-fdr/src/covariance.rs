//! Covariance structures: construction, validation, sampling factors, and
//! precision matrices.
//!
//! All model covariances are correlation matrices (unit diagonal). The
//! structured variants — identity, equicorrelated, block-diagonal with
//! equicorrelated blocks — get closed-form factors and inverses so nothing
//! O(n²) or O(n³) happens at n = 5000; the dense variant goes through the
//! factorization kernels in [`crate::linalg`].

use std::path::Path;

use thiserror::Error;

use crate::linalg::{self, SquareMatrix};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum CovError {
    #[error("equicorrelated bound violated: need -1/(n-1) < rho < 1, got rho = {rho} for n = {n}")]
    EquicorrelatedBound { rho: f64, n: usize },
    #[error(
        "block {index} violates the equicorrelated bound: need -1/(size-1) < rho < 1, \
         got rho = {rho} for size = {size}"
    )]
    BlockBound { index: usize, size: usize, rho: f64 },
    #[error("block list is empty")]
    EmptyBlocks,
    #[error("block sizes must be positive (block {index})")]
    EmptyBlock { index: usize },
    #[error("dense matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e} exceeds 1e-10")]
    Asymmetric { i: usize, j: usize, diff: f64 },
    #[error("dense matrix is not a correlation matrix: diagonal entry {i} is {value}")]
    NonUnitDiagonal { i: usize, value: f64 },
    #[error("matrix is not positive definite: leading minor {leading_minor} is not positive")]
    NotPositiveDefinite { leading_minor: usize },
    #[error("covariance spec `{text}` does not match n = {expected}: {detail}")]
    DimensionMismatch { text: String, expected: usize, detail: String },
    #[error("cannot parse covariance spec `{text}`: {detail}")]
    Parse { text: String, detail: String },
    #[error("failed to read dense matrix from {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Symbolic description of the model covariance Σ.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec<T> {
    Identity { n: usize },
    Equicorrelated { n: usize, rho: T },
    /// Equicorrelated blocks along the diagonal, zeros elsewhere.
    BlockDiagonal { blocks: Vec<(usize, T)> },
    Dense { matrix: SquareMatrix<T> },
}

impl<T: Real> CovarianceSpec<T> {
    pub fn n(&self) -> usize {
        match self {
            Self::Identity { n } | Self::Equicorrelated { n, .. } => *n,
            Self::BlockDiagonal { blocks } => blocks.iter().map(|(s, _)| s).sum(),
            Self::Dense { matrix } => matrix.n(),
        }
    }

    /// Check the variant invariants: positive-definiteness bounds for the
    /// structured forms, symmetry/unit-diagonal/factorizability for dense.
    pub fn validate(&self) -> Result<(), CovError> {
        match self {
            Self::Identity { .. } => Ok(()),
            Self::Equicorrelated { n, rho } => {
                if equi_rho_ok(*n, *rho) {
                    Ok(())
                } else {
                    Err(CovError::EquicorrelatedBound { rho: to_f64(*rho), n: *n })
                }
            }
            Self::BlockDiagonal { blocks } => {
                if blocks.is_empty() {
                    return Err(CovError::EmptyBlocks);
                }
                for (index, &(size, rho)) in blocks.iter().enumerate() {
                    if size == 0 {
                        return Err(CovError::EmptyBlock { index });
                    }
                    if !equi_rho_ok(size, rho) {
                        return Err(CovError::BlockBound { index, size, rho: to_f64(rho) });
                    }
                }
                Ok(())
            }
            Self::Dense { matrix } => {
                let n = matrix.n();
                let tol = T::of(1e-10);
                for i in 0..n {
                    let d = matrix[(i, i)];
                    if (d - T::one()).abs() > tol {
                        return Err(CovError::NonUnitDiagonal { i, value: to_f64(d) });
                    }
                    for j in (i + 1)..n {
                        let diff = (matrix[(i, j)] - matrix[(j, i)]).abs();
                        if diff > tol {
                            return Err(CovError::Asymmetric { i, j, diff: to_f64(diff) });
                        }
                    }
                }
                linalg::cholesky(matrix)
                    .map(|_| ())
                    .map_err(|leading_minor| CovError::NotPositiveDefinite { leading_minor })
            }
        }
    }

    /// Parse the textual form used in config files:
    /// `identity`, `equi:RHO`, `blocks:SIZE1@RHO1,SIZE2@RHO2,...`, `dense:PATH`
    /// (PATH pointing to a headerless CSV matrix). `n` is the grid dimension
    /// the spec must agree with; for `identity`/`equi` it completes the spec.
    pub fn parse(text: &str, n: usize) -> Result<Self, CovError> {
        let text = text.trim();
        let spec = if text == "identity" {
            Self::Identity { n }
        } else if let Some(rho) = text.strip_prefix("equi:") {
            let rho = parse_real::<T>(rho, text)?;
            Self::Equicorrelated { n, rho }
        } else if let Some(list) = text.strip_prefix("blocks:") {
            let mut blocks = Vec::new();
            for part in list.split(',') {
                let (size, rho) = part.split_once('@').ok_or_else(|| CovError::Parse {
                    text: text.to_string(),
                    detail: format!("block `{part}` is not SIZE@RHO"),
                })?;
                let size = size.trim().parse::<usize>().map_err(|e| CovError::Parse {
                    text: text.to_string(),
                    detail: format!("bad block size `{size}`: {e}"),
                })?;
                blocks.push((size, parse_real::<T>(rho, text)?));
            }
            Self::BlockDiagonal { blocks }
        } else if let Some(path) = text.strip_prefix("dense:") {
            let matrix = load_dense_csv::<T>(Path::new(path.trim()))?;
            Self::Dense { matrix }
        } else {
            return Err(CovError::Parse {
                text: text.to_string(),
                detail: "expected identity | equi:RHO | blocks:SIZE@RHO,... | dense:PATH".into(),
            });
        };
        if spec.n() != n {
            return Err(CovError::DimensionMismatch {
                text: text.to_string(),
                expected: n,
                detail: format!("spec describes {} hypotheses", spec.n()),
            });
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn equi_rho_ok<T: Real>(n: usize, rho: T) -> bool {
    if rho >= T::one() || !rho.is_finite() {
        return false;
    }
    // Lower PD bound -1/(n-1) only binds for n >= 2.
    n < 2 || rho > -(T::one() / T::of_usize(n - 1))
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn parse_real<T: Real>(s: &str, text: &str) -> Result<T, CovError> {
    s.trim()
        .parse::<f64>()
        .map(T::of)
        .map_err(|e| CovError::Parse { text: text.to_string(), detail: format!("bad number `{s}`: {e}") })
}

/// Read a headerless comma-separated square matrix.
pub fn load_dense_csv<T: Real>(path: &Path) -> Result<SquareMatrix<T>, CovError> {
    let io_err = |source| CovError::Io { path: path.display().to_string(), source };
    let content = std::fs::read_to_string(path).map_err(io_err)?;
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map(T::of).map_err(|e| CovError::Parse {
                    text: format!("dense:{}", path.display()),
                    detail: format!("line {}: bad number `{}`: {}", lineno + 1, cell.trim(), e),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CovError::Parse {
            text: format!("dense:{}", path.display()),
            detail: format!("expected a square matrix, got {} rows", n),
        });
    }
    Ok(SquareMatrix::from_rows(n, rows.into_iter().flatten().collect()))
}

/// Realize the correlation matrix as a dense array.
pub fn build_covariance<T: Real>(spec: &CovarianceSpec<T>) -> Result<SquareMatrix<T>, CovError> {
    spec.validate()?;
    let n = spec.n();
    Ok(match spec {
        CovarianceSpec::Identity { .. } => SquareMatrix::identity(n),
        CovarianceSpec::Equicorrelated { n, rho } => {
            let mut m = SquareMatrix::zeros(*n);
            for i in 0..*n {
                for j in 0..*n {
                    m[(i, j)] = if i == j { T::one() } else { *rho };
                }
            }
            m
        }
        CovarianceSpec::BlockDiagonal { blocks } => {
            let mut m = SquareMatrix::zeros(n);
            let mut off = 0;
            for &(size, rho) in blocks {
                for i in 0..size {
                    for j in 0..size {
                        m[(off + i, off + j)] = if i == j { T::one() } else { rho };
                    }
                }
                off += size;
            }
            m
        }
        CovarianceSpec::Dense { matrix } => matrix.clone(),
    })
}

/// How one equicorrelated block turns standard normals into correlated ones.
#[derive(Debug, Clone, PartialEq)]
pub enum EquiFactor<T> {
    /// ρ = 0.
    Identity,
    /// ρ > 0: x = common·z₀·1 + idio·z, one shared draw plus one per entry.
    Shared { common: T, idio: T },
    /// ρ < 0 (shared-factor form does not exist): symmetric square root,
    /// x = idio·z + mean_coeff·(Σz)·1, exactly n draws.
    Spectral { idio: T, mean_coeff: T },
}

impl<T: Real> EquiFactor<T> {
    fn build(size: usize, rho: T) -> Self {
        if rho == T::zero() {
            EquiFactor::Identity
        } else if rho > T::zero() {
            EquiFactor::Shared { common: rho.sqrt(), idio: (T::one() - rho).sqrt() }
        } else {
            let a = (T::one() - rho).sqrt();
            let c = (T::one() + T::of_usize(size - 1) * rho).sqrt();
            EquiFactor::Spectral { idio: a, mean_coeff: (c - a) / T::of_usize(size) }
        }
    }

    fn noise_dim(&self, size: usize) -> usize {
        match self {
            EquiFactor::Shared { .. } => size + 1,
            _ => size,
        }
    }

    fn apply(&self, z: &[T], out: &mut [T]) {
        match *self {
            EquiFactor::Identity => out.copy_from_slice(z),
            EquiFactor::Shared { common, idio } => {
                let shared = common * z[0];
                for (o, &zi) in out.iter_mut().zip(&z[1..]) {
                    *o = shared + idio * zi;
                }
            }
            EquiFactor::Spectral { idio, mean_coeff } => {
                let total: T = z.iter().cloned().sum();
                let shift = mean_coeff * total;
                for (o, &zi) in out.iter_mut().zip(z) {
                    *o = shift + idio * zi;
                }
            }
        }
    }
}

/// Factor F with F·Fᵀ = Σ, used to turn iid standard normals into draws with
/// covariance Σ. For the structured variants F is symbolic and `apply` is
/// O(n); only the dense variant stores a triangular matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum CholeskyFactor<T> {
    Identity { n: usize },
    Equicorrelated { n: usize, factor: EquiFactor<T> },
    BlockDiagonal { blocks: Vec<(usize, EquiFactor<T>)> },
    DenseLower { l: SquareMatrix<T> },
}

impl<T: Real> CholeskyFactor<T> {
    pub fn n(&self) -> usize {
        match self {
            Self::Identity { n } | Self::Equicorrelated { n, .. } => *n,
            Self::BlockDiagonal { blocks } => blocks.iter().map(|(s, _)| s).sum(),
            Self::DenseLower { l } => l.n(),
        }
    }

    /// Number of standard normal draws one application consumes.
    pub fn noise_dim(&self) -> usize {
        match self {
            Self::Identity { n } => *n,
            Self::Equicorrelated { n, factor } => factor.noise_dim(*n),
            Self::BlockDiagonal { blocks } => blocks.iter().map(|(s, f)| f.noise_dim(*s)).sum(),
            Self::DenseLower { l } => l.n(),
        }
    }

    /// x = F·z. Panics unless `z.len() == noise_dim()`.
    pub fn apply(&self, z: &[T]) -> Vec<T> {
        assert_eq!(z.len(), self.noise_dim(), "factor applied to wrong noise length");
        match self {
            Self::Identity { .. } => z.to_vec(),
            Self::Equicorrelated { n, factor } => {
                let mut out = vec![T::zero(); *n];
                factor.apply(z, &mut out);
                out
            }
            Self::BlockDiagonal { blocks } => {
                let n = self.n();
                let mut out = vec![T::zero(); n];
                let mut zo = 0;
                let mut xo = 0;
                for (size, factor) in blocks {
                    let zn = factor.noise_dim(*size);
                    factor.apply(&z[zo..zo + zn], &mut out[xo..xo + *size]);
                    zo += zn;
                    xo += size;
                }
                out
            }
            Self::DenseLower { l } => {
                let n = l.n();
                let mut out = vec![T::zero(); n];
                for i in 0..n {
                    let mut s = T::zero();
                    for j in 0..=i {
                        s = s + l[(i, j)] * z[j];
                    }
                    out[i] = s;
                }
                out
            }
        }
    }
}

/// Build the sampling factor for a validated spec.
pub fn cholesky<T: Real>(spec: &CovarianceSpec<T>) -> Result<CholeskyFactor<T>, CovError> {
    spec.validate()?;
    Ok(match spec {
        CovarianceSpec::Identity { n } => CholeskyFactor::Identity { n: *n },
        CovarianceSpec::Equicorrelated { n, rho } => {
            if *rho == T::zero() {
                CholeskyFactor::Identity { n: *n }
            } else {
                CholeskyFactor::Equicorrelated { n: *n, factor: EquiFactor::build(*n, *rho) }
            }
        }
        CovarianceSpec::BlockDiagonal { blocks } => CholeskyFactor::BlockDiagonal {
            blocks: blocks.iter().map(|&(s, r)| (s, EquiFactor::build(s, r))).collect(),
        },
        CovarianceSpec::Dense { matrix } => CholeskyFactor::DenseLower {
            l: linalg::cholesky(matrix)
                .map_err(|leading_minor| CovError::NotPositiveDefinite { leading_minor })?,
        },
    })
}

/// Closed-form precision coefficients of an equicorrelated block:
/// Σ⁻¹ = 1/(1−ρ)·[I − ρ/(1+(n−1)ρ)·J] (Sherman–Morrison on (1−ρ)I + ρJ).
fn equi_precision_coeffs<T: Real>(n: usize, rho: T) -> (T, T) {
    let nm1 = T::of_usize(n - 1);
    let denom = (T::one() - rho) * (T::one() + nm1 * rho);
    let diag = (T::one() + (nm1 - T::one()) * rho) / denom;
    let off = -rho / denom;
    (diag, off)
}

/// Σ⁻¹ in a structure-aware representation. Column i of the precision matrix
/// drives the oracle statistic; the structured variants answer all queries in
/// O(1)/O(n) and never materialize the n×n array.
#[derive(Debug, Clone, PartialEq)]
pub enum PrecisionMatrix<T> {
    Identity { n: usize },
    Equicorrelated { n: usize, diag: T, off: T },
    BlockDiagonal { n: usize, blocks: Vec<PrecisionBlock<T>> },
    Dense { matrix: SquareMatrix<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionBlock<T> {
    pub offset: usize,
    pub size: usize,
    pub diag: T,
    pub off: T,
}

impl<T: Real> PrecisionMatrix<T> {
    pub fn n(&self) -> usize {
        match self {
            Self::Identity { n } | Self::Equicorrelated { n, .. } | Self::BlockDiagonal { n, .. } => *n,
            Self::Dense { matrix } => matrix.n(),
        }
    }

    /// t_{i,i}.
    pub fn diag(&self, i: usize) -> T {
        match self {
            Self::Identity { .. } => T::one(),
            Self::Equicorrelated { diag, .. } => *diag,
            Self::BlockDiagonal { blocks, .. } => {
                blocks.iter().find(|b| i >= b.offset && i < b.offset + b.size).expect("index in range").diag
            }
            Self::Dense { matrix } => matrix[(i, i)],
        }
    }

    /// Cached diagonal as a vector.
    pub fn diag_vec(&self) -> Vec<T> {
        (0..self.n()).map(|i| self.diag(i)).collect()
    }

    /// t_{i,j}.
    pub fn entry(&self, i: usize, j: usize) -> T {
        match self {
            Self::Identity { .. } => {
                if i == j {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Equicorrelated { diag, off, .. } => {
                if i == j {
                    *diag
                } else {
                    *off
                }
            }
            Self::BlockDiagonal { blocks, .. } => {
                for b in blocks {
                    let in_i = i >= b.offset && i < b.offset + b.size;
                    let in_j = j >= b.offset && j < b.offset + b.size;
                    if in_i && in_j {
                        return if i == j { b.diag } else { b.off };
                    }
                }
                T::zero()
            }
            Self::Dense { matrix } => matrix[(i, j)],
        }
    }

    /// s = Σ⁻¹·x. O(n) for the structured variants, O(n²) dense.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n(), "precision-vector dimension mismatch");
        match self {
            Self::Identity { .. } => x.to_vec(),
            Self::Equicorrelated { diag, off, .. } => {
                let total: T = x.iter().cloned().sum();
                x.iter().map(|&xi| *off * (total - xi) + *diag * xi).collect()
            }
            Self::BlockDiagonal { blocks, .. } => {
                let mut out = vec![T::zero(); self.n()];
                for b in blocks {
                    let xs = &x[b.offset..b.offset + b.size];
                    let total: T = xs.iter().cloned().sum();
                    for (o, &xi) in out[b.offset..b.offset + b.size].iter_mut().zip(xs) {
                        *o = b.off * (total - xi) + b.diag * xi;
                    }
                }
                out
            }
            Self::Dense { matrix } => matrix.mul_vec(x),
        }
    }

    /// S_i = Σ_{j≠i} f(t_{j,i}) per column, exploiting structure.
    ///
    /// `f` must satisfy f(0) = 0 (exact zeros contribute nothing); the
    /// structured variants skip their zero entries instead of evaluating `f`.
    pub fn column_offdiag_sums(&self, f: impl Fn(T) -> T) -> Vec<T> {
        let n = self.n();
        match self {
            Self::Identity { .. } => vec![T::zero(); n],
            Self::Equicorrelated { off, .. } => {
                let s = T::of_usize(n - 1) * f(*off);
                vec![s; n]
            }
            Self::BlockDiagonal { blocks, .. } => {
                let mut out = vec![T::zero(); n];
                for b in blocks {
                    let s = T::of_usize(b.size - 1) * f(b.off);
                    for o in &mut out[b.offset..b.offset + b.size] {
                        *o = s;
                    }
                }
                out
            }
            Self::Dense { matrix } => (0..n)
                .map(|i| {
                    let mut s = T::zero();
                    for j in 0..n {
                        if j != i {
                            s = s + f(matrix[(j, i)]);
                        }
                    }
                    s
                })
                .collect(),
        }
    }

    /// Materialize as a dense array (verification-sized n only).
    pub fn to_dense(&self) -> SquareMatrix<T> {
        let n = self.n();
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entry(i, j);
            }
        }
        m
    }
}

/// Invert a validated spec.
pub fn precision<T: Real>(spec: &CovarianceSpec<T>) -> Result<PrecisionMatrix<T>, CovError> {
    spec.validate()?;
    Ok(match spec {
        CovarianceSpec::Identity { n } => PrecisionMatrix::Identity { n: *n },
        CovarianceSpec::Equicorrelated { n, rho } => {
            if *rho == T::zero() {
                PrecisionMatrix::Identity { n: *n }
            } else {
                let (diag, off) = equi_precision_coeffs(*n, *rho);
                PrecisionMatrix::Equicorrelated { n: *n, diag, off }
            }
        }
        CovarianceSpec::BlockDiagonal { blocks } => {
            let mut out = Vec::with_capacity(blocks.len());
            let mut offset = 0;
            for &(size, rho) in blocks {
                let (diag, off) = if rho == T::zero() {
                    (T::one(), T::zero())
                } else {
                    equi_precision_coeffs(size, rho)
                };
                out.push(PrecisionBlock { offset, size, diag, off });
                offset += size;
            }
            PrecisionMatrix::BlockDiagonal { n: offset, blocks: out }
        }
        CovarianceSpec::Dense { matrix } => {
            let l = linalg::cholesky(matrix)
                .map_err(|leading_minor| CovError::NotPositiveDefinite { leading_minor })?;
            PrecisionMatrix::Dense { matrix: linalg::inverse_from_cholesky(&l) }
        }
    })
}
