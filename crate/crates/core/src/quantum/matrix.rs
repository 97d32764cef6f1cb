use crate::scalar::{Complex, Scalar};

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<S> {
    dim: usize,
    data: Vec<Complex<S>>,
}

impl<S: Scalar> CMatrix<S> {
    /// Panics if `data.len() != dim * dim`.
    pub fn new(dim: usize, data: Vec<Complex<S>>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data does not match dimension {dim}");
        CMatrix { dim, data }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<S>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        CMatrix { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| Complex::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { Complex::one() } else { Complex::zero() })
    }

    /// Real diagonal matrix.
    pub fn diagonal(diag: &[S]) -> Self {
        Self::from_fn(diag.len(), |r, c| if r == c { Complex::real(diag[r].clone()) } else { Complex::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &Complex<S> {
        &self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex<S>) {
        self.data[r * self.dim + c] = v;
    }

    pub fn entries(&self) -> &[Complex<S>] {
        &self.data
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&Complex<S>) -> Complex<T>) -> CMatrix<T> {
        CMatrix { dim: self.dim, data: self.data.iter().map(f).collect() }
    }

    pub fn trace(&self) -> Complex<S> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_fn(self.dim, |r, c| self.get(r, c) + other.get(r, c))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_fn(self.dim, |r, c| self.get(r, c) - other.get(r, c))
    }

    pub fn scale(&self, k: &S) -> Self {
        self.map(|z| z.scale(k))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        Self::from_fn(n, |r, c| {
            (0..n).fold(Complex::zero(), |acc, k| acc + self.get(r, k) * other.get(k, c))
        })
    }

    /// Kronecker product `self ⊗ other`.
    ///
    /// With this ordering, `(A ⊗ B)[(a·db + b), (a'·db + b')] = A[a,a']·B[b,b']`,
    /// so the *last* factor varies fastest.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        Self::from_fn(da * db, |r, c| self.get(r / db, c / db) * other.get(r % db, c % db))
    }

    /// Largest `max(|re|, |im|)` of `A - A†`.
    pub fn hermitian_residual(&self) -> S {
        let mut worst = S::zero();
        for r in 0..self.dim {
            for c in r..self.dim {
                let d = (self.get(r, c) - &self.get(c, r).conj()).max_part_abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest `max(|re|, |im|)` entry.
    pub fn max_entry_part(&self) -> S {
        self.data.iter().map(Complex::max_part_abs).fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |r, c| self.get(idx[r], idx[c]).clone())
    }

    /// Determinant by cofactor expansion; intended for small matrices.
    pub fn determinant(&self) -> Complex<S> {
        match self.dim {
            0 => Complex::one(),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            n => {
                let mut det = Complex::zero();
                for j in 0..n {
                    let rest: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                    let minor = Self::from_fn(n - 1, |r, c| self.get(r + 1, rest[c]).clone());
                    let term = self.get(0, j) * &minor.determinant();
                    det = if j % 2 == 0 { det + term } else { det - term };
                }
                det
            }
        }
    }
}
