//! Symmetric tridiagonal eigensolver: implicit QL with Wilkinson shifts.
//!
//! The eigenvector accumulation can be restricted to a subset of rows. The
//! rotations act on columns of the accumulated matrix, so tracking only rows
//! `r ∈ rows` costs O(m · |rows|) per sweep instead of O(m²).

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix stored by its two bands.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSym {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalSym {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidInput("tridiagonal matrix must have dimension >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidInput(format!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if let Some(index) = diag.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "diagonal", index });
        }
        if let Some(index) = offdiag.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "off-diagonal", index });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn with_zero_diagonal(offdiag: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; offdiag.len() + 1], offdiag)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim();
        assert_eq!(v.len(), m, "matvec dimension mismatch");
        let mut out: Vec<f64> = self.diag.iter().zip(v).map(|(d, x)| d * x).collect();
        for (i, &e) in self.offdiag.iter().enumerate() {
            out[i] += e * v[i + 1];
            out[i + 1] += e * v[i];
        }
        out
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.dim();
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            a[i * m + i] = self.diag[i];
        }
        for (i, &e) in self.offdiag.iter().enumerate() {
            a[i * m + i + 1] = e;
            a[(i + 1) * m + i] = e;
        }
        a
    }
}

/// Full eigendecomposition. Eigenvalues ascending; eigenvector `j` is stored
/// contiguously (column-major storage).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> &[f64] {
        let m = self.dim();
        &self.vectors[j * m..(j + 1) * m]
    }

    /// Component `k` of eigenvector `j`.
    pub fn component(&self, k: usize, j: usize) -> f64 {
        self.vectors[j * self.dim() + k]
    }

    /// max over i≠j of |v_i·v_j| and over j of |‖v_j‖ − 1|.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..m {
            let vi = self.eigenvector(i);
            for j in i..m {
                let dot: f64 = vi.iter().zip(self.eigenvector(j)).map(|(a, b)| a * b).sum();
                let defect = if i == j { (dot.sqrt() - 1.0).abs() } else { dot.abs() };
                worst = worst.max(defect);
            }
        }
        worst
    }

    /// max over j of ‖H v_j − λ_j v_j‖₂.
    pub fn max_residual(&self, matrix: &TridiagonalSym) -> f64 {
        (0..self.dim())
            .map(|j| {
                let v = self.eigenvector(j);
                let hv = matrix.matvec(v);
                hv.iter()
                    .zip(v)
                    .map(|(h, x)| (h - self.eigenvalues[j] * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues together with selected rows of the eigenvector matrix.
#[derive(Debug, Clone)]
pub struct PartialEigenvectors {
    eigenvalues: Vec<f64>,
    rows: Vec<usize>,
    // column-major, `rows.len()` entries per eigenvector
    values: Vec<f64>,
}

impl PartialEigenvectors {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Component at tracked row `rows()[slot]` of eigenvector `j`.
    pub fn component(&self, slot: usize, j: usize) -> f64 {
        self.values[j * self.rows.len() + slot]
    }

    /// The tracked row `rows()[slot]` across all eigenvectors.
    pub fn row(&self, slot: usize) -> Vec<f64> {
        (0..self.eigenvalues.len()).map(|j| self.component(slot, j)).collect()
    }
}

pub fn eigh_tridiagonal(matrix: &TridiagonalSym) -> Result<EigenDecomposition> {
    let rows: Vec<usize> = (0..matrix.dim()).collect();
    let partial = ql_implicit(matrix, &rows)?;
    Ok(EigenDecomposition {
        eigenvalues: partial.eigenvalues,
        vectors: partial.values,
    })
}

pub fn eigh_tridiagonal_rows(matrix: &TridiagonalSym, rows: &[usize]) -> Result<PartialEigenvectors> {
    if let Some(&bad) = rows.iter().find(|&&r| r >= matrix.dim()) {
        return Err(Error::InvalidInput(format!(
            "row {bad} out of range for dimension {}",
            matrix.dim()
        )));
    }
    ql_implicit(matrix, rows)
}

pub fn eigvalsh_tridiagonal(matrix: &TridiagonalSym) -> Result<Vec<f64>> {
    Ok(ql_implicit(matrix, &[])?.eigenvalues)
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

fn ql_implicit(matrix: &TridiagonalSym, rows: &[usize]) -> Result<PartialEigenvectors> {
    let n = matrix.dim();
    let nr = rows.len();
    let mut d = matrix.diag.clone();
    let mut e = matrix.offdiag.clone();
    e.push(0.0);

    let mut z = vec![0.0; n * nr];
    for (slot, &r) in rows.iter().enumerate() {
        z[r * nr + slot] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut shift_acc = 0.0_f64;
    let mut tst1 = 0.0_f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] == 0 guarantees m < n
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(Error::NoConvergence {
                        routine: "eigh_tridiagonal",
                        iterations: sweeps,
                    });
                }
                // Wilkinson shift from the leading 2x2 of the unreduced block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift_acc += h;

                // Implicit QL sweep from m-1 down to l.
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
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if nr > 0 {
                        let (left, right) = z.split_at_mut((i + 1) * nr);
                        let zi = &mut left[i * nr..];
                        let zi1 = &mut right[..nr];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hh = *b;
                            *b = s * *a + c * hh;
                            *a = c * *a - s * hh;
                        }
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
        d[l] += shift_acc;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let mut values = Vec::with_capacity(n * nr);
    for &j in &order {
        values.extend_from_slice(&z[j * nr..(j + 1) * nr]);
    }
    Ok(PartialEigenvectors {
        eigenvalues,
        rows: rows.to_vec(),
        values,
    })
}
